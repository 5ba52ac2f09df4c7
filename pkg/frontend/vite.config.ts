import { defineConfig } from "vitest/config";

// In dev the studio API runs separately (atlasedit serve); requests to
// /api are proxied there so the app can use a same-origin base.
export default defineConfig({
  server: {
    proxy: {
      "/api": {
        target: "http://127.0.0.1:8799",
        changeOrigin: true,
        rewrite: (path) => path.replace(/^\/api/, ""),
      },
    },
  },
  test: {
    environment: "jsdom",
    include: ["tests/**/*.test.ts"],
  },
});
