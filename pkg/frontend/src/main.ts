import { StudioClient } from "./api";
import { StudioApp } from "./app";
import "./style.css";

const base = import.meta.env?.VITE_API_BASE ?? "/api";
const root = document.querySelector<HTMLElement>("#app");
if (!root) throw new Error("missing #app mount point");

const app = new StudioApp(root, new StudioClient(base));
app.boot().catch((err) => {
  root.append(
    Object.assign(document.createElement("div"), {
      className: "boot-error",
      textContent: `cannot reach the studio API: ${err}`,
    }),
  );
});
