export type Toaster = {
  show: (message: string, providerKind?: string | null) => void;
};

export function installToasts(host: HTMLElement, ttlMs = 6000): Toaster {
  const stack = document.createElement("div");
  stack.className = "toast-stack";
  host.append(stack);

  return {
    show(message, providerKind = null) {
      const toast = document.createElement("div");
      toast.className = "toast";
      if (providerKind) {
        const badge = document.createElement("span");
        badge.className = "toast-provider";
        badge.textContent = providerKind;
        toast.append(badge);
      }
      const text = document.createElement("span");
      text.textContent = message;
      toast.append(text);
      stack.append(toast);
      setTimeout(() => toast.remove(), ttlMs);
    },
  };
}
