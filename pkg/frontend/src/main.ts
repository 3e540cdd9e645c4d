import { App } from "./app.js";

const root = document.querySelector<HTMLElement>("#app");
if (!root) {
  throw new Error("missing #app mount point");
}

const params = new URLSearchParams(window.location.search);
const app = new App(root, {
  apiBase: params.get("api") ?? root.dataset.api ?? "",
  sessionId: params.get("session"),
  onSessionChange: (id) => {
    const url = new URL(window.location.href);
    url.searchParams.set("session", id);
    window.history.replaceState(null, "", url);
  },
});
void app.start();
