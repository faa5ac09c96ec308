import { ApiClient } from "./api.js";
import { App } from "./app.js";

// Base URL comes from ?api=...; default matches the serve command's default port.
const params = new URLSearchParams(window.location.search);
const base = params.get("api") ?? "http://127.0.0.1:8080";

const root = document.getElementById("app");
if (root) {
  const app = new App(root, new ApiClient(base));
  void app.start();
}
