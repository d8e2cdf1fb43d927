import { mountApp } from "./app.js";

const container = document.getElementById("app");
if (container) {
  void mountApp(container);
}
