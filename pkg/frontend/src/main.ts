/**
 * Entry point. The backend base URL is the single configuration knob:
 * `?api=http://host:port` or a same-origin default.
 */

import { VerifyApi } from "./api.js";
import { QueueSession } from "./session.js";
import { ReviewApp } from "./ui.js";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("api") ?? "http://127.0.0.1:8000";
const annotator = params.get("annotator") ?? "anonymous";

const api = new VerifyApi(baseUrl);
const session = new QueueSession(api, annotator);
const app = new ReviewApp(api, session);

app.run().catch((error) => {
  const root = document.getElementById("app");
  if (root) {
    root.textContent = `failed to start: ${error}. Is the backend running at ${baseUrl}?`;
  }
});
