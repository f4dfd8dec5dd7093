/** Entry point: mount the app on #app.
 *
 * The API base URL resolves in order: `?api=` URL parameter, the root
 * element's data-api-base attribute, then same-origin. */

import { SearchClient } from "./api.js";
import { App } from "./app.js";

const root = document.getElementById("app");
if (root === null) {
  throw new Error("missing #app mount point");
}
const apiBase =
  new URLSearchParams(window.location.search).get("api") ?? root.dataset["apiBase"] ?? "";

new App(root, new SearchClient(apiBase)).start();
