import { ApiClient } from "./api.js";
import { Wizard } from "./wizard.js";

const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app container");
}
const wizard = new Wizard({ root, api: new ApiClient("") });
void wizard.init();
