import { GatewayClient } from "./api";
import { App } from "./app";

const base = new URLSearchParams(window.location.search).get("api") ?? "";
const client = new GatewayClient(base);
const root = document.getElementById("app");
if (root) new App(document, root, client).start();
