import { ApiClient } from "./api.js";
import { ChatApp } from "./ui.js";

function apiBase(): string {
  const override = new URLSearchParams(window.location.search).get("api");
  return override ?? "http://127.0.0.1:8140";
}

function grab<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing #${id}`);
  return node as T;
}

const app = new ChatApp(new ApiClient(apiBase()), {
  transcript: grab("transcript"),
  chips: grab("chips"),
  input: grab<HTMLInputElement>("input"),
  send: grab<HTMLButtonElement>("send"),
  banner: grab("banner"),
  panel: grab("panel"),
  panelToggle: grab<HTMLButtonElement>("panel-toggle"),
  newSession: grab<HTMLButtonElement>("new-session"),
});

void app.start();
