/** Bootstrap: read config from the query string, wire everything together. */

import { ConsoleController, chipTableFromSchema, SchemaDoc } from "./controller.js";
import { HttpTransport } from "./transport.js";
import { ConsoleView, TaskDoc } from "./view.js";

async function fetchJson<T>(url: string): Promise<T | null> {
  try {
    const response = await fetch(url);
    if (!response.ok) return null;
    return (await response.json()) as T;
  } catch {
    return null;
  }
}

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const server = params.get("server") ?? "http://127.0.0.1:8732";
  const mode = params.get("mode") ?? "conversation";
  // the schema is a static copy of the server's config: the wire protocol
  // names slots but not their catalogs, so chips come from this file
  const schema = await fetchJson<SchemaDoc>(params.get("schema") ?? "./assembly.schema.json");
  const task = await fetchJson<TaskDoc>(params.get("task") ?? "./assembly.task.json");

  const controller = new ConsoleController(
    new HttpTransport(server),
    schema?.name ?? "assembly",
    schema ? chipTableFromSchema(schema) : new Map(),
  );
  new ConsoleView(document.body, controller, task);

  const reconnect = document.querySelector("#reconnect") as HTMLButtonElement;
  reconnect.addEventListener("click", () => void controller.connect(mode));
  await controller.connect(mode);
}

void boot();
