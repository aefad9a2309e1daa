// Entry point: bind to ?session=… directly, or show the chooser.

import { ApiError, TrainerClient } from "./client.js";
import { TrainerApp } from "./model.js";
import { renderChooser } from "./render.js";

const params = new URLSearchParams(location.search);
const base =
  params.get("api") ?? `http://${location.hostname || "127.0.0.1"}:8000`;
const client = new TrainerClient(base);
const mount = document.getElementById("app")!;

let app: TrainerApp | null = null;

function boot(sid: string): void {
  app?.stop();
  app = new TrainerApp(mount, client, sid);
  void app.start();
}

async function showChooser(error: string | null = null): Promise<void> {
  let sessions: Awaited<ReturnType<TrainerClient["listSessions"]>>["sessions"] = [];
  try {
    sessions = (await client.listSessions()).sessions;
  } catch (err) {
    error = error ?? `cannot reach ${base}: ${String(err)}`;
  }
  mount.replaceChildren(renderChooser(sessions, error));
}

mount.addEventListener("click", (event) => {
  const target = event.target as Element | null;
  const choose = target?.closest("[data-choose]");
  if (choose) {
    boot(choose.getAttribute("data-choose")!);
    return;
  }
  if (target?.closest('[data-action="create"]')) {
    const value = (id: string) =>
      (document.getElementById(id) as HTMLInputElement | null)?.value ?? "";
    void client
      .createSession({
        scenario: value("scenario") || "test_city",
        ruleset: value("ruleset") || null,
        seed: Number(value("seed") || "0"),
        step_delay: Number(value("step_delay") || "0"),
      })
      .then((doc) => boot(doc.session))
      .catch((err) =>
        showChooser(err instanceof ApiError ? err.message : String(err)),
      );
  }
});

const sid = params.get("session");
if (sid) boot(sid);
else void showChooser();
