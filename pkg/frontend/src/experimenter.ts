/** Experimenter console: cursor display, advance/pause, live charts. */
import { buildSeries, drawLineChart } from "./charts.js";
import { Connection } from "./connection.js";
import type { ServerMessage } from "./protocol.js";
import type { Ctx2D } from "./render.js";
import { initialState, reduce, setDisconnected } from "./state.js";

function wsUrl(): string {
  const proto = location.protocol === "https:" ? "wss:" : "ws:";
  return `${proto}//${location.host}/ws?role=experimenter`;
}

export function startExperimenterConsole(): void {
  const status = document.getElementById("status") as HTMLElement;
  const cursorInfo = document.getElementById("cursor") as HTMLElement;
  const toast = document.getElementById("toast") as HTMLElement;
  const advanceButton = document.getElementById("advance") as HTMLButtonElement;
  const pauseButton = document.getElementById("pause") as HTMLButtonElement;
  const conditionSelect = document.getElementById("condition") as HTMLSelectElement;
  const assignButton = document.getElementById("assign") as HTMLButtonElement;
  const errorChart = document.getElementById("chart-error") as HTMLCanvasElement;
  const pathChart = document.getElementById("chart-elong") as HTMLCanvasElement;

  let state = initialState();

  function showToast(text: string): void {
    toast.textContent = text;
    toast.style.display = "block";
    setTimeout(() => (toast.style.display = "none"), 4000);
  }

  function redraw(): void {
    const snap = state.snapshot;
    if (snap) {
      cursorInfo.textContent =
        `day ${snap.day} · cursor ${snap.cursor} · phase ${snap.phaseName ?? "-"} · ` +
        `trial ${snap.trialIndex ?? "-"} shot ${snap.shotNumber ?? "-"} · ` +
        `prompt ${snap.prompt ? (snap.prompt.phase ?? `foot ${snap.prompt.toPosition}`) : "-"}` +
        (snap.paused ? " · PAUSED" : "") + (snap.done ? " · DONE" : "");
    }
    const errCtx = errorChart.getContext("2d") as unknown as Ctx2D;
    drawLineChart(
      errCtx,
      buildSeries(state.trialSummaries, "mean_abs_force_error_n", "force error (N) per trial"),
      errorChart.width,
      errorChart.height,
    );
    const pathCtx = pathChart.getContext("2d") as unknown as Ctx2D;
    drawLineChart(
      pathCtx,
      buildSeries(state.trialSummaries, "mean_abs_elongation_error_mm", "elongation error (mm) per trial"),
      pathChart.width,
      pathChart.height,
    );
  }

  const connection = new Connection(wsUrl(), {
    onMessage(message: ServerMessage) {
      state = reduce(state, message, Date.now());
      if (message.type === "error") showToast(message.detail ?? message.error);
      redraw();
    },
    onStatus(connected: boolean) {
      if (!connected) state = setDisconnected(state);
      status.textContent = connected ? "connected" : "disconnected";
    },
  });
  connection.open();

  advanceButton.addEventListener("click", () =>
    connection.send({ type: "experimenter", command: "advance" }),
  );
  pauseButton.addEventListener("click", () =>
    connection.send({ type: "experimenter", command: "pause" }),
  );
  assignButton.addEventListener("click", () =>
    connection.send({
      type: "experimenter",
      command: "assign_condition",
      condition: conditionSelect.value,
    }),
  );
}

if (typeof document !== "undefined" && document.getElementById("advance")) {
  startExperimenterConsole();
}
