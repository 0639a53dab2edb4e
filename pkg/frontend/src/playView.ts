/** Participant page: drag to pull, space to grab/release. */
import { Connection } from "./connection.js";
import { beginDrag, dragTarget, endDrag, keyToButton, type DragState } from "./input.js";
import { isSnapshot, type ServerMessage } from "./protocol.js";
import {
  drawMinimap,
  drawPlayView,
  DEFAULT_VIEW,
  type BoardGeometry,
  type Ctx2D,
} from "./render.js";
import { initialState, reduce, renderModel, setDisconnected } from "./state.js";

function wsUrl(): string {
  const proto = location.protocol === "https:" ? "wss:" : "ws:";
  return `${proto}//${location.host}/ws?role=participant`;
}

export function startPlayView(): void {
  const canvas = document.getElementById("game") as HTMLCanvasElement;
  const minimap = document.getElementById("minimap") as HTMLCanvasElement;
  const banner = document.getElementById("banner") as HTMLElement;
  const ctx = canvas.getContext("2d") as unknown as Ctx2D;
  const mapCtx = minimap.getContext("2d") as unknown as Ctx2D;

  let state = initialState();
  let board: BoardGeometry | null = null;
  let drag: DragState = { active: false, startPixelX: 0, startPositionMm: 0 };
  let buttonHeld = false;

  const connection = new Connection(wsUrl(), {
    onMessage(message: ServerMessage) {
      state = reduce(state, message, Date.now());
      if (message.type === "hello" && board === null) {
        fetch(`/session/${message.participant}/manifest`)
          .then((response) => response.json())
          .then((manifest) => {
            board = manifest.board as BoardGeometry;
          })
          .catch(() => undefined);
      }
      if (isSnapshot(message)) draw();
    },
    onStatus(connected: boolean) {
      if (!connected) state = setDisconnected(state);
      banner.style.display = connected ? "none" : "block";
      if (buttonHeld && !connected) buttonHeld = false;
    },
  });
  connection.open();

  function draw(): void {
    const model = renderModel(state, Date.now());
    drawPlayView(ctx, model, DEFAULT_VIEW);
    if (board) drawMinimap(mapCtx, board, model.slideAnimation, minimap.width, minimap.height);
  }

  canvas.addEventListener("pointerdown", (event) => {
    const position = state.snapshot?.cursorPosition ?? 0;
    drag = beginDrag(event.clientX, position);
    canvas.setPointerCapture(event.pointerId);
  });
  canvas.addEventListener("pointermove", (event) => {
    if (!drag.active || !state.connected) return;
    const force = state.snapshot?.renderedForce ?? 0;
    connection.send({ type: "move", x: dragTarget(drag, event.clientX, force) });
  });
  canvas.addEventListener("pointerup", () => {
    drag = endDrag(drag);
  });
  window.addEventListener("keydown", (event) => {
    const action = keyToButton(event.key, true, buttonHeld);
    if (action) {
      buttonHeld = true;
      connection.send({ type: action });
      event.preventDefault();
    }
  });
  window.addEventListener("keyup", (event) => {
    const action = keyToButton(event.key, false, buttonHeld);
    if (action) {
      buttonHeld = false;
      connection.send({ type: action });
      event.preventDefault();
    }
  });

  setInterval(draw, 100); // keep score cards/overlays fresh between snapshots
}

if (typeof document !== "undefined" && document.getElementById("game")) {
  startPlayView();
}
