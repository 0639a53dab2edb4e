/** Canvas drawing for the play view.
 *
 * Functions take a minimal 2D-context interface so tests can pass a
 * recording stub; only display scaling happens here, all quantities come
 * from the server.
 */
import type { RenderModel } from "./state.js";

export interface Ctx2D {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
  textAlign: CanvasTextAlign;
  clearRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  fill(): void;
  stroke(): void;
  fillText(text: string, x: number, y: number): void;
}

export interface BoardGeometry {
  centerDistance: number;
  boardRadius: number;
  ringPoints: number[];
  ringBoundaries: number[];
}

export interface ViewConfig {
  width: number;
  height: number;
  pixelsPerMm: number; // side view scale
  cubePixelX: number; // screen x of the cube rest position
}

export const DEFAULT_VIEW: ViewConfig = {
  width: 900,
  height: 420,
  pixelsPerMm: 4,
  cubePixelX: 620,
};

const ICE = "#eef4f8";
const CUBE = "#2255cc";
const SPHERE = "#2a9d44";
const METER_BG = "#d8dee4";
const METER_FG = "#cc3344";

export function drawPlayView(ctx: Ctx2D, model: RenderModel, view: ViewConfig = DEFAULT_VIEW): void {
  ctx.clearRect(0, 0, view.width, view.height);
  ctx.fillStyle = ICE;
  ctx.fillRect(0, view.height * 0.55, view.width, view.height * 0.2);

  if (model.showCube) {
    ctx.fillStyle = CUBE;
    ctx.fillRect(view.cubePixelX - 14, view.height * 0.55 - 28, 28, 28);
  }
  if (model.showSphere && model.cursorPosition !== null) {
    ctx.fillStyle = SPHERE;
    ctx.beginPath();
    ctx.arc(
      view.cubePixelX + model.cursorPosition * view.pixelsPerMm,
      view.height * 0.55 - 14,
      10,
      0,
      Math.PI * 2,
    );
    ctx.fill();
  }
  if (model.showForceMeter) {
    drawForceMeter(ctx, model.forceFraction, view);
  }
  drawScores(ctx, model, view);
  if (model.scoreCard) {
    ctx.fillStyle = "#222";
    ctx.font = "28px sans-serif";
    ctx.textAlign = "center";
    ctx.fillText(
      `${model.scoreCard.points} points`,
      view.width / 2,
      view.height * 0.3,
    );
  }
  if (model.prompt) {
    drawPromptOverlay(ctx, model.prompt, view);
  }
  if (model.paused) {
    ctx.fillStyle = "rgba(40,40,40,0.6)";
    ctx.fillRect(0, 0, view.width, view.height);
    ctx.fillStyle = "#fff";
    ctx.font = "32px sans-serif";
    ctx.textAlign = "center";
    ctx.fillText("paused", view.width / 2, view.height / 2);
  }
}

export function drawForceMeter(ctx: Ctx2D, fraction: number, view: ViewConfig): void {
  const x = 30;
  const top = view.height * 0.2;
  const height = view.height * 0.55;
  ctx.fillStyle = METER_BG;
  ctx.fillRect(x, top, 26, height);
  ctx.fillStyle = METER_FG;
  const filled = height * fraction;
  ctx.fillRect(x, top + height - filled, 26, filled);
  ctx.strokeStyle = "#555";
  ctx.lineWidth = 1;
  ctx.strokeRect(x, top, 26, height);
}

export function drawScores(ctx: Ctx2D, model: RenderModel, view: ViewConfig): void {
  ctx.fillStyle = "#222";
  ctx.font = "16px sans-serif";
  ctx.textAlign = "right";
  ctx.fillText(`Score ${model.trialScore}`, view.width - 20, 28);
  ctx.fillText(`Total Score ${model.totalScore}`, view.width - 20, 50);
}

export function drawPromptOverlay(
  ctx: Ctx2D,
  prompt: NonNullable<RenderModel["prompt"]>,
  view: ViewConfig,
): void {
  ctx.fillStyle = "rgba(25,35,60,0.75)";
  ctx.fillRect(0, 0, view.width, view.height);
  ctx.fillStyle = "#fff";
  ctx.font = "24px sans-serif";
  ctx.textAlign = "center";
  const text =
    prompt.kind === "foot"
      ? `Move to foot position ${(prompt.toPosition ?? 0) + 1}`
      : `${prompt.phase}`;
  ctx.fillText(text, view.width / 2, view.height / 2);
  ctx.font = "15px sans-serif";
  ctx.fillText("waiting for the experimenter", view.width / 2, view.height / 2 + 34);
}

/** Top-down minimap: rings from the server manifest, optional cube marker. */
export function drawMinimap(
  ctx: Ctx2D,
  board: BoardGeometry,
  slide: { landing: number; progress: number } | null,
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = ICE;
  ctx.fillRect(0, 0, width, height);
  const scale = height / (board.centerDistance + board.boardRadius * 2);
  const centerY = height - board.centerDistance * scale;
  for (let i = board.ringBoundaries.length - 1; i >= 0; i--) {
    ctx.fillStyle = i % 2 === 0 ? "#d33" : "#fff";
    ctx.beginPath();
    ctx.arc(width / 2, centerY, board.ringBoundaries[i] * scale, 0, Math.PI * 2);
    ctx.fill();
  }
  if (slide) {
    ctx.fillStyle = CUBE;
    ctx.beginPath();
    ctx.arc(
      width / 2,
      height - slide.landing * slide.progress * scale,
      4,
      0,
      Math.PI * 2,
    );
    ctx.fill();
  }
}
