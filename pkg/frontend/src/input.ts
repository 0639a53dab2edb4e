/** Drag and keyboard input mapping.
 *
 * Mouse/touch drag along the pull axis stands in for the robot
 * end-effector; there is no force-feedback hardware, so the rendered
 * force instead damps the drag (higher force, stiffer cursor).
 */

export interface DragState {
  active: boolean;
  startPixelX: number;
  startPositionMm: number;
}

export const PIXELS_PER_MM = 4;
export const FORCE_DRAG_DAMPING = 0.08; // per newton

/** Commanded end-effector x for the current pointer position. */
export function dragTarget(
  drag: DragState,
  pixelX: number,
  renderedForce: number,
  pixelsPerMm: number = PIXELS_PER_MM,
): number {
  const rawDeltaMm = (pixelX - drag.startPixelX) / pixelsPerMm;
  const gain = 1 / (1 + FORCE_DRAG_DAMPING * Math.max(0, renderedForce));
  return drag.startPositionMm + rawDeltaMm * gain;
}

export function beginDrag(pixelX: number, positionMm: number): DragState {
  return { active: true, startPixelX: pixelX, startPositionMm: positionMm };
}

export function endDrag(drag: DragState): DragState {
  return { ...drag, active: false };
}

export type ButtonEvent = "button_down" | "button_up" | null;

/** Space bar presses map to the grab button; repeats are ignored. */
export function keyToButton(
  key: string,
  isDown: boolean,
  buttonHeld: boolean,
): ButtonEvent {
  if (key !== " " && key !== "Space") return null;
  if (isDown && !buttonHeld) return "button_down";
  if (!isDown && buttonHeld) return "button_up";
  return null;
}
