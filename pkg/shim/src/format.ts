/**
 * Detection file format of the pipeline bridge:
 * one `x_min,y_min,x_max,y_max[,confidence]` line per box.
 */

import { Box } from "./craft";

export const DETECTION_LINE = /^\d+(\.\d+)?,\d+(\.\d+)?,\d+(\.\d+)?,\d+(\.\d+)?(,\d+(\.\d+)?)?$/;

export function toDetectionLine(box: Box): string {
  const xMin = Math.max(0, Math.round(box.xMin));
  const yMin = Math.max(0, Math.round(box.yMin));
  const xMax = Math.max(xMin, Math.round(box.xMax));
  const yMax = Math.max(yMin, Math.round(box.yMax));
  return `${xMin},${yMin},${xMax},${yMax}`;
}

export function toDetectionFile(boxes: Box[]): string {
  if (boxes.length === 0) return "";
  return boxes.map(toDetectionLine).join("\n") + "\n";
}

/** Grammar check used by the tests; mirrors the pipeline's parser rules. */
export function isValidDetectionFile(text: string): boolean {
  return text
    .split("\n")
    .every((line) => line.trim() === "" || DETECTION_LINE.test(line.trim()));
}
