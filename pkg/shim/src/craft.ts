/**
 * Character-region detection: run the model on a prepared input, then turn
 * the region/affinity score maps into axis-aligned word boxes.
 *
 * Postprocessing follows the usual recipe: threshold the two maps into one
 * binary mask, take connected components, keep components whose peak region
 * score clears the text threshold, and collapse each component to the
 * bounding rectangle of its pixels mapped back to input coordinates.
 */

import * as tf from "@tensorflow/tfjs";

import { PreparedInput } from "./image";
import { TextDetectionModel } from "./model";

export interface Thresholds {
  textThreshold: number;
  linkThreshold: number;
  lowText: number;
}

export const DEFAULT_THRESHOLDS: Thresholds = {
  textThreshold: 0.7,
  linkThreshold: 0.4,
  lowText: 0.4,
};

export interface Box {
  xMin: number;
  yMin: number;
  xMax: number;
  yMax: number;
  score: number;
}

export interface ScoreMaps {
  width: number;
  height: number;
  region: Float32Array;
  affinity: Float32Array;
}

export async function inferScoreMaps(
  model: TextDetectionModel,
  input: PreparedInput
): Promise<ScoreMaps> {
  const result = tf.tidy(() => {
    const tensor = tf.tensor4d(input.data, [1, input.height, input.width, 3]);
    const raw = model.predict(tensor);
    const out = Array.isArray(raw) ? raw[0] : (raw as tf.Tensor);
    return out.squeeze([0]) as tf.Tensor3D;
  });
  const [height, width, channels] = result.shape;
  if (channels < 1) {
    result.dispose();
    throw new Error(`model produced ${channels} channels, need region (+affinity)`);
  }
  const values = (await result.data()) as Float32Array;
  result.dispose();
  const region = new Float32Array(width * height);
  const affinity = new Float32Array(width * height);
  for (let i = 0; i < width * height; i++) {
    region[i] = values[i * channels];
    affinity[i] = channels > 1 ? values[i * channels + 1] : 0;
  }
  return { width, height, region, affinity };
}

/** 4-connected component labelling of the combined text/link mask. */
export function componentBoxes(maps: ScoreMaps, thresholds: Thresholds): Box[] {
  const { width, height, region, affinity } = maps;
  const n = width * height;
  const mask = new Uint8Array(n);
  for (let i = 0; i < n; i++) {
    if (region[i] > thresholds.lowText || affinity[i] > thresholds.linkThreshold) {
      mask[i] = 1;
    }
  }
  const visited = new Uint8Array(n);
  const stack = new Int32Array(n);
  const boxes: Box[] = [];
  for (let start = 0; start < n; start++) {
    if (!mask[start] || visited[start]) continue;
    let top = 0;
    stack[top++] = start;
    visited[start] = 1;
    let xMin = width;
    let xMax = -1;
    let yMin = height;
    let yMax = -1;
    let peak = 0;
    while (top > 0) {
      const idx = stack[--top];
      const x = idx % width;
      const y = (idx / width) | 0;
      if (x < xMin) xMin = x;
      if (x > xMax) xMax = x;
      if (y < yMin) yMin = y;
      if (y > yMax) yMax = y;
      if (region[idx] > peak) peak = region[idx];
      if (x > 0 && mask[idx - 1] && !visited[idx - 1]) {
        visited[idx - 1] = 1;
        stack[top++] = idx - 1;
      }
      if (x + 1 < width && mask[idx + 1] && !visited[idx + 1]) {
        visited[idx + 1] = 1;
        stack[top++] = idx + 1;
      }
      if (y > 0 && mask[idx - width] && !visited[idx - width]) {
        visited[idx - width] = 1;
        stack[top++] = idx - width;
      }
      if (y + 1 < height && mask[idx + width] && !visited[idx + width]) {
        visited[idx + width] = 1;
        stack[top++] = idx + width;
      }
    }
    if (peak < thresholds.textThreshold) continue;
    boxes.push({ xMin, yMin, xMax: xMax + 1, yMax: yMax + 1, score: peak });
  }
  return boxes;
}

export async function detectBoxes(
  model: TextDetectionModel,
  input: PreparedInput,
  thresholds: Thresholds
): Promise<Box[]> {
  const maps = await inferScoreMaps(model, input);
  const mapScale = input.width / maps.width;
  return componentBoxes(maps, thresholds).map((b) => ({
    xMin: b.xMin * mapScale * input.scaleBack,
    yMin: b.yMin * mapScale * input.scaleBack,
    xMax: b.xMax * mapScale * input.scaleBack,
    yMax: b.yMax * mapScale * input.scaleBack,
    score: b.score,
  }));
}
