/**
 * Image decoding and the preprocessing the detector expects: bilinear
 * resize so the long side fits the canvas, pad up to a multiple of 32,
 * and ImageNet mean/variance normalization.
 */

import * as fs from "fs";
import * as path from "path";
import { PNG } from "pngjs";
import * as jpeg from "jpeg-js";

export interface RgbImage {
  width: number;
  height: number;
  /** RGB interleaved, [0, 1] floats, length = width * height * 3 */
  data: Float32Array;
}

export interface PreparedInput {
  /** normalized NHWC tensor data, padded to 32-multiples */
  data: Float32Array;
  width: number;
  height: number;
  /** multiply model-space coordinates by this to get back to input pixels */
  scaleBack: number;
}

const IMAGENET_MEAN = [0.485, 0.456, 0.406];
const IMAGENET_STD = [0.229, 0.224, 0.225];

export function decodeImage(filePath: string): RgbImage {
  let buffer: Buffer;
  try {
    buffer = fs.readFileSync(filePath);
  } catch (err) {
    throw new Error(`cannot read image ${filePath}: ${(err as Error).message}`);
  }
  const ext = path.extname(filePath).toLowerCase();
  let width: number;
  let height: number;
  let rgba: Uint8Array;
  try {
    if (ext === ".jpg" || ext === ".jpeg") {
      const decoded = jpeg.decode(buffer, { useTArray: true, maxMemoryUsageInMB: 1024 });
      width = decoded.width;
      height = decoded.height;
      rgba = decoded.data;
    } else {
      const decoded = PNG.sync.read(buffer);
      width = decoded.width;
      height = decoded.height;
      rgba = decoded.data;
    }
  } catch (err) {
    throw new Error(`cannot decode image ${filePath}: ${(err as Error).message}`);
  }
  const data = new Float32Array(width * height * 3);
  for (let i = 0, j = 0; i < width * height; i++, j += 4) {
    data[i * 3] = rgba[j] / 255;
    data[i * 3 + 1] = rgba[j + 1] / 255;
    data[i * 3 + 2] = rgba[j + 2] / 255;
  }
  return { width, height, data };
}

export function bilinearResize(img: RgbImage, outWidth: number, outHeight: number): RgbImage {
  const out = new Float32Array(outWidth * outHeight * 3);
  const xRatio = img.width / outWidth;
  const yRatio = img.height / outHeight;
  for (let y = 0; y < outHeight; y++) {
    const sy = Math.min((y + 0.5) * yRatio - 0.5, img.height - 1);
    const y0 = Math.max(0, Math.floor(sy));
    const y1 = Math.min(img.height - 1, y0 + 1);
    const fy = Math.max(0, sy - y0);
    for (let x = 0; x < outWidth; x++) {
      const sx = Math.min((x + 0.5) * xRatio - 0.5, img.width - 1);
      const x0 = Math.max(0, Math.floor(sx));
      const x1 = Math.min(img.width - 1, x0 + 1);
      const fx = Math.max(0, sx - x0);
      for (let c = 0; c < 3; c++) {
        const p00 = img.data[(y0 * img.width + x0) * 3 + c];
        const p01 = img.data[(y0 * img.width + x1) * 3 + c];
        const p10 = img.data[(y1 * img.width + x0) * 3 + c];
        const p11 = img.data[(y1 * img.width + x1) * 3 + c];
        const top = p00 + (p01 - p00) * fx;
        const bottom = p10 + (p11 - p10) * fx;
        out[(y * outWidth + x) * 3 + c] = top + (bottom - top) * fy;
      }
    }
  }
  return { width: outWidth, height: outHeight, data: out };
}

/** Resize so the long side is at most canvasSize, pad to 32-multiples, normalize. */
export function prepareInput(img: RgbImage, canvasSize: number): PreparedInput {
  const longSide = Math.max(img.width, img.height);
  const scale = Math.min(1, canvasSize / longSide);
  const targetW = Math.max(1, Math.round(img.width * scale));
  const targetH = Math.max(1, Math.round(img.height * scale));
  const resized =
    targetW === img.width && targetH === img.height
      ? img
      : bilinearResize(img, targetW, targetH);
  const padW = Math.ceil(targetW / 32) * 32;
  const padH = Math.ceil(targetH / 32) * 32;
  const data = new Float32Array(padW * padH * 3);
  for (let y = 0; y < padH; y++) {
    for (let x = 0; x < padW; x++) {
      // replicate the border into the padding so no artificial edges appear
      const sx = Math.min(x, targetW - 1);
      const sy = Math.min(y, targetH - 1);
      for (let c = 0; c < 3; c++) {
        const v = resized.data[(sy * targetW + sx) * 3 + c];
        data[(y * padW + x) * 3 + c] = (v - IMAGENET_MEAN[c]) / IMAGENET_STD[c];
      }
    }
  }
  return { data, width: padW, height: padH, scaleBack: 1 / scale };
}
