import * as fs from "fs";
import * as path from "path";
import * as tf from "@tensorflow/tfjs";
import { PNG } from "pngjs";

/**
 * Tiny stand-in detection model with the real model's interface: NHWC RGB
 * in, half-resolution 2-channel score map out. A single 2x2/stride-2 conv
 * with all-(-1) kernel and sigmoid turns ImageNet-normalized brightness
 * into an ink score: dark pixels -> ~1, white background -> ~0.
 */
export async function buildTinyModel(dir: string): Promise<string> {
  const model = tf.sequential();
  model.add(
    tf.layers.conv2d({
      inputShape: [null, null, 3] as unknown as number[],
      filters: 2,
      kernelSize: 2,
      strides: 2,
      padding: "same",
      activation: "sigmoid",
      kernelInitializer: tf.initializers.constant({ value: -1 }),
      biasInitializer: "zeros",
    })
  );
  fs.mkdirSync(dir, { recursive: true });
  await model.save(
    tf.io.withSaveHandler(async (artifacts) => {
      const weightsManifest = [
        { paths: ["weights.bin"], weights: artifacts.weightSpecs },
      ];
      const manifest = {
        modelTopology: artifacts.modelTopology,
        format: "layers-model",
        generatedBy: "craft-shim tests",
        convertedBy: null,
        weightsManifest,
      };
      fs.writeFileSync(path.join(dir, "model.json"), JSON.stringify(manifest));
      fs.writeFileSync(
        path.join(dir, "weights.bin"),
        Buffer.from(artifacts.weightData as ArrayBuffer)
      );
      return { modelArtifactsInfo: { dateSaved: new Date(), modelTopologyType: "JSON" } };
    })
  );
  return dir;
}

export function writePng(
  filePath: string,
  width: number,
  height: number,
  pixel: (x: number, y: number) => number
): string {
  const png = new PNG({ width, height });
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const v = pixel(x, y);
      const idx = (y * width + x) * 4;
      png.data[idx] = v;
      png.data[idx + 1] = v;
      png.data[idx + 2] = v;
      png.data[idx + 3] = 255;
    }
  }
  fs.mkdirSync(path.dirname(filePath), { recursive: true });
  fs.writeFileSync(filePath, PNG.sync.write(png));
  return filePath;
}

export interface Rect {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

export function writeBlocksPng(filePath: string, width: number, height: number, rects: Rect[]): string {
  return writePng(filePath, width, height, (x, y) =>
    rects.some((r) => x >= r.x0 && x < r.x1 && y >= r.y0 && y < r.y1) ? 15 : 255
  );
}
