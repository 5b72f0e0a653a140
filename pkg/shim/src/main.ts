/**
 * CLI wrapper around a CRAFT-style text detection model, speaking the
 * deblurtext detector bridge protocol:
 *
 *   node dist/main.js --model <dir-or-model.json> \
 *     --input {input_image} --output {output_file} [--device cpu] \
 *     [--text-threshold 0.7] [--link-threshold 0.4] [--low-text 0.4] \
 *     [--canvas-size 1280]
 *
 * Writes one `x_min,y_min,x_max,y_max` line per detected word region and
 * exits 0; exits nonzero with a message on stderr when the model cannot be
 * loaded or the image cannot be read.
 */

import * as fs from "fs";
import * as path from "path";

import { DEFAULT_THRESHOLDS, Thresholds, detectBoxes } from "./craft";
import { toDetectionFile } from "./format";
import { decodeImage, prepareInput } from "./image";
import { loadModel } from "./model";

interface CliArgs {
  input: string;
  output: string;
  model: string;
  device: string;
  canvasSize: number;
  thresholds: Thresholds;
}

class UsageError extends Error {}

function parseArgs(argv: string[]): CliArgs {
  const values: Record<string, string> = {};
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) {
      throw new UsageError(`unexpected argument ${arg}`);
    }
    const value = argv[i + 1];
    if (value === undefined) {
      throw new UsageError(`missing value for ${arg}`);
    }
    values[arg.slice(2)] = value;
    i++;
  }
  for (const required of ["input", "output", "model"]) {
    if (!values[required]) {
      throw new UsageError(`--${required} is required`);
    }
  }
  const device = values["device"] ?? "cpu";
  if (device !== "cpu" && device !== "accelerator") {
    throw new UsageError(`--device must be cpu or accelerator, got ${device}`);
  }
  const thresholds: Thresholds = {
    textThreshold: parseFloat(values["text-threshold"] ?? String(DEFAULT_THRESHOLDS.textThreshold)),
    linkThreshold: parseFloat(values["link-threshold"] ?? String(DEFAULT_THRESHOLDS.linkThreshold)),
    lowText: parseFloat(values["low-text"] ?? String(DEFAULT_THRESHOLDS.lowText)),
  };
  for (const [name, value] of Object.entries(thresholds)) {
    if (!Number.isFinite(value) || value <= 0 || value >= 1) {
      throw new UsageError(`${name} must be in (0, 1), got ${value}`);
    }
  }
  const canvasSize = parseInt(values["canvas-size"] ?? "1280", 10);
  if (!Number.isFinite(canvasSize) || canvasSize < 32) {
    throw new UsageError(`--canvas-size must be >= 32, got ${values["canvas-size"]}`);
  }
  return {
    input: values["input"],
    output: values["output"],
    model: values["model"],
    device,
    canvasSize,
    thresholds,
  };
}

async function run(args: CliArgs): Promise<void> {
  const model = await loadModel(args.model);
  const image = decodeImage(args.input);
  const input = prepareInput(image, args.canvasSize);
  const boxes = await detectBoxes(model, input, args.thresholds);
  // clip to the original image; drop anything the padding invented
  const inside = boxes.filter((b) => b.xMin < image.width && b.yMin < image.height);
  for (const b of inside) {
    b.xMax = Math.min(b.xMax, image.width);
    b.yMax = Math.min(b.yMax, image.height);
  }
  fs.mkdirSync(path.dirname(path.resolve(args.output)), { recursive: true });
  fs.writeFileSync(args.output, toDetectionFile(inside), "utf-8");
}

export async function main(argv: string[]): Promise<number> {
  let args: CliArgs;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(`usage error: ${(err as Error).message}`);
    return 2;
  }
  try {
    await run(args);
    return 0;
  } catch (err) {
    console.error((err as Error).message);
    return 1;
  }
}

if (require.main === module) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
