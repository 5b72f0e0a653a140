/**
 * Model loading for pure-JS tfjs in Node: read model.json plus its weight
 * shards from disk and hand tfjs an in-memory artifact. Accepts both
 * graph-model and layers-model exports of a CRAFT checkpoint.
 */

import * as fs from "fs";
import * as path from "path";
import * as tf from "@tensorflow/tfjs";

export type TextDetectionModel = tf.GraphModel | tf.LayersModel;

function readArtifacts(modelJsonPath: string): tf.io.ModelArtifacts {
  const dir = path.dirname(modelJsonPath);
  const manifest = JSON.parse(fs.readFileSync(modelJsonPath, "utf-8"));
  const weightSpecs: tf.io.WeightsManifestEntry[] = [];
  const shards: Buffer[] = [];
  for (const group of manifest.weightsManifest ?? []) {
    weightSpecs.push(...group.weights);
    for (const shardPath of group.paths) {
      shards.push(fs.readFileSync(path.join(dir, shardPath)));
    }
  }
  const weightData = new Uint8Array(Buffer.concat(shards)).buffer;
  return {
    modelTopology: manifest.modelTopology,
    format: manifest.format,
    generatedBy: manifest.generatedBy,
    convertedBy: manifest.convertedBy,
    weightSpecs,
    weightData,
  };
}

export async function loadModel(modelPath: string): Promise<TextDetectionModel> {
  const modelJsonPath = modelPath.endsWith(".json")
    ? modelPath
    : path.join(modelPath, "model.json");
  if (!fs.existsSync(modelJsonPath)) {
    throw new Error(`model not found at ${modelJsonPath}`);
  }
  let artifacts: tf.io.ModelArtifacts;
  try {
    artifacts = readArtifacts(modelJsonPath);
  } catch (err) {
    throw new Error(`cannot read model ${modelJsonPath}: ${(err as Error).message}`);
  }
  const handler = tf.io.fromMemory(artifacts);
  try {
    if (artifacts.format === "graph-model") {
      return await tf.loadGraphModel(handler);
    }
    return await tf.loadLayersModel(handler);
  } catch (err) {
    throw new Error(`cannot load model ${modelJsonPath}: ${(err as Error).message}`);
  }
}
