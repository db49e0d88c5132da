/**
 * Checkpointing without tfjs-node: model topology + weights and optimizer
 * state are written as JSON + raw little-endian binaries via a custom IO
 * handler, and restored losslessly.
 */

import * as fs from 'node:fs';
import * as path from 'node:path';
import * as tf from '@tensorflow/tfjs';

interface NamedTensor {
  name: string;
  tensor: tf.Tensor;
}

export async function saveCheckpoint(
  dir: string,
  model: tf.LayersModel,
  optimizer?: tf.Optimizer,
  extra: Record<string, unknown> = {},
): Promise<void> {
  fs.mkdirSync(dir, { recursive: true });
  await model.save(
    tf.io.withSaveHandler(async (artifacts) => {
      const weightData = concatBuffers(artifacts.weightData!);
      fs.writeFileSync(path.join(dir, 'weights.bin'), weightData);
      fs.writeFileSync(
        path.join(dir, 'model.json'),
        JSON.stringify({
          modelTopology: artifacts.modelTopology,
          weightSpecs: artifacts.weightSpecs,
        }),
      );
      return { modelArtifactsInfo: { dateSaved: new Date(), modelTopologyType: 'JSON' } };
    }),
  );

  if (optimizer) {
    const weights = await optimizer.getWeights();
    const specs = weights.map((w) => ({
      name: w.name,
      shape: w.tensor.shape,
      dtype: w.tensor.dtype,
    }));
    const chunks: Buffer[] = [];
    for (const w of weights) {
      const data = await w.tensor.data();
      chunks.push(Buffer.from(data.buffer, data.byteOffset, data.byteLength));
    }
    fs.writeFileSync(path.join(dir, 'optimizer.bin'), Buffer.concat(chunks));
    fs.writeFileSync(path.join(dir, 'optimizer.json'), JSON.stringify(specs));
  }
  fs.writeFileSync(path.join(dir, 'state.json'), JSON.stringify(extra));
}

export interface LoadedCheckpoint {
  model: tf.LayersModel;
  optimizerWeights: NamedTensor[] | null;
  extra: Record<string, unknown>;
}

export async function loadCheckpoint(dir: string): Promise<LoadedCheckpoint> {
  const spec = JSON.parse(fs.readFileSync(path.join(dir, 'model.json'), 'utf-8'));
  const weightData = toArrayBuffer(fs.readFileSync(path.join(dir, 'weights.bin')));
  const model = await tf.loadLayersModel(
    tf.io.fromMemory({
      modelTopology: spec.modelTopology,
      weightSpecs: spec.weightSpecs,
      weightData,
    }),
  );

  let optimizerWeights: NamedTensor[] | null = null;
  const optJson = path.join(dir, 'optimizer.json');
  if (fs.existsSync(optJson)) {
    const specs: { name: string; shape: number[]; dtype: 'float32' | 'int32' }[] = JSON.parse(
      fs.readFileSync(optJson, 'utf-8'),
    );
    const raw = fs.readFileSync(path.join(dir, 'optimizer.bin'));
    let offset = 0;
    optimizerWeights = specs.map((s) => {
      const count = s.shape.reduce((a, b) => a * b, 1);
      const bytes = count * 4;
      const view = toArrayBuffer(raw.subarray(offset, offset + bytes));
      offset += bytes;
      const values =
        s.dtype === 'int32' ? new Int32Array(view) : new Float32Array(view);
      return { name: s.name, tensor: tf.tensor(Array.from(values), s.shape, s.dtype) };
    });
  }

  const statePath = path.join(dir, 'state.json');
  const extra = fs.existsSync(statePath)
    ? JSON.parse(fs.readFileSync(statePath, 'utf-8'))
    : {};
  return { model, optimizerWeights, extra };
}

export async function restoreOptimizer(
  optimizer: tf.Optimizer,
  weights: NamedTensor[],
): Promise<void> {
  await optimizer.setWeights(weights);
}

function concatBuffers(data: ArrayBuffer | ArrayBuffer[]): Buffer {
  if (Array.isArray(data)) {
    return Buffer.concat(data.map((b) => Buffer.from(b)));
  }
  return Buffer.from(data);
}

function toArrayBuffer(buf: Buffer): ArrayBuffer {
  const out = new ArrayBuffer(buf.byteLength);
  new Uint8Array(out).set(buf);
  return out;
}
