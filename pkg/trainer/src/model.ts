/**
 * Dual-head network: a VGG-style convolutional encoder shared by a U-shaped
 * segmentation decoder (skip connections, 1-channel sigmoid map at input
 * resolution) and a classification head (global pooling, two dense layers,
 * sigmoid scalar).
 *
 * Layer names are prefixed enc_/dec_/cls_ so heads can be inspected and
 * selectively warm-started.
 */

import * as tf from '@tensorflow/tfjs';

export interface ModelConfig {
  inputSize: number;
  /** channels per encoder block; a maxpool follows each block */
  encoderWidths?: number[];
  /** conv layers inside each encoder block (VGG16 style by default) */
  convsPerBlock?: number[];
  classifierUnits?: number;
  /** initializer seed, for reproducible runs */
  seed?: number;
  /**
   * initial bias of the score-map layer; a negative value starts the
   * sigmoid near the sparse-foreground prior and speeds segmentation
   * convergence (0 = vanilla)
   */
  scoreBias?: number;
  /** optional checkpoint to warm-start matching layers from */
  pretrainedCheckpoint?: string;
}

export const FULL_WIDTHS = [64, 128, 256, 512, 512];
export const FULL_CONVS = [2, 2, 3, 3, 3];

export function buildEttNet(config: ModelConfig): tf.LayersModel {
  const widths = config.encoderWidths ?? FULL_WIDTHS;
  const convs = config.convsPerBlock ?? FULL_CONVS.slice(0, widths.length);
  if (convs.length !== widths.length) {
    throw new Error(`convsPerBlock length ${convs.length} != encoderWidths length ${widths.length}`);
  }
  const size = config.inputSize;
  if (size % 2 ** widths.length !== 0) {
    throw new Error(`input size ${size} not divisible by 2^${widths.length}`);
  }
  const seed = config.seed ?? 1;
  let layerIdx = 0;
  const init = () => tf.initializers.glorotUniform({ seed: seed + layerIdx++ });

  const input = tf.input({ shape: [size, size, 3], name: 'radiograph' });
  let x: tf.SymbolicTensor = input;
  const skips: tf.SymbolicTensor[] = [];
  widths.forEach((width, b) => {
    for (let c = 0; c < convs[b]; c++) {
      x = tf.layers
        .conv2d({
          filters: width,
          kernelSize: 3,
          padding: 'same',
          activation: 'relu',
          kernelInitializer: init(),
          name: `enc_b${b}_c${c}`,
        })
        .apply(x) as tf.SymbolicTensor;
    }
    skips.push(x);
    x = tf.layers
      .maxPooling2d({ poolSize: 2, name: `enc_b${b}_pool` })
      .apply(x) as tf.SymbolicTensor;
  });
  const bottleneck = x;

  // segmentation path back up to input resolution; skips join additively
  // (cheaper than concatenation, still a U shape)
  let d = bottleneck;
  for (let b = widths.length - 1; b >= 0; b--) {
    d = tf.layers.upSampling2d({ size: [2, 2], name: `dec_b${b}_up` }).apply(d) as tf.SymbolicTensor;
    d = tf.layers
      .conv2d({
        filters: widths[b],
        kernelSize: 3,
        padding: 'same',
        activation: 'relu',
        kernelInitializer: init(),
        name: `dec_b${b}_conv`,
      })
      .apply(d) as tf.SymbolicTensor;
    d = tf.layers.add({ name: `dec_b${b}_skip` }).apply([d, skips[b]]) as tf.SymbolicTensor;
  }
  const segOut = tf.layers
    .conv2d({
      filters: 1,
      kernelSize: 1,
      activation: 'sigmoid',
      kernelInitializer: init(),
      biasInitializer: tf.initializers.constant({ value: config.scoreBias ?? 0 }),
      name: 'dec_score_map',
    })
    .apply(d) as tf.SymbolicTensor;

  // classification path off the shared bottleneck
  let c = tf.layers
    .globalAveragePooling2d({ name: 'cls_pool' })
    .apply(bottleneck) as tf.SymbolicTensor;
  c = tf.layers
    .dense({
      units: config.classifierUnits ?? 64,
      activation: 'relu',
      kernelInitializer: init(),
      name: 'cls_dense_0',
    })
    .apply(c) as tf.SymbolicTensor;
  const clsOut = tf.layers
    .dense({
      units: 1,
      activation: 'sigmoid',
      kernelInitializer: init(),
      name: 'cls_dense_1',
    })
    .apply(c) as tf.SymbolicTensor;

  return tf.model({ inputs: input, outputs: [segOut, clsOut], name: 'ettnet' });
}

/** Copy weights into `model` from `source` wherever layer names and shapes match. */
export function warmStart(model: tf.LayersModel, source: tf.LayersModel): number {
  let copied = 0;
  for (const layer of model.layers) {
    let other: tf.layers.Layer;
    try {
      other = source.getLayer(layer.name);
    } catch {
      continue;
    }
    const mine = layer.getWeights();
    const theirs = other.getWeights();
    if (
      mine.length === theirs.length &&
      mine.every((w, i) => w.shape.join() === theirs[i].shape.join())
    ) {
      layer.setWeights(theirs);
      copied++;
    }
  }
  return copied;
}

/** Forward pass; `training` switches layer behavior, outputs are [seg, cls]. */
export function forward(
  model: tf.LayersModel,
  xs: tf.Tensor4D,
  training: boolean,
): [tf.Tensor4D, tf.Tensor2D] {
  const out = model.apply(xs, { training }) as tf.Tensor[];
  return [out[0] as tf.Tensor4D, out[1] as tf.Tensor2D];
}
