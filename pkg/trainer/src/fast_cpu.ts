/**
 * Optimized replacements for the stock CPU convolution kernels.
 *
 * The pure-JS backend's Conv2DBackpropFilter (and, to a lesser degree,
 * Conv2D / Conv2DBackpropInput) use per-element index arithmetic that makes
 * CPU training of even tiny models take minutes per step. These
 * re-registrations use flat typed-array loops with contiguous inner channel
 * dims and make small-model training practical.
 *
 * Scope: float32, NHWC, dilation 1. Anything else raises.
 */

import * as tf from '@tensorflow/tfjs';
import { MathBackendCPU } from '@tensorflow/tfjs-backend-cpu';

type ConvInfo = ReturnType<typeof tf.backend_util.computeConv2DInfo>;

function checkSupported(convInfo: ConvInfo): void {
  if (convInfo.dataFormat !== 'channelsLast') {
    throw new Error('fast cpu conv kernels support NHWC only');
  }
  if (convInfo.dilationHeight !== 1 || convInfo.dilationWidth !== 1) {
    throw new Error('fast cpu conv kernels support dilation 1 only');
  }
}

function read(backend: MathBackendCPU, t: tf.TensorInfo): Float32Array {
  return backend.data.get(t.dataId).values as Float32Array;
}

function conv2dImpl(x: Float32Array, filter: Float32Array, convInfo: ConvInfo): Float32Array {
  const { batchSize: b, inHeight, inWidth, inChannels: ci, outHeight, outWidth, outChannels: co } = convInfo;
  const { filterHeight: kh, filterWidth: kw, strideHeight: sh, strideWidth: sw } = convInfo;
  const padTop = convInfo.padInfo.top;
  const padLeft = convInfo.padInfo.left;
  const out = new Float32Array(b * outHeight * outWidth * co);

  for (let n = 0; n < b; n++) {
    const xBatch = n * inHeight * inWidth * ci;
    const oBatch = n * outHeight * outWidth * co;
    for (let oy = 0; oy < outHeight; oy++) {
      const oRow = oBatch + oy * outWidth * co;
      for (let dy = 0; dy < kh; dy++) {
        const iy = oy * sh + dy - padTop;
        if (iy < 0 || iy >= inHeight) continue;
        const xRow = xBatch + iy * inWidth * ci;
        const fRow = dy * kw * ci * co;
        for (let ox = 0; ox < outWidth; ox++) {
          const oOff = oRow + ox * co;
          for (let dx = 0; dx < kw; dx++) {
            const ix = ox * sw + dx - padLeft;
            if (ix < 0 || ix >= inWidth) continue;
            const xOff = xRow + ix * ci;
            const fCol = fRow + dx * ci * co;
            for (let c = 0; c < ci; c++) {
              const xv = x[xOff + c];
              if (xv === 0) continue;
              const fOff = fCol + c * co;
              for (let k = 0; k < co; k++) out[oOff + k] += xv * filter[fOff + k];
            }
          }
        }
      }
    }
  }
  return out;
}

function conv2dBackpropInputImpl(dy: Float32Array, filter: Float32Array, convInfo: ConvInfo): Float32Array {
  const { batchSize: b, inHeight, inWidth, inChannels: ci, outHeight, outWidth, outChannels: co } = convInfo;
  const { filterHeight: kh, filterWidth: kw, strideHeight: sh, strideWidth: sw } = convInfo;
  const padTop = convInfo.padInfo.top;
  const padLeft = convInfo.padInfo.left;
  const dx = new Float32Array(b * inHeight * inWidth * ci);

  for (let n = 0; n < b; n++) {
    const xBatch = n * inHeight * inWidth * ci;
    const oBatch = n * outHeight * outWidth * co;
    for (let oy = 0; oy < outHeight; oy++) {
      const oRow = oBatch + oy * outWidth * co;
      for (let fy = 0; fy < kh; fy++) {
        const iy = oy * sh + fy - padTop;
        if (iy < 0 || iy >= inHeight) continue;
        const xRow = xBatch + iy * inWidth * ci;
        const fRow = fy * kw * ci * co;
        for (let ox = 0; ox < outWidth; ox++) {
          const oOff = oRow + ox * co;
          for (let fx = 0; fx < kw; fx++) {
            const ix = ox * sw + fx - padLeft;
            if (ix < 0 || ix >= inWidth) continue;
            const xOff = xRow + ix * ci;
            const fCol = fRow + fx * ci * co;
            for (let c = 0; c < ci; c++) {
              let sum = 0;
              const fOff = fCol + c * co;
              for (let k = 0; k < co; k++) sum += dy[oOff + k] * filter[fOff + k];
              dx[xOff + c] += sum;
            }
          }
        }
      }
    }
  }
  return dx;
}

function conv2dBackpropFilterImpl(x: Float32Array, dy: Float32Array, convInfo: ConvInfo): Float32Array {
  const { batchSize: b, inHeight, inWidth, inChannels: ci, outHeight, outWidth, outChannels: co } = convInfo;
  const { filterHeight: kh, filterWidth: kw, strideHeight: sh, strideWidth: sw } = convInfo;
  const padTop = convInfo.padInfo.top;
  const padLeft = convInfo.padInfo.left;
  const df = new Float32Array(kh * kw * ci * co);

  for (let n = 0; n < b; n++) {
    const xBatch = n * inHeight * inWidth * ci;
    const oBatch = n * outHeight * outWidth * co;
    for (let oy = 0; oy < outHeight; oy++) {
      const oRow = oBatch + oy * outWidth * co;
      for (let fy = 0; fy < kh; fy++) {
        const iy = oy * sh + fy - padTop;
        if (iy < 0 || iy >= inHeight) continue;
        const xRow = xBatch + iy * inWidth * ci;
        const fRowBase = fy * kw * ci * co;
        for (let ox = 0; ox < outWidth; ox++) {
          const oOff = oRow + ox * co;
          for (let fx = 0; fx < kw; fx++) {
            const ix = ox * sw + fx - padLeft;
            if (ix < 0 || ix >= inWidth) continue;
            const xOff = xRow + ix * ci;
            const fCol = fRowBase + fx * ci * co;
            for (let c = 0; c < ci; c++) {
              const xv = x[xOff + c];
              if (xv === 0) continue;
              const fOff = fCol + c * co;
              for (let k = 0; k < co; k++) df[fOff + k] += xv * dy[oOff + k];
            }
          }
        }
      }
    }
  }
  return df;
}

let installed = false;

/** Swap in the optimized conv kernels on the cpu backend (idempotent). */
export function installFastCpuKernels(): void {
  if (installed) return;
  installed = true;

  const register = (config: tf.KernelConfig) => {
    if (tf.getKernel(config.kernelName, 'cpu') != null) {
      tf.unregisterKernel(config.kernelName, 'cpu');
    }
    tf.registerKernel(config);
  };

  register({
    kernelName: 'Conv2D',
    backendName: 'cpu',
    kernelFunc: ({ inputs, attrs, backend }) => {
      const { x, filter } = inputs as { x: tf.TensorInfo; filter: tf.TensorInfo };
      const { strides, pad, dataFormat, dilations, dimRoundingMode } = attrs as unknown as {
        strides: number | [number, number];
        pad: 'same' | 'valid' | number;
        dataFormat: 'NHWC' | 'NCHW';
        dilations: number | [number, number];
        dimRoundingMode?: 'floor' | 'round' | 'ceil';
      };
      const cpu = backend as MathBackendCPU;
      const convInfo = tf.backend_util.computeConv2DInfo(
        x.shape as [number, number, number, number],
        filter.shape as [number, number, number, number],
        strides,
        dilations,
        pad,
        dimRoundingMode,
        false,
        tf.backend_util.convertConv2DDataFormat(dataFormat),
      );
      checkSupported(convInfo);
      const values = conv2dImpl(read(cpu, x), read(cpu, filter), convInfo);
      return cpu.makeTensorInfo(convInfo.outShape, 'float32', values);
    },
  });

  register({
    kernelName: 'Conv2DBackpropInput',
    backendName: 'cpu',
    kernelFunc: ({ inputs, attrs, backend }) => {
      const { dy, filter } = inputs as { dy: tf.TensorInfo; filter: tf.TensorInfo };
      const { inputShape, strides, pad, dataFormat, dimRoundingMode } = attrs as unknown as {
        inputShape: [number, number, number, number];
        strides: number | [number, number];
        pad: 'same' | 'valid' | number;
        dataFormat: 'NHWC' | 'NCHW';
        dimRoundingMode?: 'floor' | 'round' | 'ceil';
      };
      const cpu = backend as MathBackendCPU;
      const convInfo = tf.backend_util.computeConv2DInfo(
        inputShape,
        filter.shape as [number, number, number, number],
        strides,
        1,
        pad,
        dimRoundingMode,
        false,
        tf.backend_util.convertConv2DDataFormat(dataFormat),
      );
      checkSupported(convInfo);
      const values = conv2dBackpropInputImpl(read(cpu, dy), read(cpu, filter), convInfo);
      return cpu.makeTensorInfo(convInfo.inShape, 'float32', values);
    },
  });

  register({
    kernelName: 'Conv2DBackpropFilter',
    backendName: 'cpu',
    kernelFunc: ({ inputs, attrs, backend }) => {
      const { x, dy } = inputs as { x: tf.TensorInfo; dy: tf.TensorInfo };
      const { filterShape, strides, pad, dataFormat, dimRoundingMode } = attrs as unknown as {
        filterShape: [number, number, number, number];
        strides: number | [number, number];
        pad: 'same' | 'valid' | number;
        dataFormat: 'NHWC' | 'NCHW';
        dimRoundingMode?: 'floor' | 'round' | 'ceil';
      };
      const cpu = backend as MathBackendCPU;
      const convInfo = tf.backend_util.computeConv2DInfo(
        x.shape as [number, number, number, number],
        filterShape,
        strides,
        1,
        pad,
        dimRoundingMode,
        false,
        tf.backend_util.convertConv2DDataFormat(dataFormat),
      );
      checkSupported(convInfo);
      const values = conv2dBackpropFilterImpl(read(cpu, x), read(cpu, dy), convInfo);
      return cpu.makeTensorInfo(convInfo.filterShape, 'float32', values);
    },
  });
}
