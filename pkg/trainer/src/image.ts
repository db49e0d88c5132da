/** Grayscale raster helpers: PNG I/O, bilinear resize, rotation, flips. */

import * as fs from 'node:fs';
import { PNG } from 'pngjs';

export interface GrayImage {
  width: number;
  height: number;
  data: Uint8Array; // row-major luminance
}

export function loadPngGray(path: string): GrayImage {
  const png = PNG.sync.read(fs.readFileSync(path));
  const out = new Uint8Array(png.width * png.height);
  for (let i = 0; i < out.length; i++) out[i] = png.data[i * 4];
  return { width: png.width, height: png.height, data: out };
}

export function savePngGray(path: string, image: GrayImage): void {
  const png = new PNG({ width: image.width, height: image.height });
  for (let i = 0; i < image.data.length; i++) {
    png.data[i * 4] = image.data[i];
    png.data[i * 4 + 1] = image.data[i];
    png.data[i * 4 + 2] = image.data[i];
    png.data[i * 4 + 3] = 255;
  }
  fs.writeFileSync(path, PNG.sync.write(png));
}

export function resizeBilinearU8(image: GrayImage, size: number): GrayImage {
  if (image.width === size && image.height === size) {
    return { width: size, height: size, data: image.data.slice() };
  }
  const out = new Uint8Array(size * size);
  const sx = image.width / size;
  const sy = image.height / size;
  for (let y = 0; y < size; y++) {
    const fy = Math.min(image.height - 1, Math.max(0, (y + 0.5) * sy - 0.5));
    const y0 = Math.floor(fy);
    const y1 = Math.min(y0 + 1, image.height - 1);
    const wy = fy - y0;
    for (let x = 0; x < size; x++) {
      const fx = Math.min(image.width - 1, Math.max(0, (x + 0.5) * sx - 0.5));
      const x0 = Math.floor(fx);
      const x1 = Math.min(x0 + 1, image.width - 1);
      const wx = fx - x0;
      const top = image.data[y0 * image.width + x0] * (1 - wx) + image.data[y0 * image.width + x1] * wx;
      const bot = image.data[y1 * image.width + x0] * (1 - wx) + image.data[y1 * image.width + x1] * wx;
      out[y * size + x] = Math.round(top * (1 - wy) + bot * wy);
    }
  }
  return { width: size, height: size, data: out };
}

export function flipHorizontal(data: Float32Array, width: number, height: number): Float32Array {
  const out = new Float32Array(data.length);
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      out[y * width + x] = data[y * width + (width - 1 - x)];
    }
  }
  return out;
}

/** Rotate about the image center; bilinear for continuous data. */
export function rotateBilinear(
  data: Float32Array,
  width: number,
  height: number,
  angleDeg: number,
  fill = 0,
): Float32Array {
  const out = new Float32Array(data.length);
  const rad = (angleDeg * Math.PI) / 180;
  const cos = Math.cos(rad);
  const sin = Math.sin(rad);
  const cx = (width - 1) / 2;
  const cy = (height - 1) / 2;
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const dx = x - cx;
      const dy = y - cy;
      const sxf = cx + dx * cos - dy * sin;
      const syf = cy + dx * sin + dy * cos;
      const x0 = Math.floor(sxf);
      const y0 = Math.floor(syf);
      const wx = sxf - x0;
      const wy = syf - y0;
      let acc = 0;
      for (const [oy, ox, w] of [
        [0, 0, (1 - wx) * (1 - wy)],
        [0, 1, wx * (1 - wy)],
        [1, 0, (1 - wx) * wy],
        [1, 1, wx * wy],
      ] as const) {
        const sx = x0 + ox;
        const sy = y0 + oy;
        const v = sx >= 0 && sx < width && sy >= 0 && sy < height ? data[sy * width + sx] : fill;
        acc += w * v;
      }
      out[y * width + x] = acc;
    }
  }
  return out;
}

/** Rotate with nearest-neighbor sampling; keeps binary masks binary. */
export function rotateNearest(
  data: Float32Array,
  width: number,
  height: number,
  angleDeg: number,
  fill = 0,
): Float32Array {
  const out = new Float32Array(data.length);
  const rad = (angleDeg * Math.PI) / 180;
  const cos = Math.cos(rad);
  const sin = Math.sin(rad);
  const cx = (width - 1) / 2;
  const cy = (height - 1) / 2;
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const dx = x - cx;
      const dy = y - cy;
      const sx = Math.round(cx + dx * cos - dy * sin);
      const sy = Math.round(cy + dx * sin + dy * cos);
      out[y * width + x] =
        sx >= 0 && sx < width && sy >= 0 && sy < height ? data[sy * width + sx] : fill;
    }
  }
  return out;
}
