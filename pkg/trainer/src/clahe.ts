/**
 * Contrast-limited adaptive histogram equalization for 8-bit grayscale.
 *
 * The image is divided into a tile grid; each tile gets a clipped,
 * redistributed histogram and its equalization lookup table; pixels are
 * mapped by bilinear interpolation between the four surrounding tile
 * tables (clamped at the borders).
 */

export interface ClaheOptions {
  tiles?: number; // tiles per side
  clipLimit?: number; // multiple of the uniform bin height
}

export function clahe(
  data: Uint8Array | Uint8ClampedArray,
  width: number,
  height: number,
  options: ClaheOptions = {},
): Uint8Array {
  const tiles = options.tiles ?? 8;
  const clipLimit = options.clipLimit ?? 2.0;
  if (data.length !== width * height) {
    throw new Error(`data length ${data.length} != ${width}x${height}`);
  }

  const xBounds = tileBounds(width, tiles);
  const yBounds = tileBounds(height, tiles);

  // one 256-entry lookup table per tile
  const luts = new Float64Array(tiles * tiles * 256);
  for (let ty = 0; ty < tiles; ty++) {
    for (let tx = 0; tx < tiles; tx++) {
      const hist = new Float64Array(256);
      const [x0, x1] = [xBounds[tx], xBounds[tx + 1]];
      const [y0, y1] = [yBounds[ty], yBounds[ty + 1]];
      const area = (x1 - x0) * (y1 - y0);
      for (let y = y0; y < y1; y++) {
        for (let x = x0; x < x1; x++) hist[data[y * width + x]]++;
      }
      clipAndRedistribute(hist, Math.max(1, (clipLimit * area) / 256));
      let cdf = 0;
      const base = (ty * tiles + tx) * 256;
      for (let v = 0; v < 256; v++) {
        cdf += hist[v];
        luts[base + v] = (cdf * 255) / area;
      }
    }
  }

  // tile centers used as interpolation anchors
  const cx = new Float64Array(tiles);
  const cy = new Float64Array(tiles);
  for (let t = 0; t < tiles; t++) {
    cx[t] = (xBounds[t] + xBounds[t + 1] - 1) / 2;
    cy[t] = (yBounds[t] + yBounds[t + 1] - 1) / 2;
  }

  const out = new Uint8Array(width * height);
  for (let y = 0; y < height; y++) {
    const [ty0, ty1, wy] = interpCoords(y, cy);
    for (let x = 0; x < width; x++) {
      const [tx0, tx1, wx] = interpCoords(x, cx);
      const v = data[y * width + x];
      const v00 = luts[(ty0 * tiles + tx0) * 256 + v];
      const v01 = luts[(ty0 * tiles + tx1) * 256 + v];
      const v10 = luts[(ty1 * tiles + tx0) * 256 + v];
      const v11 = luts[(ty1 * tiles + tx1) * 256 + v];
      const top = v00 * (1 - wx) + v01 * wx;
      const bottom = v10 * (1 - wx) + v11 * wx;
      out[y * width + x] = Math.max(0, Math.min(255, Math.round(top * (1 - wy) + bottom * wy)));
    }
  }
  return out;
}

function tileBounds(extent: number, tiles: number): number[] {
  const bounds = [0];
  for (let t = 1; t <= tiles; t++) bounds.push(Math.round((extent * t) / tiles));
  return bounds;
}

function clipAndRedistribute(hist: Float64Array, limit: number): void {
  let excess = 0;
  for (let v = 0; v < 256; v++) {
    if (hist[v] > limit) {
      excess += hist[v] - limit;
      hist[v] = limit;
    }
  }
  const share = excess / 256;
  for (let v = 0; v < 256; v++) hist[v] += share;
}

function interpCoords(pos: number, centers: Float64Array): [number, number, number] {
  const tiles = centers.length;
  if (pos <= centers[0]) return [0, 0, 0];
  if (pos >= centers[tiles - 1]) return [tiles - 1, tiles - 1, 0];
  let hi = 1;
  while (centers[hi] < pos) hi++;
  const lo = hi - 1;
  const w = (pos - centers[lo]) / (centers[hi] - centers[lo]);
  return [lo, hi, w];
}
