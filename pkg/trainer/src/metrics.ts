/** ROC construction, trapezoidal AUC, and the Youden operating point. */

export interface RocPoint {
  fpr: number;
  tpr: number;
  threshold: number;
}

export interface EvalReport {
  auc: number;
  sensitivity: number;
  specificity: number;
  roc_points: RocPoint[];
  counts: { pos: number; neg: number };
}

/**
 * ROC curve over all score thresholds, ties grouped, starting at
 * (0, 0, +inf) and ending at (1, 1, min score).
 */
export function rocCurve(scores: number[], labels: number[]): RocPoint[] {
  if (scores.length !== labels.length) {
    throw new Error(`scores/labels length mismatch: ${scores.length} vs ${labels.length}`);
  }
  const pos = labels.filter((l) => l === 1).length;
  const neg = labels.length - pos;
  if (pos === 0 || neg === 0) {
    throw new Error(`need both classes, got ${pos} positives / ${neg} negatives`);
  }

  const order = scores.map((_, i) => i).sort((a, b) => scores[b] - scores[a]);
  const points: RocPoint[] = [{ fpr: 0, tpr: 0, threshold: Infinity }];
  let tp = 0;
  let fp = 0;
  for (let k = 0; k < order.length; k++) {
    const i = order[k];
    if (labels[i] === 1) tp++;
    else fp++;
    const isLastOfTieGroup =
      k === order.length - 1 || scores[order[k + 1]] !== scores[i];
    if (isLastOfTieGroup) {
      points.push({ fpr: fp / neg, tpr: tp / pos, threshold: scores[i] });
    }
  }
  return points;
}

/** Area under the ROC by trapezoidal integration. */
export function aucTrapezoid(points: RocPoint[]): number {
  let area = 0;
  for (let i = 1; i < points.length; i++) {
    area += ((points[i].fpr - points[i - 1].fpr) * (points[i].tpr + points[i - 1].tpr)) / 2;
  }
  return area;
}

export function auc(scores: number[], labels: number[]): number {
  return aucTrapezoid(rocCurve(scores, labels));
}

/** Sensitivity/specificity at the threshold maximizing Youden's J = tpr - fpr. */
export function youdenOperatingPoint(points: RocPoint[]): {
  sensitivity: number;
  specificity: number;
  threshold: number;
} {
  let best = points[0];
  for (const p of points) {
    if (p.tpr - p.fpr > best.tpr - best.fpr) best = p;
  }
  return { sensitivity: best.tpr, specificity: 1 - best.fpr, threshold: best.threshold };
}

export function buildReport(scores: number[], labels: number[]): EvalReport {
  const points = rocCurve(scores, labels);
  const operating = youdenOperatingPoint(points);
  return {
    auc: aucTrapezoid(points),
    sensitivity: operating.sensitivity,
    specificity: operating.specificity,
    roc_points: points,
    counts: {
      pos: labels.filter((l) => l === 1).length,
      neg: labels.filter((l) => l === 0).length,
    },
  };
}

export function rocCsv(points: RocPoint[]): string {
  const rows = points.map((p) => `${p.fpr},${p.tpr},${p.threshold}`);
  return ['fpr,tpr,threshold', ...rows].join('\n') + '\n';
}
