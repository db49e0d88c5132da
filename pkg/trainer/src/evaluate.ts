/** Labeled-set evaluation: AUC, Youden-point sensitivity/specificity, ROC dump. */

import * as fs from 'node:fs';
import * as path from 'node:path';
import * as tf from '@tensorflow/tfjs';

import { TrainCase } from './data.js';
import { buildReport, EvalReport, rocCsv } from './metrics.js';
import { scoreCases } from './train.js';

export function evaluateModel(
  model: tf.LayersModel,
  cases: TrainCase[],
  batchSize = 16,
): EvalReport {
  const labels = cases.map((c) => c.label);
  if (!labels.includes(1) || !labels.includes(0)) {
    throw new Error('evaluation set must contain both classes');
  }
  const scores = scoreCases(model, cases, batchSize);
  return buildReport(scores, labels);
}

export function writeReport(dir: string, report: EvalReport): void {
  fs.mkdirSync(dir, { recursive: true });
  fs.writeFileSync(path.join(dir, 'report.json'), JSON.stringify(report, null, 2));
  fs.writeFileSync(path.join(dir, 'roc.csv'), rocCsv(report.roc_points));
}
