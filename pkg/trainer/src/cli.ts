/**
 * Command line driver.
 *
 *   node dist/cli.js train    --manifest m.jsonl --data-root d --out runs/phase1
 *   node dist/cli.js mine     --checkpoint runs/phase1/final --manifest all.jsonl --data-root d --out mined/
 *   node dist/cli.js finetune --checkpoint runs/phase1/final --mined mined/ --data-root d --out runs/phase2
 *   node dist/cli.js evaluate --checkpoint runs/phase2/final --manifest test.jsonl --data-root d --out report/
 */

import * as fs from 'node:fs';
import * as path from 'node:path';
import { parseArgs } from 'node:util';
import * as tf from '@tensorflow/tfjs';

import { loadCheckpoint, restoreOptimizer } from './checkpoint.js';
import { loadTrainCases, readManifest } from './data.js';
import { evaluateModel, writeReport } from './evaluate.js';
import { installFastCpuKernels } from './fast_cpu.js';
import { buildEttNet } from './model.js';
import { DEFAULT_RULE, fineTune, MinedCase, minePseudolabels } from './pseudolabel.js';
import { trainPhase } from './train.js';

interface CliOptions {
  [key: string]: string | boolean | undefined;
}

function str(opts: CliOptions, key: string, fallback?: string): string {
  const v = opts[key];
  if (typeof v === 'string') return v;
  if (fallback !== undefined) return fallback;
  throw new Error(`missing required option --${key}`);
}

function num(opts: CliOptions, key: string, fallback: number): number {
  const v = opts[key];
  return typeof v === 'string' ? Number(v) : fallback;
}

function intList(opts: CliOptions, key: string): number[] | undefined {
  const v = opts[key];
  return typeof v === 'string' ? v.split(',').map(Number) : undefined;
}

async function cmdTrain(opts: CliOptions): Promise<void> {
  const inputSize = num(opts, 'input-size', 224);
  const entries = readManifest(str(opts, 'manifest'));
  const cases = loadTrainCases(str(opts, 'data-root'), entries, { inputSize });
  const model = buildEttNet({
    inputSize,
    encoderWidths: intList(opts, 'widths'),
    convsPerBlock: intList(opts, 'convs-per-block'),
    seed: num(opts, 'seed', 0) + 1,
  });
  await trainPhase(model, cases, {
    epochs: num(opts, 'epochs', 50),
    batchSize: num(opts, 'batch-size', 8),
    lambda: num(opts, 'lambda', 0.1),
    seed: num(opts, 'seed', 0),
    valFraction: num(opts, 'val-fraction', 0.2),
    augment: opts['no-augment'] !== true,
    checkpointEvery: num(opts, 'checkpoint-every', 1),
    outDir: str(opts, 'out'),
    verbose: true,
  });
}

async function cmdMine(opts: CliOptions): Promise<void> {
  const inputSize = num(opts, 'input-size', 224);
  const { model } = await loadCheckpoint(str(opts, 'checkpoint'));
  const entries = readManifest(str(opts, 'manifest'));
  const cases = loadTrainCases(str(opts, 'data-root'), entries, { inputSize });
  const rule = {
    ...DEFAULT_RULE,
    posProbThreshold: num(opts, 'pos-threshold', DEFAULT_RULE.posProbThreshold),
    negProbThreshold: num(opts, 'neg-threshold', DEFAULT_RULE.negProbThreshold),
  };
  const { positives, negatives } = minePseudolabels(model, cases, rule);
  const outDir = str(opts, 'out');
  fs.mkdirSync(outDir, { recursive: true });
  const dump = (name: string, mined: MinedCase[]) =>
    fs.writeFileSync(
      path.join(outDir, name),
      mined.map((c) => JSON.stringify({ case_id: c.id, prob: c.prob })).join('\n') + '\n',
    );
  dump('positives.jsonl', positives);
  dump('negatives.jsonl', negatives);
  console.log(`mined ${positives.length} positives, ${negatives.length} negatives -> ${outDir}`);
}

async function cmdFinetune(opts: CliOptions): Promise<void> {
  const inputSize = num(opts, 'input-size', 224);
  const { model, optimizerWeights } = await loadCheckpoint(str(opts, 'checkpoint'));
  const entries = readManifest(str(opts, 'manifest'));
  const cases = loadTrainCases(str(opts, 'data-root'), entries, { inputSize });
  const { positives, negatives } = minePseudolabels(model, cases);
  const optimizer = tf.train.adam();
  if (opts['resume-optimizer'] === true && optimizerWeights) {
    await restoreOptimizer(optimizer, optimizerWeights);
  }
  await fineTune(model, positives, negatives, {
    epochs: num(opts, 'epochs', 50),
    batchSize: num(opts, 'batch-size', 8),
    lambda: num(opts, 'lambda', 0.1),
    seed: num(opts, 'seed', 0),
    valFraction: num(opts, 'val-fraction', 0.2),
    augment: opts['no-augment'] !== true,
    checkpointEvery: num(opts, 'checkpoint-every', 1),
    outDir: str(opts, 'out'),
    optimizer,
    verbose: true,
  });
}

async function cmdEvaluate(opts: CliOptions): Promise<void> {
  const inputSize = num(opts, 'input-size', 224);
  const { model } = await loadCheckpoint(str(opts, 'checkpoint'));
  const entries = readManifest(str(opts, 'manifest'));
  const cases = loadTrainCases(str(opts, 'data-root'), entries, { inputSize });
  const report = evaluateModel(model, cases);
  writeReport(str(opts, 'out'), report);
  console.log(
    `auc=${report.auc.toFixed(4)} sensitivity=${report.sensitivity.toFixed(4)} ` +
      `specificity=${report.specificity.toFixed(4)} (${report.counts.pos} pos / ${report.counts.neg} neg)`,
  );
}

const COMMANDS: Record<string, (opts: CliOptions) => Promise<void>> = {
  train: cmdTrain,
  mine: cmdMine,
  finetune: cmdFinetune,
  evaluate: cmdEvaluate,
};

export async function main(argv: string[]): Promise<number> {
  const [command, ...rest] = argv;
  const handler = command ? COMMANDS[command] : undefined;
  if (!handler) {
    console.error(`usage: cli.js <${Object.keys(COMMANDS).join('|')}> [options]`);
    return 1;
  }
  try {
    const { values } = parseArgs({
      args: rest,
      allowPositionals: false,
      strict: true,
      options: {
        'manifest': { type: 'string' },
        'data-root': { type: 'string' },
        'out': { type: 'string' },
        'checkpoint': { type: 'string' },
        'input-size': { type: 'string' },
        'epochs': { type: 'string' },
        'batch-size': { type: 'string' },
        'lambda': { type: 'string' },
        'seed': { type: 'string' },
        'val-fraction': { type: 'string' },
        'checkpoint-every': { type: 'string' },
        'pos-threshold': { type: 'string' },
        'neg-threshold': { type: 'string' },
        'widths': { type: 'string' },
        'convs-per-block': { type: 'string' },
        'no-augment': { type: 'boolean' },
        'resume-optimizer': { type: 'boolean' },
      },
    });
    await tf.setBackend('cpu');
    installFastCpuKernels();
    await handler(values as CliOptions);
    return 0;
  } catch (err) {
    console.error(err instanceof Error ? err.message : String(err));
    return 1;
  }
}

const isDirectRun = process.argv[1] && import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (isDirectRun) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
