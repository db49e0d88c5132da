import * as fs from 'node:fs';
import * as os from 'node:os';
import * as path from 'node:path';
import { fileURLToPath } from 'node:url';
import { describe, expect, it } from 'vitest';

import { main } from '../src/cli.js';

const HERE = path.dirname(fileURLToPath(import.meta.url));
const FIXTURES = path.join(HERE, '..', 'fixtures', 'out');
const MANIFEST = path.join(FIXTURES, 'manifest.jsonl');

describe('cli', () => {
  it('rejects unknown commands', async () => {
    expect(await main(['frobnicate'])).toBe(1);
  });

  it('trains, evaluates, and mines end to end on the fixture', async () => {
    const work = fs.mkdtempSync(path.join(os.tmpdir(), 'ettnet-cli-'));
    const runDir = path.join(work, 'run');

    const trainCode = await main([
      'train',
      '--manifest', MANIFEST,
      '--data-root', FIXTURES,
      '--out', runDir,
      '--input-size', '64',
      '--widths', '8,16,32',
      '--convs-per-block', '1,1,1',
      '--epochs', '2',
      '--batch-size', '10',
      '--seed', '4',
      '--val-fraction', '0.2',
      '--checkpoint-every', '0',
    ]);
    expect(trainCode).toBe(0);
    expect(fs.existsSync(path.join(runDir, 'final', 'model.json'))).toBe(true);
    const csv = fs.readFileSync(path.join(runDir, 'metrics.csv'), 'utf-8').trim().split('\n');
    expect(csv[0]).toBe('epoch,loss,bce,dice,auc');
    expect(csv.length).toBe(3);

    const reportDir = path.join(work, 'report');
    const evalCode = await main([
      'evaluate',
      '--checkpoint', path.join(runDir, 'final'),
      '--manifest', MANIFEST,
      '--data-root', FIXTURES,
      '--input-size', '64',
      '--out', reportDir,
    ]);
    expect(evalCode).toBe(0);
    const report = JSON.parse(fs.readFileSync(path.join(reportDir, 'report.json'), 'utf-8'));
    expect(report.auc).toBeGreaterThanOrEqual(0);
    expect(report.auc).toBeLessThanOrEqual(1);
    expect(report.counts).toEqual({ pos: 10, neg: 10 });
    expect(fs.readFileSync(path.join(reportDir, 'roc.csv'), 'utf-8')).toMatch(/^fpr,tpr,threshold\n/);

    const minedDir = path.join(work, 'mined');
    const mineCode = await main([
      'mine',
      '--checkpoint', path.join(runDir, 'final'),
      '--manifest', MANIFEST,
      '--data-root', FIXTURES,
      '--input-size', '64',
      '--out', minedDir,
    ]);
    expect(mineCode).toBe(0);
    expect(fs.existsSync(path.join(minedDir, 'positives.jsonl'))).toBe(true);
    expect(fs.existsSync(path.join(minedDir, 'negatives.jsonl'))).toBe(true);
  }, 600_000);

  it('fails cleanly on a missing manifest', async () => {
    expect(
      await main(['train', '--manifest', '/nope/missing.jsonl', '--data-root', '/nope', '--out', '/tmp/x']),
    ).toBe(1);
  });
});
