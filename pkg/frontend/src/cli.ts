#!/usr/bin/env node
/** Report tool for training metrics:
 *
 *    etgl-report curves --metric success_rate --window 10 --out curves.svg run1/metrics.csv run2/metrics.csv ...
 *    etgl-report table sweep/coverage_runs.csv
 *
 * `curves` treats each input CSV as one seed of the same configuration and
 * draws the across-seed mean with a +/- one-std band, smoothed with a
 * trailing moving average. `table` pivots a long-form sweep CSV into a
 * budget x strategy table with per-column maxima starred.
 */

import { writeFileSync } from 'fs';
import { readMetrics, readSweep, MetricsRow } from './csv.js';
import { movingAverage, meanStd } from './stats.js';
import { bandChartSvg } from './chart.js';
import { pivotSweep, renderTable } from './table.js';

const COLORS = ['#1f77b4', '#d62728', '#2ca02c', '#9467bd', '#ff7f0e'];

function fail(msg: string): never {
  console.error(`error: ${msg}`);
  process.exit(2);
}

interface Args {
  flags: Map<string, string>;
  positional: string[];
}

function parseArgs(argv: string[]): Args {
  const flags = new Map<string, string>();
  const positional: string[] = [];
  for (let i = 0; i < argv.length; i++) {
    if (argv[i].startsWith('--')) {
      const value = argv[i + 1];
      if (value === undefined) fail(`flag ${argv[i]} needs a value`);
      flags.set(argv[i].slice(2), value);
      i++;
    } else {
      positional.push(argv[i]);
    }
  }
  return { flags, positional };
}

function curves(args: Args): void {
  const metric = (args.flags.get('metric') ?? 'success_rate') as keyof MetricsRow;
  const window = Number(args.flags.get('window') ?? '10');
  const out = args.flags.get('out') ?? 'curves.svg';
  const label = args.flags.get('label') ?? String(metric);
  if (args.positional.length === 0) fail('need at least one metrics CSV');

  const runs = args.positional.map(readMetrics);
  const first = runs[0];
  if (!(metric in first[0])) fail(`unknown metric column ${String(metric)}`);
  const x = first.map((r) => r.step);
  for (const run of runs) {
    if (run.length !== first.length) {
      fail('runs have different numbers of checkpoints; same config per chart');
    }
  }
  const smoothed = runs.map((run) =>
    movingAverage(run.map((r) => Number(r[metric])), window),
  );
  const band = meanStd(smoothed);
  const svg = bandChartSvg(
    [{ label, x, band, color: COLORS[0] }],
    {
      title: `${label} (moving average ${window}, ${runs.length} seed${runs.length === 1 ? '' : 's'})`,
      xLabel: 'environment steps',
      yLabel: label,
    },
  );
  writeFileSync(out, svg);
  console.log(`wrote ${out}`);
}

function table(args: Args): void {
  if (args.positional.length !== 1) fail('need exactly one sweep runs CSV');
  const pivot = pivotSweep(readSweep(args.positional[0]));
  console.log(renderTable(pivot));
}

export function main(argv: string[]): void {
  const [command, ...rest] = argv;
  const args = parseArgs(rest);
  if (command === 'curves') curves(args);
  else if (command === 'table') table(args);
  else fail(`usage: etgl-report curves|table ... (got ${command ?? 'nothing'})`);
}

main(process.argv.slice(2));
