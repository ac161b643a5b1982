import Papa from 'papaparse';
import { readFileSync } from 'fs';

// papaparse ships CommonJS; a named import breaks under real node ESM
const { parse } = Papa;

/** One checkpoint row of a training run's metrics CSV. */
export interface MetricsRow {
  step: number;
  episode: number;
  success_rate: number;
  coverage: number;
  epsilon: number;
  mean_episode_return: number;
  dbeta_size: number;
  de_size: number;
}

/** One cell of a budget-sweep runs CSV (long form, one row per run). */
export interface SweepRow {
  strategy: string;
  budget: number;
  seed: number;
  coverage: number;
}

/** Strip `#`-prefixed header/comment lines before handing text to the parser. */
export function stripComments(text: string): string {
  return text
    .split('\n')
    .filter((line) => !line.startsWith('#'))
    .join('\n');
}

export function parseMetrics(text: string): MetricsRow[] {
  const parsed = parse<MetricsRow>(stripComments(text), {
    header: true,
    dynamicTyping: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    throw new Error(`bad metrics CSV: ${parsed.errors[0].message}`);
  }
  const rows = parsed.data;
  for (let i = 1; i < rows.length; i++) {
    if (!(rows[i].step > rows[i - 1].step)) {
      throw new Error(`metrics rows not strictly increasing in step at row ${i}`);
    }
  }
  return rows;
}

export function readMetrics(path: string): MetricsRow[] {
  return parseMetrics(readFileSync(path, 'utf8'));
}

export function parseSweep(text: string): SweepRow[] {
  const parsed = parse<SweepRow>(stripComments(text), {
    header: true,
    dynamicTyping: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    throw new Error(`bad sweep CSV: ${parsed.errors[0].message}`);
  }
  return parsed.data;
}

export function readSweep(path: string): SweepRow[] {
  return parseSweep(readFileSync(path, 'utf8'));
}
