import { SweepRow } from './csv.js';

export interface Pivot {
  budgets: number[]; // sorted ascending, one row each
  strategies: string[]; // column order of first appearance
  /** cells[i][j]: mean coverage over seeds for (budgets[i], strategies[j]),
   *  or null when that cell was never run. */
  cells: (number | null)[][];
  /** per-column row index of the maximum (ties -> smallest budget), or -1
   *  for an all-missing column */
  maxRow: number[];
  missing: string[]; // human-readable list of absent cells
}

/** Pivot long-form sweep rows into a budget x strategy table of seed means. */
export function pivotSweep(rows: SweepRow[]): Pivot {
  const strategies: string[] = [];
  const budgets: number[] = [];
  const acc = new Map<string, number[]>();
  for (const r of rows) {
    if (!strategies.includes(r.strategy)) strategies.push(r.strategy);
    if (!budgets.includes(r.budget)) budgets.push(r.budget);
    const key = `${r.budget}|${r.strategy}`;
    const list = acc.get(key) ?? [];
    list.push(r.coverage);
    acc.set(key, list);
  }
  budgets.sort((a, b) => a - b);
  const cells: (number | null)[][] = [];
  const missing: string[] = [];
  for (const b of budgets) {
    const row: (number | null)[] = [];
    for (const s of strategies) {
      const vals = acc.get(`${b}|${s}`);
      if (vals === undefined) {
        row.push(null);
        missing.push(`${s} at N=${b}`);
      } else {
        row.push(vals.reduce((x, y) => x + y, 0) / vals.length);
      }
    }
    cells.push(row);
  }
  const maxRow = strategies.map((_, j) => {
    let best = -1;
    for (let i = 0; i < budgets.length; i++) {
      const v = cells[i][j];
      if (v !== null && (best === -1 || v > (cells[best][j] as number))) best = i;
    }
    return best;
  });
  return { budgets, strategies, cells, maxRow, missing };
}

/** Plain-text table; the best value in each strategy column is starred. */
export function renderTable(p: Pivot, digits = 3): string {
  const header = ['N', ...p.strategies];
  const body = p.budgets.map((b, i) => [
    String(b),
    ...p.strategies.map((_, j) => {
      const v = p.cells[i][j];
      if (v === null) return '-';
      const text = v.toFixed(digits);
      return p.maxRow[j] === i ? `*${text}*` : ` ${text} `;
    }),
  ]);
  const widths = header.map((h, c) =>
    Math.max(h.length, ...body.map((row) => row[c].length)),
  );
  const line = (row: string[]) =>
    row.map((cell, c) => cell.padStart(widths[c])).join('  ');
  const out = [line(header), ...body.map(line)];
  for (const m of p.missing) out.push(`missing: ${m}`);
  return out.join('\n');
}
