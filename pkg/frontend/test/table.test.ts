import { describe, expect, it } from 'vitest';
import { pivotSweep, renderTable } from '../src/table.js';
import { SweepRow } from '../src/csv.js';

const row = (strategy: string, budget: number, seed: number, coverage: number): SweepRow => ({
  strategy,
  budget,
  seed,
  coverage,
});

describe('pivotSweep', () => {
  it('reproduces a hand-built 2-strategy x 3-budget fixture exactly', () => {
    const rows = [
      row('etgreedy', 5, 0, 0.7), row('etgreedy', 5, 1, 0.8),
      row('etgreedy', 20, 0, 0.9), row('etgreedy', 20, 1, 1.0),
      row('etgreedy', 40, 0, 1.0), row('etgreedy', 40, 1, 1.0),
      row('ezgreedy', 5, 0, 0.3), row('ezgreedy', 5, 1, 0.5),
      row('ezgreedy', 20, 0, 0.4), row('ezgreedy', 20, 1, 0.4),
      row('ezgreedy', 40, 0, 0.5), row('ezgreedy', 40, 1, 0.3),
    ];
    const p = pivotSweep(rows);
    expect(p.budgets).toEqual([5, 20, 40]);
    expect(p.strategies).toEqual(['etgreedy', 'ezgreedy']);
    expect(p.cells).toEqual([
      [0.75, 0.4],
      [0.95, 0.4],
      [1.0, 0.4],
    ]);
    expect(p.missing).toEqual([]);
  });

  it('per-column maxima match a direct scan', () => {
    const rows: SweepRow[] = [];
    let v = 0.13;
    for (const s of ['a', 'b', 'c']) {
      for (const b of [5, 10, 15, 20]) {
        v = (v * 7919) % 1;
        rows.push(row(s, b, 0, v));
      }
    }
    const p = pivotSweep(rows);
    p.strategies.forEach((_, j) => {
      let best = 0;
      for (let i = 1; i < p.budgets.length; i++) {
        if ((p.cells[i][j] as number) > (p.cells[best][j] as number)) best = i;
      }
      expect(p.maxRow[j]).toBe(best);
    });
  });

  it('one cell in, one cell out', () => {
    const p = pivotSweep([row('etgreedy', 5, 0, 0.5)]);
    expect(p.budgets).toEqual([5]);
    expect(p.cells).toEqual([[0.5]]);
    expect(p.maxRow).toEqual([0]);
  });

  it('reports missing cells instead of fabricating them', () => {
    const p = pivotSweep([
      row('etgreedy', 5, 0, 0.5),
      row('ezgreedy', 10, 0, 0.4),
    ]);
    expect(p.cells[0][1]).toBeNull();
    expect(p.cells[1][0]).toBeNull();
    expect(p.missing).toContain('ezgreedy at N=5');
    expect(p.missing).toContain('etgreedy at N=10');
  });
});

describe('renderTable', () => {
  it('stars exactly one cell per complete column', () => {
    const text = renderTable(
      pivotSweep([
        row('etgreedy', 5, 0, 0.7),
        row('etgreedy', 20, 0, 0.9),
        row('ezgreedy', 5, 0, 0.4),
        row('ezgreedy', 20, 0, 0.3),
      ]),
    );
    expect((text.match(/\*0\.900\*/g) ?? []).length).toBe(1);
    expect((text.match(/\*0\.400\*/g) ?? []).length).toBe(1);
    expect((text.match(/\*/g) ?? []).length).toBe(4); // two starred cells
  });
});
