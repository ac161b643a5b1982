import { Band } from './stats.js';

export interface ChartOptions {
  title: string;
  xLabel: string;
  yLabel: string;
  width?: number;
  height?: number;
  yMin?: number;
  yMax?: number;
}

const MARGIN = { top: 36, right: 16, bottom: 42, left: 54 };

function fmt(v: number): string {
  // fixed notation keeps the SVG diffable across runs
  return Number.isFinite(v) ? v.toFixed(2) : '0';
}

/** One curve with a +/- one-std band around its mean. */
export interface BandSeries {
  label: string;
  x: number[];
  band: Band;
  color: string;
}

/** Render mean +/- std curves as a standalone SVG string. */
export function bandChartSvg(series: BandSeries[], opts: ChartOptions): string {
  const width = opts.width ?? 640;
  const height = opts.height ?? 400;
  const plotW = width - MARGIN.left - MARGIN.right;
  const plotH = height - MARGIN.top - MARGIN.bottom;

  const xs = series.flatMap((s) => s.x);
  const ys = series.flatMap((s) =>
    s.band.mean.flatMap((m, i) => [m - s.band.std[i], m + s.band.std[i]]),
  );
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs, xMin + 1);
  const yMin = opts.yMin ?? Math.min(...ys);
  const yMax = opts.yMax ?? Math.max(...ys, yMin + 1e-9);

  const px = (x: number) => MARGIN.left + ((x - xMin) / (xMax - xMin)) * plotW;
  const py = (y: number) =>
    MARGIN.top + (1 - (y - yMin) / (yMax - yMin)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
    `<text x="${width / 2}" y="20" text-anchor="middle" font-size="14">${opts.title}</text>`,
    `<text x="${width / 2}" y="${height - 8}" text-anchor="middle" font-size="12">${opts.xLabel}</text>`,
    `<text x="14" y="${height / 2}" text-anchor="middle" font-size="12" transform="rotate(-90 14 ${height / 2})">${opts.yLabel}</text>`,
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" fill="none" stroke="black"/>`,
  );

  // axis ticks: four per axis is enough for a trend plot
  for (let i = 0; i <= 4; i++) {
    const xv = xMin + ((xMax - xMin) * i) / 4;
    const yv = yMin + ((yMax - yMin) * i) / 4;
    parts.push(
      `<text x="${fmt(px(xv))}" y="${height - MARGIN.bottom + 16}" text-anchor="middle" font-size="10">${xv.toPrecision(3)}</text>`,
      `<text x="${MARGIN.left - 6}" y="${fmt(py(yv) + 3)}" text-anchor="end" font-size="10">${yv.toPrecision(3)}</text>`,
    );
  }

  series.forEach((s, idx) => {
    const upper = s.x.map((x, i) => `${fmt(px(x))},${fmt(py(s.band.mean[i] + s.band.std[i]))}`);
    const lower = s.x
      .map((x, i) => `${fmt(px(x))},${fmt(py(s.band.mean[i] - s.band.std[i]))}`)
      .reverse();
    parts.push(
      `<polygon points="${[...upper, ...lower].join(' ')}" fill="${s.color}" opacity="0.2"/>`,
    );
    const mean = s.x.map((x, i) => `${fmt(px(x))},${fmt(py(s.band.mean[i]))}`);
    parts.push(
      `<polyline points="${mean.join(' ')}" fill="none" stroke="${s.color}" stroke-width="1.5"/>`,
    );
    const ly = MARGIN.top + 14 + idx * 14;
    parts.push(
      `<line x1="${width - MARGIN.right - 120}" y1="${ly}" x2="${width - MARGIN.right - 100}" y2="${ly}" stroke="${s.color}" stroke-width="1.5"/>`,
      `<text x="${width - MARGIN.right - 94}" y="${ly + 4}" font-size="11">${s.label}</text>`,
    );
  });

  parts.push('</svg>');
  return parts.join('\n');
}
