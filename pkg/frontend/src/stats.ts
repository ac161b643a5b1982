/** Trailing moving average: out[i] = mean(xs[max(0, i-w+1) .. i]).
 *  Window 1 is the identity. */
export function movingAverage(xs: number[], window: number): number[] {
  if (window < 1 || !Number.isInteger(window)) {
    throw new Error(`window must be a positive integer, got ${window}`);
  }
  // direct summation per window: a running sum would drift and window 1
  // must be an exact identity
  const out: number[] = [];
  for (let i = 0; i < xs.length; i++) {
    const lo = Math.max(0, i - window + 1);
    let sum = 0;
    for (let j = lo; j <= i; j++) sum += xs[j];
    out.push(sum / (i - lo + 1));
  }
  return out;
}

export interface Band {
  mean: number[];
  std: number[]; // population standard deviation across series
}

/** Pointwise mean and std across equal-length series (one per seed). */
export function meanStd(series: number[][]): Band {
  if (series.length === 0) throw new Error('need at least one series');
  const n = series[0].length;
  for (const s of series) {
    if (s.length !== n) throw new Error('series lengths differ across seeds');
  }
  const mean: number[] = [];
  const std: number[] = [];
  for (let i = 0; i < n; i++) {
    let m = 0;
    for (const s of series) m += s[i];
    m /= series.length;
    let v = 0;
    for (const s of series) v += (s[i] - m) * (s[i] - m);
    mean.push(m);
    std.push(Math.sqrt(v / series.length));
  }
  return { mean, std };
}
