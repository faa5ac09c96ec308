/**
 * Display formatting. Every probability on screen is the API value scaled
 * to percent at one decimal; no other transformation happens client-side.
 */

export function formatPercent(p: number): string {
  return (100 * p).toFixed(1) + "%";
}

export function formatLogProb(x: number): string {
  return x.toFixed(4);
}

export function formatSigned(x: number): string {
  const s = x.toFixed(4);
  return x >= 0 ? "+" + s : s;
}

export function formatMeasure(x: number): string {
  return x.toFixed(4);
}
