/** Energy-landscape grid to drawable cells, low energy rendered hot. */

import type { LandscapeFrame } from "./protocol.js";

export interface HeatmapCell {
  row: number;
  col: number;
  /** 0 = highest energy, 1 = lowest energy (the interesting end). */
  intensity: number;
  isMinimum: boolean;
}

export function heatmapCells(frame: LandscapeFrame): HeatmapCell[] {
  const values = frame.energies.flat();
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  const span = hi - lo || 1;
  let minRow = 0;
  let minCol = 0;
  let minVal = Infinity;
  frame.energies.forEach((row, i) =>
    row.forEach((v, j) => {
      if (v < minVal) {
        minVal = v;
        minRow = i;
        minCol = j;
      }
    }),
  );
  const cells: HeatmapCell[] = [];
  frame.energies.forEach((row, i) =>
    row.forEach((v, j) => {
      cells.push({
        row: i,
        col: j,
        intensity: 1 - (v - lo) / span,
        isMinimum: i === minRow && j === minCol,
      });
    }),
  );
  return cells;
}
