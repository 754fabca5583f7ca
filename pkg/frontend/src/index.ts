export { readColumnTable, readMatrixTable, column, DataFileError } from "./csv.js";
export { loadFigureSpec, checkHashes, figureSpecSchema, FigureSpec,
         SpecError, HashMismatchError } from "./figspec.js";
export { lintPlotted, LintError } from "./lint.js";
export { renderFigure } from "./render.js";
export { renderSpectrum } from "./panels/spectrum.js";
export { renderDispersion } from "./panels/dispersion.js";
export { renderHeatmap } from "./panels/heatmap.js";
export { renderNegativityTrace } from "./panels/negativity.js";
