export {
  SchemaError,
  SIMULATE_COLUMNS,
  LINEAR_DECAY_COLUMNS,
  PICARD_COLUMNS,
  parseCsv,
  parseDecaySummary,
} from "./schema.js";
export type { CsvRow, DecaySummary } from "./schema.js";
export { renderDecayPanel, renderEnergyPanel, renderPicardPanel } from "./panels.js";
export { parsePlotSpec, renderPanel, runPlotSpec } from "./plotspec.js";
export type { PanelKind, PanelSpec, PlotSpec } from "./plotspec.js";
