export { ApiError, ForgeClient } from "./api.js";
export { applyDelta, boardAt, diagram, type Diagram } from "./board.js";
export { RunExplorer, RUN_SCHEMA, type StageBadge } from "./explorer.js";
export { SessionConsole, type Refusal } from "./session.js";
export type * from "./types.js";
