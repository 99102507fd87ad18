/* tslint:disable */
/* eslint-disable */

export class Explorer {
    free(): void;
    [Symbol.dispose](): void;
    cells(): number;
    /**
     * JSON with `kind` = "word", "boundary" or "error".
     */
    code(x: number, y: number, depth: number): string;
    lambda_u(): number;
    constructor(a: number, b: number, c: number, d: number, beta: number);
    polygons(): Float64Array;
    shadow(x: number, y: number, half_width: number, delta: number, seed: number): string;
    transitions(): number;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_explorer_free: (a: number, b: number) => void;
    readonly explorer_cells: (a: number) => number;
    readonly explorer_code: (a: number, b: number, c: number, d: number) => [number, number];
    readonly explorer_lambda_u: (a: number) => number;
    readonly explorer_new: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly explorer_polygons: (a: number) => [number, number];
    readonly explorer_shadow: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly explorer_transitions: (a: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
