/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_explorer_free: (a: number, b: number) => void;
export const explorer_cells: (a: number) => number;
export const explorer_code: (a: number, b: number, c: number, d: number) => [number, number];
export const explorer_lambda_u: (a: number) => number;
export const explorer_new: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const explorer_polygons: (a: number) => [number, number];
export const explorer_shadow: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
export const explorer_transitions: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
