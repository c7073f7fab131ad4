/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_shapeview_free: (a: number, b: number) => void;
export const analyze_shape: (a: number, b: number) => [number, number, number];
export const shapeview_height: (a: number) => number;
export const shapeview_report: (a: number) => [number, number];
export const shapeview_rgba: (a: number) => [number, number];
export const shapeview_width: (a: number) => number;
export const simulate_lift: (a: number, b: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
