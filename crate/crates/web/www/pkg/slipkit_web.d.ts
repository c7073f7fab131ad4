/* tslint:disable */
/* eslint-disable */

/**
 * One analyzed frame handed to JavaScript.
 */
export class ShapeView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    height(): number;
    /**
     * Estimates and overlay geometry as JSON.
     */
    report(): string;
    rgba(): Uint8Array;
    width(): number;
}

export function analyze_shape(params_json: string): ShapeView;

export function simulate_lift(params_json: string): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_shapeview_free: (a: number, b: number) => void;
    readonly analyze_shape: (a: number, b: number) => [number, number, number];
    readonly shapeview_height: (a: number) => number;
    readonly shapeview_report: (a: number) => [number, number];
    readonly shapeview_rgba: (a: number) => [number, number];
    readonly shapeview_width: (a: number) => number;
    readonly simulate_lift: (a: number, b: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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
