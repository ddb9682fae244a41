/* tslint:disable */
/* eslint-disable */

export class Certificate {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly certified: boolean;
    readonly iterations: number;
    /**
     * Certified margin when feasible, otherwise the upper bound on it.
     */
    readonly margin: number;
    readonly status: string;
}

export function abscissaScan(k: number, delays: Float64Array): Float64Array;

export function certify(k: number, order: number, h: number): Certificate;

export function legendreSamples(order: number, samples: number): Float64Array;

export function stableDelays(k: number, h_max: number, step: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_certificate_free: (a: number, b: number) => void;
    readonly abscissaScan: (a: number, b: number, c: number) => [number, number, number, number];
    readonly certificate_certified: (a: number) => number;
    readonly certificate_iterations: (a: number) => number;
    readonly certificate_margin: (a: number) => number;
    readonly certificate_status: (a: number) => [number, number];
    readonly certify: (a: number, b: number, c: number) => [number, number, number];
    readonly legendreSamples: (a: number, b: number) => [number, number, number, number];
    readonly stableDelays: (a: number, b: number, c: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
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
