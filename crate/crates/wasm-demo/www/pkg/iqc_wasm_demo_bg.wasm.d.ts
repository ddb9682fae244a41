/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_certificate_free: (a: number, b: number) => void;
export const abscissaScan: (a: number, b: number, c: number) => [number, number, number, number];
export const certificate_certified: (a: number) => number;
export const certificate_iterations: (a: number) => number;
export const certificate_margin: (a: number) => number;
export const certificate_status: (a: number) => [number, number];
export const certify: (a: number, b: number, c: number) => [number, number, number];
export const legendreSamples: (a: number, b: number) => [number, number, number, number];
export const stableDelays: (a: number, b: number, c: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
