/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demoimage_free: (a: number, b: number) => void;
export const demoimage_height: (a: number) => number;
export const demoimage_rgba: (a: number) => [number, number];
export const demoimage_summary: (a: number) => [number, number];
export const demoimage_width: (a: number) => number;
export const detect: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const distanceMap: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const scaleMap: (a: number, b: number, c: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
