/* tslint:disable */
/* eslint-disable */

export class DemoImage {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly height: number;
    readonly rgba: Uint8Array;
    readonly summary: string;
    readonly width: number;
}

export function detect(height_m: number, pitch_deg: number, x: number, y: number, radius: number): DemoImage;

export function distanceMap(height_m: number, pitch_deg: number, x: number, y: number, radius: number): DemoImage;

export function scaleMap(height_m: number, pitch_deg: number, stride: number): DemoImage;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demoimage_free: (a: number, b: number) => void;
    readonly demoimage_height: (a: number) => number;
    readonly demoimage_rgba: (a: number) => [number, number];
    readonly demoimage_summary: (a: number) => [number, number];
    readonly demoimage_width: (a: number) => number;
    readonly detect: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly distanceMap: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly scaleMap: (a: number, b: number, c: number) => [number, number, number];
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
