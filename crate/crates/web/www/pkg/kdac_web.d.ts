/* tslint:disable */
/* eslint-disable */

export class MaskPreview {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    achieved_ratio: number;
    n: number;
    /**
     * Centered RGBA, sampled locations white.
     */
    pixels: Uint8Array;
    sampled: number;
}

export class ReconPreview {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    achieved_ratio: number;
    dac: Uint8Array;
    direct: Uint8Array;
    /**
     * `[psnr, ssim, hfen]` for zero fill, direct FCSA and the divide-and-conquer result.
     */
    metrics: Float64Array;
    n: number;
    reference: Uint8Array;
    zero_fill: Uint8Array;
}

export class ResponsePreview {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    band: string;
    count: number;
    label: string;
    n: number;
    /**
     * Centered RGBA of `|G_i|`, black at 0 and white at 1.
     */
    pixels: Uint8Array;
}

export function maskPreview(kind: string, ratio: number, n: number, seed: number): MaskPreview;

export function reconstruct(kind: string, ratio: number, n: number, seed: number, bank: string, sigma: number, outer_iters: number): ReconPreview;

export function responsePreview(bank: string, index: number, n: number): ResponsePreview;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_get_maskpreview_achieved_ratio: (a: number) => number;
    readonly __wbg_get_maskpreview_n: (a: number) => number;
    readonly __wbg_get_maskpreview_pixels: (a: number) => [number, number];
    readonly __wbg_get_maskpreview_sampled: (a: number) => number;
    readonly __wbg_get_reconpreview_achieved_ratio: (a: number) => number;
    readonly __wbg_get_reconpreview_dac: (a: number) => [number, number];
    readonly __wbg_get_reconpreview_direct: (a: number) => [number, number];
    readonly __wbg_get_reconpreview_metrics: (a: number) => [number, number];
    readonly __wbg_get_reconpreview_n: (a: number) => number;
    readonly __wbg_get_reconpreview_reference: (a: number) => [number, number];
    readonly __wbg_get_reconpreview_zero_fill: (a: number) => [number, number];
    readonly __wbg_get_responsepreview_band: (a: number) => [number, number];
    readonly __wbg_get_responsepreview_count: (a: number) => number;
    readonly __wbg_get_responsepreview_label: (a: number) => [number, number];
    readonly __wbg_get_responsepreview_n: (a: number) => number;
    readonly __wbg_get_responsepreview_pixels: (a: number) => [number, number];
    readonly __wbg_maskpreview_free: (a: number, b: number) => void;
    readonly __wbg_reconpreview_free: (a: number, b: number) => void;
    readonly __wbg_responsepreview_free: (a: number, b: number) => void;
    readonly __wbg_set_maskpreview_achieved_ratio: (a: number, b: number) => void;
    readonly __wbg_set_maskpreview_n: (a: number, b: number) => void;
    readonly __wbg_set_maskpreview_pixels: (a: number, b: number, c: number) => void;
    readonly __wbg_set_maskpreview_sampled: (a: number, b: number) => void;
    readonly __wbg_set_reconpreview_achieved_ratio: (a: number, b: number) => void;
    readonly __wbg_set_reconpreview_dac: (a: number, b: number, c: number) => void;
    readonly __wbg_set_reconpreview_direct: (a: number, b: number, c: number) => void;
    readonly __wbg_set_reconpreview_metrics: (a: number, b: number, c: number) => void;
    readonly __wbg_set_reconpreview_n: (a: number, b: number) => void;
    readonly __wbg_set_reconpreview_reference: (a: number, b: number, c: number) => void;
    readonly __wbg_set_reconpreview_zero_fill: (a: number, b: number, c: number) => void;
    readonly __wbg_set_responsepreview_band: (a: number, b: number, c: number) => void;
    readonly __wbg_set_responsepreview_count: (a: number, b: number) => void;
    readonly __wbg_set_responsepreview_label: (a: number, b: number, c: number) => void;
    readonly __wbg_set_responsepreview_n: (a: number, b: number) => void;
    readonly __wbg_set_responsepreview_pixels: (a: number, b: number, c: number) => void;
    readonly maskPreview: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly reconstruct: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number];
    readonly responsePreview: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly __externref_table_alloc: () => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
