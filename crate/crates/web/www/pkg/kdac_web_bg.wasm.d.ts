/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_get_maskpreview_achieved_ratio: (a: number) => number;
export const __wbg_get_maskpreview_n: (a: number) => number;
export const __wbg_get_maskpreview_pixels: (a: number) => [number, number];
export const __wbg_get_maskpreview_sampled: (a: number) => number;
export const __wbg_get_reconpreview_achieved_ratio: (a: number) => number;
export const __wbg_get_reconpreview_dac: (a: number) => [number, number];
export const __wbg_get_reconpreview_direct: (a: number) => [number, number];
export const __wbg_get_reconpreview_metrics: (a: number) => [number, number];
export const __wbg_get_reconpreview_n: (a: number) => number;
export const __wbg_get_reconpreview_reference: (a: number) => [number, number];
export const __wbg_get_reconpreview_zero_fill: (a: number) => [number, number];
export const __wbg_get_responsepreview_band: (a: number) => [number, number];
export const __wbg_get_responsepreview_count: (a: number) => number;
export const __wbg_get_responsepreview_label: (a: number) => [number, number];
export const __wbg_get_responsepreview_n: (a: number) => number;
export const __wbg_get_responsepreview_pixels: (a: number) => [number, number];
export const __wbg_maskpreview_free: (a: number, b: number) => void;
export const __wbg_reconpreview_free: (a: number, b: number) => void;
export const __wbg_responsepreview_free: (a: number, b: number) => void;
export const __wbg_set_maskpreview_achieved_ratio: (a: number, b: number) => void;
export const __wbg_set_maskpreview_n: (a: number, b: number) => void;
export const __wbg_set_maskpreview_pixels: (a: number, b: number, c: number) => void;
export const __wbg_set_maskpreview_sampled: (a: number, b: number) => void;
export const __wbg_set_reconpreview_achieved_ratio: (a: number, b: number) => void;
export const __wbg_set_reconpreview_dac: (a: number, b: number, c: number) => void;
export const __wbg_set_reconpreview_direct: (a: number, b: number, c: number) => void;
export const __wbg_set_reconpreview_metrics: (a: number, b: number, c: number) => void;
export const __wbg_set_reconpreview_n: (a: number, b: number) => void;
export const __wbg_set_reconpreview_reference: (a: number, b: number, c: number) => void;
export const __wbg_set_reconpreview_zero_fill: (a: number, b: number, c: number) => void;
export const __wbg_set_responsepreview_band: (a: number, b: number, c: number) => void;
export const __wbg_set_responsepreview_count: (a: number, b: number) => void;
export const __wbg_set_responsepreview_label: (a: number, b: number, c: number) => void;
export const __wbg_set_responsepreview_n: (a: number, b: number) => void;
export const __wbg_set_responsepreview_pixels: (a: number, b: number, c: number) => void;
export const maskPreview: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const reconstruct: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number];
export const responsePreview: (a: number, b: number, c: number, d: number) => [number, number, number];
export const __externref_table_alloc: () => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
