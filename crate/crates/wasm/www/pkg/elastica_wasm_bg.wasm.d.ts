/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_denoised_free: (a: number, b: number) => void;
export const __wbg_scene_free: (a: number, b: number) => void;
export const denoised_iterations: (a: number) => number;
export const denoised_normN: (a: number) => number;
export const denoised_psnr: (a: number) => number;
export const denoised_rgba: (a: number) => [number, number];
export const denoised_trace: (a: number) => [number, number];
export const scene_b0Check: (a: number, b: number) => [number, number, number, number];
export const scene_cleanRgba: (a: number) => [number, number];
export const scene_denoise: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number];
export const scene_new: (a: number, b: number, c: number) => [number, number, number];
export const scene_noisyPsnr: (a: number) => number;
export const scene_noisyRgba: (a: number) => [number, number];
export const scene_size: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
