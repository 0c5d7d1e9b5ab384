/* tslint:disable */
/* eslint-disable */

/**
 * The outcome of one solver run.
 */
export class Denoised {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly iterations: number;
    readonly normN: number;
    readonly psnr: number;
    readonly rgba: Uint8Array;
    /**
     * Per-iteration CSV trace.
     */
    readonly trace: string;
}

/**
 * A clean rings image and its noisy copy.
 */
export class Scene {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Text report of the b = 0 experiment.
     */
    b0Check(max_iter: number): string;
    cleanRgba(): Uint8Array;
    /**
     * Denoises the noisy image. Unlisted weights keep their defaults.
     */
    denoise(solver: string, a: number, b: number, lambda: number, r1: number, tol: number, max_iter: number): Denoised;
    /**
     * Default rings image of side `size` with seeded Gaussian noise.
     */
    constructor(size: number, variance: number, seed: number);
    noisyPsnr(): number;
    noisyRgba(): Uint8Array;
    readonly size: number;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_denoised_free: (a: number, b: number) => void;
    readonly __wbg_scene_free: (a: number, b: number) => void;
    readonly denoised_iterations: (a: number) => number;
    readonly denoised_normN: (a: number) => number;
    readonly denoised_psnr: (a: number) => number;
    readonly denoised_rgba: (a: number) => [number, number];
    readonly denoised_trace: (a: number) => [number, number];
    readonly scene_b0Check: (a: number, b: number) => [number, number, number, number];
    readonly scene_cleanRgba: (a: number) => [number, number];
    readonly scene_denoise: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number];
    readonly scene_new: (a: number, b: number, c: number) => [number, number, number];
    readonly scene_noisyPsnr: (a: number) => number;
    readonly scene_noisyRgba: (a: number) => [number, number];
    readonly scene_size: (a: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
