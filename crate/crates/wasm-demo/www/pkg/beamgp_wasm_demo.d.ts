/* tslint:disable */
/* eslint-disable */

/**
 * FE deflection of the unit cantilever with one element weakened by
 * `reduction`, alongside the undamaged curve.
 */
export function damage_deflection(element: number, reduction: number, n_elements: number): string;

/**
 * Synthesizes the unit cantilever benchmark, fits EI and returns the
 * stiffness posterior with mixture predictions of u and m.
 */
export function fit_cantilever(snr: number, points_per_sensor: number, seed: number, n_steps: number): string;

/**
 * `∂^m/∂x^m ∂^n/∂x'^n k(x, 0)` for x over ±4ℓ, as `{x, k}`.
 */
export function kernel_curve(sigma_s: number, ell: number, m: number, n: number, points: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly damage_deflection: (a: number, b: number, c: number) => [number, number, number, number];
    readonly fit_cantilever: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly kernel_curve: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
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
