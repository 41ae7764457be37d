/* tslint:disable */
/* eslint-disable */

/**
 * Density profile from the null vector and through the `Y_R` dual under
 * both insertion conventions.
 */
export function density_profiles(alpha: number, beta: number, gamma: number, delta: number, n: number): string;

/**
 * Relative intertwining residual for `N = 1..=n_max`, per variant and direction.
 */
export function intertwining_residuals(alpha: number, beta: number, gamma: number, delta: number, n_max: number): string;

/**
 * Eigenvalues of `H_NE` and both duals.
 */
export function spectra(alpha: number, beta: number, gamma: number, delta: number, n: number): string;

/**
 * DEHP, null-vector and mapped Bernoulli steady states with their angles.
 */
export function steady_states(alpha: number, beta: number, gamma: number, delta: number, n: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly density_profiles: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly intertwining_residuals: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly spectra: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly steady_states: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
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
