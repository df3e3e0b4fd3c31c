/* tslint:disable */
/* eslint-disable */

/**
 * Hydrogen self-energy profile; see [`self_energy_rows`].
 */
export function self_energy_profile(emin: number, emax: number, eim: number, count: number, second_sheet: boolean): Float64Array;

/**
 * Survival probability of the hydrogen 2P level; see [`survival_rows`].
 */
export function survival_curve(lambda: number, engine: string, t_max: number, count: number): Float64Array;

/**
 * Rescaled survival curves for several couplings; see [`vanhove_rows`].
 */
export function vanhove_collapse(lambdas: Float64Array, t_max: number, count: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly self_energy_profile: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly survival_curve: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly vanhove_collapse: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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
