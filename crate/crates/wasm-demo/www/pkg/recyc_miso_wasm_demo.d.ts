/* tslint:disable */
/* eslint-disable */

/**
 * Hexagonal array of `n` antennas with power-law coupling, one seeded
 * Rayleigh draw and its exhaustive schedule.
 */
export function hex_array(n: number, spacing: number, alpha_ref_db: number, exponent: number, cap: number, seed: number): string;

/**
 * Recycling rate and classical capacity for `m_min..=m_max` antennas at a
 * budget fixed by `snr_db` at `m_max`.
 */
export function rate_curve(m_min: number, m_max: number, snr_db: number, alpha_db: number, cap: number, n_samples: number, seed: number): string;

/**
 * Schedules one channel (power gains `h`) under uniform coupling `alpha`
 * with both schedulers and returns the sorted-prefix gain curve.
 */
export function schedule_channel(h: Float64Array, alpha: number, cap: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly hex_array: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number];
    readonly rate_curve: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number];
    readonly schedule_channel: (a: number, b: number, c: number, d: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
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
