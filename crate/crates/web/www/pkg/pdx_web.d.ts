/* tslint:disable */
/* eslint-disable */

export class Convergence {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    errors(): Float64Array;
    /**
     * Empirical orders; `NaN` for the first row.
     */
    orders(): Float64Array;
    slices(): Float64Array;
}

/**
 * Columns of a crossing distribution, one entry per horizon.
 */
export class Distribution {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    deviation(): Float64Array;
    horizons(): Float64Array;
    p_cross(): Float64Array;
    p_never(): Float64Array;
}

export class FirstPassage {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    density(): Float64Array;
    /**
     * Relative residual of the Euclidean expansion at `x_to`, `tau_max`.
     */
    expansion_residual(): number;
    mode(): number;
    taus(): Float64Array;
    /**
     * `D` times the wall gradient of the image kernel; matches `density`.
     */
    wall_flux(): Float64Array;
}

/**
 * First-crossing and never-crossing probabilities of a free Gaussian packet
 * starting left of `x = 0`, at `samples` horizons up to `t_max`.
 */
export function crossingDistribution(center: number, width: number, wavenumber: number, n_points: number, t_max: number, samples: number): Distribution;

export function firstPassage(x_from: number, wall: number, x_to: number, diffusion: number, tau_max: number, samples: number): FirstPassage;

/**
 * Frobenius distance between Zeno products and the Dirichlet propagator for
 * `K = k_min, 2 k_min, ...` up to `k_max`.
 */
export function zenoConvergence(n_points: number, total_time: number, k_min: number, k_max: number): Convergence;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_convergence_free: (a: number, b: number) => void;
    readonly __wbg_distribution_free: (a: number, b: number) => void;
    readonly __wbg_firstpassage_free: (a: number, b: number) => void;
    readonly convergence_errors: (a: number) => [number, number];
    readonly convergence_orders: (a: number) => [number, number];
    readonly convergence_slices: (a: number) => [number, number];
    readonly crossingDistribution: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
    readonly distribution_deviation: (a: number) => [number, number];
    readonly distribution_horizons: (a: number) => [number, number];
    readonly distribution_p_cross: (a: number) => [number, number];
    readonly distribution_p_never: (a: number) => [number, number];
    readonly firstPassage: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
    readonly firstpassage_density: (a: number) => [number, number];
    readonly firstpassage_expansion_residual: (a: number) => number;
    readonly firstpassage_mode: (a: number) => number;
    readonly firstpassage_taus: (a: number) => [number, number];
    readonly firstpassage_wall_flux: (a: number) => [number, number];
    readonly zenoConvergence: (a: number, b: number, c: number, d: number) => [number, number, number];
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
