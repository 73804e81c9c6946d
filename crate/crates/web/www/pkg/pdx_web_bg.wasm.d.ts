/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_convergence_free: (a: number, b: number) => void;
export const __wbg_distribution_free: (a: number, b: number) => void;
export const __wbg_firstpassage_free: (a: number, b: number) => void;
export const convergence_errors: (a: number) => [number, number];
export const convergence_orders: (a: number) => [number, number];
export const convergence_slices: (a: number) => [number, number];
export const crossingDistribution: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
export const distribution_deviation: (a: number) => [number, number];
export const distribution_horizons: (a: number) => [number, number];
export const distribution_p_cross: (a: number) => [number, number];
export const distribution_p_never: (a: number) => [number, number];
export const firstPassage: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
export const firstpassage_density: (a: number) => [number, number];
export const firstpassage_expansion_residual: (a: number) => number;
export const firstpassage_mode: (a: number) => number;
export const firstpassage_taus: (a: number) => [number, number];
export const firstpassage_wall_flux: (a: number) => [number, number];
export const zenoConvergence: (a: number, b: number, c: number, d: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
