/* tslint:disable */
/* eslint-disable */

/**
 * Result of a sampling run, read by the page through getters.
 */
export class Clustering {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Flattened `[alpha, k, silhouette, ...]` per grid point.
     */
    readonly grid: Float64Array;
    readonly heatmapWidth: number;
    readonly heatmap: Uint8Array;
    readonly labels: Uint32Array;
    readonly mass: number;
    readonly nClusters: number;
    readonly silhouette: number;
}

export function baseline(xy: Float64Array, method: string, k: number): Uint32Array;

export function sampleAtMass(xy: Float64Array, mass: number, temperature: number, samples: number, seed: number): Clustering;

export function selectMass(xy: Float64Array, k_min: number, k_max: number, temperature: number, samples: number, seed: number): Clustering;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_clustering_free: (a: number, b: number) => void;
    readonly baseline: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly clustering_grid: (a: number) => [number, number];
    readonly clustering_heatmap: (a: number) => [number, number];
    readonly clustering_heatmapWidth: (a: number) => number;
    readonly clustering_labels: (a: number) => [number, number];
    readonly clustering_mass: (a: number) => number;
    readonly clustering_nClusters: (a: number) => number;
    readonly clustering_silhouette: (a: number) => number;
    readonly sampleAtMass: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
    readonly selectMass: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
