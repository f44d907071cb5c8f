/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_clustering_free: (a: number, b: number) => void;
export const baseline: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const clustering_grid: (a: number) => [number, number];
export const clustering_heatmap: (a: number) => [number, number];
export const clustering_heatmapWidth: (a: number) => number;
export const clustering_labels: (a: number) => [number, number];
export const clustering_mass: (a: number) => number;
export const clustering_nClusters: (a: number) => number;
export const clustering_silhouette: (a: number) => number;
export const sampleAtMass: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
export const selectMass: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
