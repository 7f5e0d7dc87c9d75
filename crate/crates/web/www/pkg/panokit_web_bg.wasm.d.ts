/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_scene_free: (a: number, b: number) => void;
export const scene_footprint: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
export const scene_height: (a: number) => number;
export const scene_new: (a: number, b: bigint) => [number, number, number];
export const scene_panorama: (a: number) => [number, number];
export const scene_render: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
export const scene_width: (a: number) => number;
export const simulateTrajectory: (a: bigint, b: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
