/* tslint:disable */
/* eslint-disable */

export class Scene {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * The panorama with everything outside the view darkened.
     */
    footprint(yaw: number, pitch: number, roll: number, hfov: number, vfov: number): Uint8Array;
    height(): number;
    /**
     * A seam-continuous noise panorama of size `2 * height x height`.
     */
    constructor(height: number, seed: bigint);
    /**
     * The panorama itself as RGBA.
     */
    panorama(): Uint8Array;
    /**
     * The pinhole view at the given pose as RGBA, `w x h`.
     */
    render(yaw: number, pitch: number, roll: number, hfov: number, vfov: number, w: number, h: number): Uint8Array;
    width(): number;
}

/**
 * A simulated handheld path: `[yaw, pitch, roll]` in degrees per frame,
 * flattened, followed by the sampled `[hfov, vfov]`.
 */
export function simulateTrajectory(seed: bigint, frames: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_scene_free: (a: number, b: number) => void;
    readonly scene_footprint: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly scene_height: (a: number) => number;
    readonly scene_new: (a: number, b: bigint) => [number, number, number];
    readonly scene_panorama: (a: number) => [number, number];
    readonly scene_render: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
    readonly scene_width: (a: number) => number;
    readonly simulateTrajectory: (a: bigint, b: number) => [number, number, number, number];
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
