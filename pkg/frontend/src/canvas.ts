/**
 * Pure geometry and payload helpers behind the crop/seal canvas.
 *
 * Everything here is DOM-free so the logic is unit-testable; ui.ts owns
 * the actual <canvas> drawing.
 */

import { UploadImageRequest } from "./api.js";

export interface Rect {
    x0: number;
    y0: number;
    x1: number;
    y1: number;
}

/** Rectangle from two drag corners, normalized to x0<=x1, y0<=y1. */
export function rectFromCorners(ax: number, ay: number, bx: number, by: number): Rect {
    return {
        x0: Math.min(ax, bx),
        y0: Math.min(ay, by),
        x1: Math.max(ax, bx),
        y1: Math.max(ay, by),
    };
}

export function clampRect(r: Rect, width: number, height: number): Rect {
    const clamp = (v: number, hi: number) => Math.min(Math.max(v, 0), hi);
    return {
        x0: clamp(r.x0, width),
        y0: clamp(r.y0, height),
        x1: clamp(r.x1, width),
        y1: clamp(r.y1, height),
    };
}

export function rectArea(r: Rect): number {
    return Math.max(0, r.x1 - r.x0) * Math.max(0, r.y1 - r.y0);
}

/** Seal rectangles are painted in image coordinates; the upload payload
 *  wants them relative to the crop. Rectangles outside the crop are
 *  dropped, partial overlaps are clipped. */
export function sealsRelativeToCrop(seals: Rect[], crop: Rect): Rect[] {
    const out: Rect[] = [];
    for (const seal of seals) {
        const clipped: Rect = {
            x0: Math.max(seal.x0, crop.x0) - crop.x0,
            y0: Math.max(seal.y0, crop.y0) - crop.y0,
            x1: Math.min(seal.x1, crop.x1) - crop.x0,
            y1: Math.min(seal.y1, crop.y1) - crop.y0,
        };
        if (clipped.x1 > clipped.x0 && clipped.y1 > clipped.y0) {
            out.push(clipped);
        }
    }
    return out;
}

export interface UploadDraft {
    pngBase64: string;
    crop: Rect;
    seals: Rect[];
    invert: boolean;
    damageLevel: string;
}

/** Final JSON body for the gap-image upload endpoint. */
export function buildUploadPayload(draft: UploadDraft): UploadImageRequest {
    const seals = sealsRelativeToCrop(draft.seals, draft.crop);
    return {
        image_png_base64: draft.pngBase64,
        seal_rects: seals.length ? seals.map((r) => [r.x0, r.y0, r.x1, r.y1]) : undefined,
        invert: draft.invert,
        damage_level: draft.damageLevel,
    };
}

/** Crop of a raw RGBA buffer; mirrors what the canvas does visually. */
export function cropPixels(
    pixels: Uint8ClampedArray,
    width: number,
    height: number,
    rect: Rect
): { pixels: Uint8ClampedArray; width: number; height: number } {
    const r = clampRect(
        { x0: Math.floor(rect.x0), y0: Math.floor(rect.y0), x1: Math.ceil(rect.x1), y1: Math.ceil(rect.y1) },
        width,
        height
    );
    const w = Math.max(0, r.x1 - r.x0);
    const h = Math.max(0, r.y1 - r.y0);
    const out = new Uint8ClampedArray(w * h * 4);
    for (let y = 0; y < h; y++) {
        const src = ((y + r.y0) * width + r.x0) * 4;
        out.set(pixels.subarray(src, src + w * 4), y * w * 4);
    }
    return { pixels: out, width: w, height: h };
}
