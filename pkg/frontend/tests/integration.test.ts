/**
 * End-to-end workbench flow against the real service with a fixed tiny
 * checkpoint (scripts/serve_fixture.py): upload an artefact crop, predict
 * both gaps, commit the first gap's top candidate, observe the second
 * gap's candidates change, reconstruct the state as a page reload would,
 * and verify the audit replay.
 */

import { ChildProcess, spawn } from "node:child_process";
import path from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { buildUploadPayload } from "../src/canvas.js";
import { WorkbenchState, replayAudit } from "../src/state.js";

const PORT = 8031;
const BASE = `http://127.0.0.1:${PORT}`;
const REPO_ROOT = path.resolve(__dirname, "..", "..");

// 32x32 grayscale glyph crop (decodable PNG), stands in for a canvas export
const CROP_PNG_BASE64 =
    "iVBORw0KGgoAAAANSUhEUgAAACAAAAAgCAAAAABWESUoAAAA+UlEQVR4nLXTv0tCYRTG8e97UXBwqOVm1jUHR/2rLAKxiIggVHBtaW1oaYhag8aItlodNC79MDf/i/dpuERy6by1+Ewv53zgcDi8ToQT/dH/Pxg4V/ypzpvOub1surL0oaDvzBpAL3v/BtIEOJUJRjFE5zLB8yoUrmSChzKUbmWCuxKU72WCmyKsPMkEFxHEI5ngzEGSygRDoDGTCQBa81xfuWO14sA1ozpct30APNbhcjsvFrf43ALa3l5T0xqw422gjwTY9TbQ+ybQ8TbQ2wbQ9TbQaxXY9zZQug4cBIDSCnAYAHqpAEcBoMkacBwAGsfAiSS55X/eL4YxF+iP67HSAAAAAElFTkSuQmCC";

let server: ChildProcess;

async function waitForService(timeoutMs = 120_000): Promise<void> {
    const deadline = Date.now() + timeoutMs;
    while (Date.now() < deadline) {
        try {
            const res = await fetch(`${BASE}/v1/health`);
            if (res.ok) return;
        } catch {
            // not up yet
        }
        await new Promise((r) => setTimeout(r, 500));
    }
    throw new Error("fixture service did not come up");
}

beforeAll(async () => {
    server = spawn("python3", [path.join(REPO_ROOT, "scripts", "serve_fixture.py"), "--port", String(PORT)], {
        cwd: REPO_ROOT,
        stdio: ["ignore", "pipe", "pipe"],
    });
    server.stderr?.on("data", (chunk) => process.stderr.write(`[service] ${chunk}`));
    await waitForService();
}, 180_000);

afterAll(() => {
    server?.kill();
});

describe("workbench against the fixture service (S1)", () => {
    it("runs the seeded two-gap restoration flow", async () => {
        const api = new ApiClient(BASE);
        const vocab = await api.vocab();
        expect(vocab.characters.length).toBeGreaterThan(10);

        // two-gap context from vocabulary characters
        const chars = vocab.characters;
        const context = [chars[0], vocab.mask_symbol, chars[1], chars[2], vocab.mask_symbol, chars[3], "."].join("");
        const state = new WorkbenchState(api);
        const session = await state.create(context);
        const [gap1, gap2] = [1, 4];
        expect(state.openGaps()).toEqual([gap1, gap2]);

        // crop/upload path: payload built exactly like the canvas does
        const payload = buildUploadPayload({
            pngBase64: CROP_PNG_BASE64,
            crop: { x0: 0, y0: 0, x1: 32, y1: 32 },
            seals: [{ x0: 0, y0: 0, x1: 4, y1: 4 }],
            invert: false,
            damageLevel: "II",
        });
        const preview = await state.uploadImage(gap1, payload);
        expect(preview.length).toBeGreaterThan(100);
        expect(state.session?.gaps.find((g) => g.position === gap1)?.has_image).toBe(true);

        // predictions: gap1 multimodal (image attached), gap2 text-only
        const panel1 = await state.predict(gap1);
        expect(panel1.modality_used).toBe("multimodal");
        expect(panel1.restored_png_base64).toBeTruthy();
        expect(panel1.entries.length).toBe(20);
        const panel2Before = await state.predict(gap2);
        expect(panel2Before.modality_used).toBe("text-only");

        // committing gap1 changes gap2's candidate list
        const choice = panel1.entries[0]!.char;
        await state.commit(gap1, choice);
        expect(state.session?.context[gap1]).toBe(choice);
        const panel2After = state.panels.get(gap2)!;
        expect(panel2After.entries.map((e) => e.score)).not.toEqual(panel2Before.entries.map((e) => e.score));

        // deterministic fixture: the changed top-1 is stable across calls
        const again = await api.predict(session.id, gap2, 20);
        expect(again.entries[0]!.char).toBe(panel2After.entries[0]!.char);

        // page reload: rebuild the whole state from the session endpoint
        const reloaded = new WorkbenchState(api);
        await reloaded.load(session.id);
        expect(reloaded.session?.context).toBe(state.session?.context);
        expect(reloaded.session?.gaps).toEqual(state.session?.gaps.map((g) => ({ ...g })));
        expect(reloaded.openGaps()).toEqual([gap2]);
        const reloadedPanel = reloaded.panels.get(gap2)!;
        expect(reloadedPanel.entries.map((e) => [e.char, e.score])).toEqual(
            panel2After.entries.map((e) => [e.char, e.score])
        );

        // audit replay reproduces the final context client-side and server-side
        const report = await api.report(session.id);
        expect(replayAudit(session.base_context, report.audit, session.marker)).toBe(state.session!.context);

        // undo restores the gap and the prior candidates
        await state.undo();
        expect(state.session?.context[gap1]).toBe(session.marker);
        expect(state.panels.get(gap2)?.entries.map((e) => e.score)).toEqual(
            panel2Before.entries.map((e) => e.score)
        );
    }, 120_000);

    it("surfaces structured server errors", async () => {
        const api = new ApiClient(BASE);
        await expect(api.getSession("does-not-exist")).rejects.toMatchObject({ code: "not_found", status: 404 });
    });
});
