/**
 * DOM layer: context strip, crop/seal canvas, candidate panels.
 *
 * All state lives in WorkbenchState; this module renders it and forwards
 * user actions. Canvas interactions collect geometry through the pure
 * helpers in canvas.ts.
 */

import { ApiError, CandidateListDto } from "./api.js";
import { Rect, buildUploadPayload, clampRect, rectArea, rectFromCorners } from "./canvas.js";
import { WorkbenchState } from "./state.js";

type Mode = "crop" | "seal";

export class WorkbenchUI {
    private selectedGap: number | null = null;
    private mode: Mode = "crop";
    private image: HTMLImageElement | null = null;
    private crop: Rect | null = null;
    private seals: Rect[] = [];
    private dragStart: { x: number; y: number } | null = null;

    constructor(private state: WorkbenchState, private root: Document) {}

    el<T extends HTMLElement>(id: string): T {
        const node = this.root.getElementById(id);
        if (!node) throw new Error(`missing element #${id}`);
        return node as T;
    }

    bind(): void {
        this.el<HTMLButtonElement>("btn-create").addEventListener("click", () => {
            this.guard(async () => {
                const context = this.el<HTMLInputElement>("context-input").value;
                await this.state.create(context);
                this.selectedGap = this.state.openGaps()[0] ?? null;
                this.renderAll();
            });
        });
        this.el<HTMLButtonElement>("btn-load").addEventListener("click", () => {
            this.guard(async () => {
                await this.state.load(this.el<HTMLInputElement>("session-input").value.trim());
                this.selectedGap = this.state.openGaps()[0] ?? null;
                this.renderAll();
            });
        });
        this.el<HTMLButtonElement>("btn-undo").addEventListener("click", () => {
            this.guard(async () => {
                await this.state.undo();
                this.renderAll();
            });
        });
        this.el<HTMLInputElement>("file-input").addEventListener("change", (ev) => {
            const file = (ev.target as HTMLInputElement).files?.[0];
            if (file) this.loadImageFile(file);
        });
        this.el<HTMLButtonElement>("btn-mode-crop").addEventListener("click", () => this.setMode("crop"));
        this.el<HTMLButtonElement>("btn-mode-seal").addEventListener("click", () => this.setMode("seal"));
        this.el<HTMLButtonElement>("btn-clear-seals").addEventListener("click", () => {
            this.seals = [];
            this.drawCanvas();
        });
        this.el<HTMLButtonElement>("btn-upload").addEventListener("click", () => this.upload());
        this.el<HTMLButtonElement>("btn-predict").addEventListener("click", () => {
            this.guard(async () => {
                if (this.selectedGap !== null) await this.state.predict(this.selectedGap);
                this.renderAll();
            });
        });
        const canvas = this.el<HTMLCanvasElement>("work-canvas");
        canvas.addEventListener("mousedown", (ev) => this.onCanvasDown(ev));
        canvas.addEventListener("mousemove", (ev) => this.onCanvasMove(ev));
        canvas.addEventListener("mouseup", (ev) => this.onCanvasUp(ev));
    }

    private guard(fn: () => Promise<void>): void {
        fn().catch((err) => {
            const box = this.el<HTMLDivElement>("error-box");
            box.textContent = err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
            box.style.display = "block";
            setTimeout(() => (box.style.display = "none"), 6000);
        });
    }

    private setMode(mode: Mode): void {
        this.mode = mode;
        this.el<HTMLButtonElement>("btn-mode-crop").classList.toggle("active", mode === "crop");
        this.el<HTMLButtonElement>("btn-mode-seal").classList.toggle("active", mode === "seal");
    }

    private loadImageFile(file: File): void {
        const url = URL.createObjectURL(file);
        const img = new Image();
        img.onload = () => {
            this.image = img;
            this.crop = { x0: 0, y0: 0, x1: img.naturalWidth, y1: img.naturalHeight };
            this.seals = [];
            this.drawCanvas();
            URL.revokeObjectURL(url);
        };
        img.src = url;
    }

    private canvasPoint(ev: MouseEvent): { x: number; y: number } {
        const canvas = this.el<HTMLCanvasElement>("work-canvas");
        const bounds = canvas.getBoundingClientRect();
        const scaleX = canvas.width / bounds.width;
        const scaleY = canvas.height / bounds.height;
        return { x: (ev.clientX - bounds.left) * scaleX, y: (ev.clientY - bounds.top) * scaleY };
    }

    private onCanvasDown(ev: MouseEvent): void {
        if (!this.image) return;
        this.dragStart = this.canvasPoint(ev);
    }

    private onCanvasMove(ev: MouseEvent): void {
        if (!this.image || !this.dragStart) return;
        const p = this.canvasPoint(ev);
        const rect = clampRect(
            rectFromCorners(this.dragStart.x, this.dragStart.y, p.x, p.y),
            this.image.naturalWidth,
            this.image.naturalHeight
        );
        this.drawCanvas(rect);
    }

    private onCanvasUp(ev: MouseEvent): void {
        if (!this.image || !this.dragStart) return;
        const p = this.canvasPoint(ev);
        const rect = clampRect(
            rectFromCorners(this.dragStart.x, this.dragStart.y, p.x, p.y),
            this.image.naturalWidth,
            this.image.naturalHeight
        );
        this.dragStart = null;
        if (rectArea(rect) < 4) return;
        if (this.mode === "crop") {
            this.crop = rect;
        } else {
            this.seals.push(rect);
        }
        this.drawCanvas();
    }

    private drawCanvas(preview?: Rect): void {
        const canvas = this.el<HTMLCanvasElement>("work-canvas");
        const ctx = canvas.getContext("2d");
        if (!ctx) return;
        if (!this.image) {
            ctx.clearRect(0, 0, canvas.width, canvas.height);
            return;
        }
        canvas.width = this.image.naturalWidth;
        canvas.height = this.image.naturalHeight;
        ctx.drawImage(this.image, 0, 0);
        const strokeRect = (r: Rect, color: string, fill?: string) => {
            if (fill) {
                ctx.fillStyle = fill;
                ctx.fillRect(r.x0, r.y0, r.x1 - r.x0, r.y1 - r.y0);
            }
            ctx.strokeStyle = color;
            ctx.lineWidth = Math.max(1, canvas.width / 200);
            ctx.strokeRect(r.x0, r.y0, r.x1 - r.x0, r.y1 - r.y0);
        };
        for (const seal of this.seals) strokeRect(seal, "rgb(220,70,70)", "rgba(220,70,70,0.25)");
        if (this.crop) strokeRect(this.crop, "rgb(60,130,240)");
        if (preview) strokeRect(preview, this.mode === "crop" ? "rgb(60,130,240)" : "rgb(220,70,70)");
    }

    private upload(): void {
        this.guard(async () => {
            if (this.selectedGap === null) throw new Error("select a gap first");
            if (!this.image || !this.crop) throw new Error("load an image and set a crop first");
            const crop = this.crop;
            const out = this.root.createElement("canvas");
            out.width = Math.max(1, Math.round(crop.x1 - crop.x0));
            out.height = Math.max(1, Math.round(crop.y1 - crop.y0));
            const ctx = out.getContext("2d");
            if (!ctx) throw new Error("canvas unavailable");
            ctx.drawImage(this.image, crop.x0, crop.y0, out.width, out.height, 0, 0, out.width, out.height);
            const pngBase64 = out.toDataURL("image/png").split(",")[1] ?? "";
            const payload = buildUploadPayload({
                pngBase64,
                crop,
                seals: this.seals,
                invert: this.el<HTMLInputElement>("invert-input").checked,
                damageLevel: this.el<HTMLSelectElement>("damage-select").value,
            });
            const preview = await this.state.uploadImage(this.selectedGap, payload);
            this.el<HTMLImageElement>("preview-img").src = `data:image/png;base64,${preview}`;
            await this.state.predict(this.selectedGap);
            this.renderAll();
        });
    }

    renderAll(): void {
        this.renderSessionSummary();
        this.renderContextStrip();
        this.renderPanel();
    }

    private renderSessionSummary(): void {
        const s = this.state.session;
        this.el<HTMLSpanElement>("session-id").textContent = s ? s.id : "(none)";
        this.el<HTMLButtonElement>("btn-undo").disabled = this.state.undoStack.length === 0;
    }

    private renderContextStrip(): void {
        const strip = this.el<HTMLDivElement>("context-strip");
        strip.textContent = "";
        const s = this.state.session;
        if (!s) return;
        const byPos = new Map(s.gaps.map((g) => [g.position, g]));
        Array.from(s.context).forEach((ch, i) => {
            const span = this.root.createElement("span");
            span.textContent = ch;
            span.className = "cell";
            const gap = byPos.get(i);
            if (gap) {
                span.classList.add(gap.committed_char ? "committed" : "gap");
                if (i === this.selectedGap) span.classList.add("selected");
                span.title = `gap at ${i} (damage ${gap.damage_level})`;
                span.addEventListener("click", () => {
                    this.selectedGap = i;
                    this.guard(async () => {
                        if (!gap.committed_char && !this.state.panels.has(i)) {
                            await this.state.predict(i);
                        }
                        this.renderAll();
                    });
                });
            }
            strip.appendChild(span);
        });
    }

    private renderPanel(): void {
        const panelBox = this.el<HTMLDivElement>("candidates");
        panelBox.textContent = "";
        const badge = this.el<HTMLSpanElement>("modality-badge");
        const restored = this.el<HTMLImageElement>("restored-img");
        badge.textContent = "";
        restored.style.display = "none";
        if (this.selectedGap === null) return;
        this.el<HTMLSpanElement>("gap-label").textContent = `gap @ ${this.selectedGap}`;
        const panel = this.state.panels.get(this.selectedGap);
        if (!panel) return;
        badge.textContent = panel.modality_used;
        badge.className = `badge ${panel.modality_used === "multimodal" ? "multi" : "text"}`;
        if (panel.restored_png_base64) {
            restored.src = `data:image/png;base64,${panel.restored_png_base64}`;
            restored.style.display = "inline-block";
        }
        panel.entries.forEach((entry, rank) => {
            const row = this.root.createElement("div");
            row.className = "cand";
            const glyph = this.root.createElement("img");
            if (entry.glyph_png_base64) glyph.src = `data:image/png;base64,${entry.glyph_png_base64}`;
            glyph.className = "glyph";
            const label = this.root.createElement("span");
            label.className = "cand-char";
            label.textContent = `${rank + 1}. ${entry.char}`;
            const bar = this.root.createElement("div");
            bar.className = "bar";
            const fill = this.root.createElement("div");
            fill.className = "fill";
            fill.style.width = `${Math.round(entry.probability * 100)}%`;
            bar.appendChild(fill);
            const prob = this.root.createElement("span");
            prob.className = "prob";
            prob.textContent = `${(entry.probability * 100).toFixed(1)}%`;
            const btn = this.root.createElement("button");
            btn.textContent = "commit";
            btn.addEventListener("click", () => {
                this.guard(async () => {
                    await this.state.commit(panel.position, entry.char);
                    this.selectedGap = this.state.openGaps()[0] ?? null;
                    this.renderAll();
                });
            });
            row.append(glyph, label, bar, prob, btn);
            panelBox.appendChild(row);
        });
    }
}
