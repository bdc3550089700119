import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient, AuditEntryDto, CandidateListDto, SessionDto } from "../src/api.js";
import { WorkbenchState, replayAudit } from "../src/state.js";

/** In-memory stand-in for the service, mimicking its session semantics. */
class FakeServer {
    session: SessionDto;
    predictCalls: number[] = [];

    constructor(context: string, marker = "□") {
        const gaps = Array.from(context)
            .map((ch, i) => ({ ch, i }))
            .filter(({ ch }) => ch === marker)
            .map(({ i }) => ({ position: i, damage_level: "II", committed_char: null as string | null, has_image: false }));
        this.session = {
            id: "fake01",
            marker,
            base_context: context,
            context,
            checkpoint_ref: "default",
            gaps,
            audit: [],
        };
    }

    private refreshContext(): void {
        const chars = Array.from(this.session.base_context);
        for (const gap of this.session.gaps) {
            if (gap.committed_char) chars[gap.position] = gap.committed_char;
        }
        this.session.context = chars.join("");
    }

    private audit(action: string, position: number, char: string | null): void {
        this.session.audit.push({ seq: this.session.audit.length + 1, action, position, char, at: "t" });
    }

    api(): ApiClient {
        const server = this;
        const client = Object.create(ApiClient.prototype) as ApiClient;
        const clone = () => JSON.parse(JSON.stringify(server.session)) as SessionDto;
        Object.assign(client, {
            async getSession() {
                return clone();
            },
            async createSession() {
                return clone();
            },
            async predict(_id: string, position: number): Promise<CandidateListDto> {
                server.predictCalls.push(position);
                // scores depend on the committed context so commits visibly re-rank
                const committed = server.session.gaps.filter((g) => g.committed_char).length;
                return {
                    position,
                    modality_used: "text-only",
                    restored_png_base64: null,
                    entries: [
                        { char: `c${committed}`, score: 1 + committed, probability: 0.5, glyph_png_base64: null },
                        { char: "x", score: 0.5, probability: 0.25, glyph_png_base64: null },
                    ],
                };
            },
            async commit(_id: string, position: number, char: string) {
                const gap = server.session.gaps.find((g) => g.position === position);
                if (!gap || gap.committed_char) throw new Error("gap locked");
                gap.committed_char = char;
                server.audit("commit", position, char);
                server.refreshContext();
                return clone();
            },
            async uncommit(_id: string, position: number) {
                const gap = server.session.gaps.find((g) => g.position === position);
                if (!gap || !gap.committed_char) throw new Error("not committed");
                gap.committed_char = null;
                server.audit("uncommit", position, null);
                server.refreshContext();
                return clone();
            },
            async uploadImage(_id: string, position: number) {
                const gap = server.session.gaps.find((g) => g.position === position);
                if (gap) gap.has_image = true;
                return { position, preview_png_base64: "ZmFrZQ==" };
            },
        });
        return client;
    }
}

describe("WorkbenchState", () => {
    let server: FakeServer;
    let state: WorkbenchState;

    beforeEach(async () => {
        server = new FakeServer("a□b□c.");
        state = new WorkbenchState(server.api());
        await state.create("a□b□c.");
    });

    it("tracks open gaps from the session mirror", () => {
        expect(state.openGaps()).toEqual([1, 3]);
    });

    it("commit updates the context and re-predicts the other open gaps", async () => {
        await state.predict(1);
        await state.predict(3);
        server.predictCalls = [];
        await state.commit(1, "X");
        expect(state.session?.context).toBe("aXb□c.");
        // only the remaining open gap is re-requested
        expect(server.predictCalls).toEqual([3]);
        expect(state.panels.get(3)?.entries[0]?.char).toBe("c1");
        expect(state.panels.has(1)).toBe(false);
    });

    it("undo restores both the context and the prior candidate panels", async () => {
        await state.predict(1);
        await state.predict(3);
        const before3 = state.panels.get(3);
        await state.commit(1, "X");
        expect(state.panels.get(3)?.entries[0]?.char).toBe("c1");
        const undone = await state.undo();
        expect(undone).toBe(true);
        expect(state.session?.context).toBe("a□b□c.");
        expect(state.panels.get(3)).toEqual(before3);
        expect(await state.undo()).toBe(false);
    });

    it("reload reconstructs state from the session endpoint", async () => {
        await state.commit(1, "X");
        const fresh = new WorkbenchState(server.api());
        await fresh.load("fake01");
        expect(fresh.session?.context).toBe("aXb□c.");
        expect(fresh.openGaps()).toEqual([3]);
        expect(fresh.panels.has(3)).toBe(true);
    });

    it("upload marks the gap and refreshes the mirror", async () => {
        const preview = await state.uploadImage(1, { image_png_base64: "ZmFrZQ==" });
        expect(preview).toBe("ZmFrZQ==");
        expect(state.session?.gaps.find((g) => g.position === 1)?.has_image).toBe(true);
    });
});

describe("replayAudit", () => {
    it("reproduces the final context, idempotently", () => {
        const audit: AuditEntryDto[] = [
            { seq: 1, action: "commit", position: 1, char: "X", at: "t" },
            { seq: 2, action: "commit", position: 3, char: "Y", at: "t" },
            { seq: 3, action: "uncommit", position: 1, char: null, at: "t" },
            { seq: 4, action: "commit", position: 1, char: "Z", at: "t" },
        ];
        const final = replayAudit("a□b□c.", audit, "□");
        expect(final).toBe("aZbYc.");
        expect(replayAudit("a□b□c.", audit, "□")).toBe(final);
    });

    it("uncommit restores the gap marker", () => {
        const audit: AuditEntryDto[] = [
            { seq: 1, action: "commit", position: 0, char: "Q", at: "t" },
            { seq: 2, action: "uncommit", position: 0, char: null, at: "t" },
        ];
        expect(replayAudit("□ab.", audit, "□")).toBe("□ab.");
    });
});
