/**
 * Workbench session state: a pure projection of the server session plus
 * the candidate panels and an undo stack of commits.
 *
 * Rules the UI relies on:
 *  - every mutation round-trips through the API, then the local mirror is
 *    replaced by the server's session object (no optimistic divergence);
 *  - committing a gap re-requests predictions for every remaining open
 *    gap, so their panels always reflect the committed context;
 *  - undo reverts the newest commit and restores the candidate panels
 *    captured before it.
 */

import { ApiClient, AuditEntryDto, CandidateListDto, SessionDto, UploadImageRequest } from "./api.js";

export interface UndoRecord {
    position: number;
    char: string;
    panelsBefore: Map<number, CandidateListDto>;
}

export class WorkbenchState {
    session: SessionDto | null = null;
    panels = new Map<number, CandidateListDto>();
    undoStack: UndoRecord[] = [];
    topN = 20;

    constructor(private api: ApiClient) {}

    private requireSession(): SessionDto {
        if (!this.session) throw new Error("no active session");
        return this.session;
    }

    async create(context: string): Promise<SessionDto> {
        this.session = await this.api.createSession(context);
        this.panels.clear();
        this.undoStack = [];
        return this.session;
    }

    /** Reconstruct the full state from the server (page reload path). */
    async load(sessionId: string): Promise<SessionDto> {
        this.session = await this.api.getSession(sessionId);
        this.panels.clear();
        this.undoStack = [];
        for (const pos of this.openGaps()) {
            this.panels.set(pos, await this.api.predict(this.session.id, pos, this.topN));
        }
        return this.session;
    }

    openGaps(): number[] {
        return this.requireSession()
            .gaps.filter((g) => g.committed_char === null)
            .map((g) => g.position)
            .sort((a, b) => a - b);
    }

    async uploadImage(position: number, payload: UploadImageRequest): Promise<string> {
        const s = this.requireSession();
        const result = await this.api.uploadImage(s.id, position, payload);
        this.session = await this.api.getSession(s.id);
        return result.preview_png_base64;
    }

    async predict(position: number): Promise<CandidateListDto> {
        const s = this.requireSession();
        const panel = await this.api.predict(s.id, position, this.topN);
        this.panels.set(position, panel);
        return panel;
    }

    /** Commit a choice, then refresh every other open gap's panel. */
    async commit(position: number, char: string): Promise<void> {
        const before = new Map(this.panels);
        this.session = await this.api.commit(this.requireSession().id, position, char);
        this.undoStack.push({ position, char, panelsBefore: before });
        this.panels.delete(position);
        for (const pos of this.openGaps()) {
            this.panels.set(pos, await this.api.predict(this.session.id, pos, this.topN));
        }
    }

    /** Revert the newest commit; context and panels return to their prior state. */
    async undo(): Promise<boolean> {
        const record = this.undoStack.pop();
        if (!record) return false;
        this.session = await this.api.uncommit(this.requireSession().id, record.position);
        this.panels = new Map(record.panelsBefore);
        return true;
    }
}

/** Client-side mirror of the server's audit replay; used to verify state. */
export function replayAudit(baseContext: string, audit: AuditEntryDto[], marker: string): string {
    const chars = Array.from(baseContext);
    const committed = new Map<number, string | null>();
    const sorted = [...audit].sort((a, b) => a.seq - b.seq);
    for (const entry of sorted) {
        if (entry.action === "commit") {
            committed.set(entry.position, entry.char);
        } else if (entry.action === "uncommit") {
            committed.set(entry.position, null);
        } else {
            throw new Error(`unknown audit action ${entry.action}`);
        }
    }
    for (const [pos, char] of committed) {
        chars[pos] = char ?? marker;
    }
    return chars.join("");
}
