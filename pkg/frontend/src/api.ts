/**
 * Typed client for the restoration service /v1 HTTP JSON API.
 *
 * Every workbench mutation goes through this client; the UI never touches
 * the model directly. Server errors carry a structured {code, message}
 * body which is surfaced as ApiError.
 */

export interface GapDto {
    position: number;
    damage_level: string;
    committed_char: string | null;
    has_image: boolean;
}

export interface AuditEntryDto {
    seq: number;
    action: string; // commit | uncommit
    position: number;
    char: string | null;
    at: string;
}

export interface SessionDto {
    id: string;
    marker: string;
    base_context: string;
    context: string;
    checkpoint_ref: string;
    gaps: GapDto[];
    audit: AuditEntryDto[];
}

export interface CandidateEntryDto {
    char: string;
    score: number;
    probability: number;
    glyph_png_base64: string | null;
}

export interface CandidateListDto {
    position: number;
    modality_used: string; // multimodal | text-only
    restored_png_base64: string | null;
    entries: CandidateEntryDto[];
}

export interface UploadResultDto {
    position: number;
    preview_png_base64: string;
}

export interface VocabDto {
    mask_symbol: string;
    characters: string[];
}

export interface UploadImageRequest {
    image_png_base64: string;
    seal_rects?: number[][];
    invert?: boolean;
    damage_level?: string;
}

export class ApiError extends Error {
    constructor(public code: string, message: string, public status: number) {
        super(message);
    }
}

export class ApiClient {
    constructor(private baseUrl: string) {}

    private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
        const res = await fetch(`${this.baseUrl}${path}`, {
            method,
            headers: body === undefined ? undefined : { "Content-Type": "application/json" },
            body: body === undefined ? undefined : JSON.stringify(body),
        });
        const data = await res.json().catch(() => ({}));
        if (!res.ok) {
            throw new ApiError(data.code ?? "error", data.message ?? res.statusText, res.status);
        }
        return data as T;
    }

    health(): Promise<{ status: string }> {
        return this.request("GET", "/v1/health");
    }

    vocab(): Promise<VocabDto> {
        return this.request("GET", "/v1/vocab");
    }

    createSession(context: string, checkpointRef = "default"): Promise<SessionDto> {
        return this.request("POST", "/v1/sessions", { context, checkpoint_ref: checkpointRef });
    }

    getSession(id: string): Promise<SessionDto> {
        return this.request("GET", `/v1/sessions/${id}`);
    }

    deleteSession(id: string): Promise<{ ok: boolean }> {
        return this.request("DELETE", `/v1/sessions/${id}`);
    }

    uploadImage(id: string, position: number, payload: UploadImageRequest): Promise<UploadResultDto> {
        return this.request("POST", `/v1/sessions/${id}/gaps/${position}/image`, payload);
    }

    predict(id: string, position: number, topN = 20): Promise<CandidateListDto> {
        return this.request("POST", `/v1/sessions/${id}/gaps/${position}/predict`, { top_n: topN });
    }

    commit(id: string, position: number, char: string): Promise<SessionDto> {
        return this.request("POST", `/v1/sessions/${id}/gaps/${position}/commit`, { char });
    }

    uncommit(id: string, position: number): Promise<SessionDto> {
        return this.request("POST", `/v1/sessions/${id}/gaps/${position}/uncommit`);
    }

    report(id: string): Promise<{ id: string; context: string; audit: AuditEntryDto[] }> {
        return this.request("GET", `/v1/sessions/${id}/report`);
    }
}
