import { ApiClient } from "./api.js";
import { WorkbenchState } from "./state.js";
import { WorkbenchUI } from "./ui.js";

function serverUrl(): string {
    const input = document.getElementById("server-input") as HTMLInputElement | null;
    return input?.value.replace(/\/$/, "") || "http://127.0.0.1:8023";
}

function boot(): void {
    let api = new ApiClient(serverUrl());
    let state = new WorkbenchState(api);
    const ui = new WorkbenchUI(state, document);
    ui.bind();

    const connect = document.getElementById("btn-connect") as HTMLButtonElement;
    const status = document.getElementById("server-status") as HTMLSpanElement;
    connect.addEventListener("click", async () => {
        api = new ApiClient(serverUrl());
        state = new WorkbenchState(api);
        // rebind the UI onto the fresh state
        const freshUi = new WorkbenchUI(state, document);
        freshUi.bind();
        try {
            await api.health();
            const vocab = await api.vocab();
            status.textContent = `connected (${vocab.characters.length} characters, gap marker ${vocab.mask_symbol})`;
            (document.getElementById("marker-hint") as HTMLSpanElement).textContent = vocab.mask_symbol;
        } catch (err) {
            status.textContent = `unreachable: ${err}`;
        }
    });
}

document.addEventListener("DOMContentLoaded", boot);
