// Typed client for the annotation backend. All endpoints return JSON;
// non-2xx responses carry {"error": message}.
/** The server answered with a non-2xx status. Not retryable by itself. */
export class ApiError extends Error {
    constructor(status, message) {
        super(message);
        this.status = status;
    }
}
async function parseError(response) {
    let message = response.statusText;
    try {
        const body = await response.json();
        if (body && typeof body.error === "string")
            message = body.error;
    }
    catch {
        // non-JSON error body, keep the status text
    }
    throw new ApiError(response.status, message);
}
export class Api {
    constructor(base = "") {
        this.base = base;
    }
    async getJson(path) {
        const response = await fetch(this.base + path);
        if (!response.ok)
            await parseError(response);
        return (await response.json());
    }
    taxonomy() {
        return this.getJson("/api/taxonomy");
    }
    documents() {
        return this.getJson("/api/documents");
    }
    document(id) {
        return this.getJson(`/api/documents/${encodeURIComponent(id)}`);
    }
    consensus(id, minSupport) {
        const doc = encodeURIComponent(id);
        return this.getJson(`/api/consensus/${doc}?min_support=${minSupport}`);
    }
    progress(annotator) {
        return this.getJson(`/api/progress/${encodeURIComponent(annotator)}`);
    }
    async postAnnotation(body) {
        const response = await fetch(this.base + "/api/annotations", {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify(body),
        });
        if (!response.ok)
            await parseError(response);
        await response.json();
    }
}
