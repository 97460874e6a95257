// Typed client for the annotation backend. All endpoints return JSON;
// non-2xx responses carry {"error": message}.

export interface LabelInfo {
  name: string;
  depth: number;
  parent: string | null;
}

export interface TaxonomyPayload {
  labels: LabelInfo[];
}

export interface DocumentSummary {
  id: string;
  split: string;
  mentions: number;
}

export interface TokenPayload {
  text: string;
  dep_head: number;
  dep_label: string;
}

export interface MentionPayload {
  id: string;
  sentence: number;
  start: number;
  end: number;
  head: number;
  kind: string;
  entity_id?: string;
  raw_types?: string[];
  gold_labels?: string[];
}

export interface DocumentPayload {
  id: string;
  split: string;
  sentences: TokenPayload[][];
  mentions: MentionPayload[];
  topic?: string;
}

export interface ConsensusPayload {
  document: string;
  min_support: number;
  mentions: Record<string, string[]>;
}

export interface ProgressPayload {
  annotator: string;
  documents: Record<string, string[]>;
  annotated_mentions: number;
  total_mentions: number;
}

export interface AnnotationBody {
  annotator: string;
  document: string;
  mention: string;
  labels: string[];
}

/** The server answered with a non-2xx status. Not retryable by itself. */
export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

async function parseError(response: Response): Promise<never> {
  let message = response.statusText;
  try {
    const body = await response.json();
    if (body && typeof body.error === "string") message = body.error;
  } catch {
    // non-JSON error body, keep the status text
  }
  throw new ApiError(response.status, message);
}

export class Api {
  constructor(private readonly base: string = "") {}

  private async getJson<T>(path: string): Promise<T> {
    const response = await fetch(this.base + path);
    if (!response.ok) await parseError(response);
    return (await response.json()) as T;
  }

  taxonomy(): Promise<TaxonomyPayload> {
    return this.getJson("/api/taxonomy");
  }

  documents(): Promise<{ documents: DocumentSummary[] }> {
    return this.getJson("/api/documents");
  }

  document(id: string): Promise<DocumentPayload> {
    return this.getJson(`/api/documents/${encodeURIComponent(id)}`);
  }

  consensus(id: string, minSupport: number): Promise<ConsensusPayload> {
    const doc = encodeURIComponent(id);
    return this.getJson(`/api/consensus/${doc}?min_support=${minSupport}`);
  }

  progress(annotator: string): Promise<ProgressPayload> {
    return this.getJson(`/api/progress/${encodeURIComponent(annotator)}`);
  }

  async postAnnotation(body: AnnotationBody): Promise<void> {
    const response = await fetch(this.base + "/api/annotations", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) await parseError(response);
    await response.json();
  }
}
