/**
 * HTTP client for the tag service. All authority lives server-side: this
 * module only shapes requests and decodes the error envelope.
 */

export interface ApiConfig {
  baseUrl: string;
  token?: string;
}

export interface TagListing {
  path: string;
  kind: string;
}

/** Opaque values inside multi-tag query results. */
export interface OpaqueEnvelope {
  mime: string;
  base64: string;
}

export type WireValue = number | string | boolean | null | string[] | OpaqueEnvelope;

export interface QueryResponse {
  ids: string[];
  results?: Record<string, Record<string, WireValue>>;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

export function isOpaqueEnvelope(value: WireValue): value is OpaqueEnvelope {
  return (
    typeof value === "object" &&
    value !== null &&
    !Array.isArray(value) &&
    "mime" in value &&
    "base64" in value
  );
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private fetchFn: FetchLike;

  constructor(
    private config: ApiConfig,
    fetchFn?: FetchLike,
  ) {
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  tagUrl(objectId: string, tagPath: string): string {
    const encoded = tagPath.split("/").map(encodeURIComponent).join("/");
    return `${this.config.baseUrl}/objects/${encodeURIComponent(objectId)}/${encoded}`;
  }

  private headers(extra?: Record<string, string>): Record<string, string> {
    const headers: Record<string, string> = { ...extra };
    if (this.config.token) {
      headers["Authorization"] = `Bearer ${this.config.token}`;
    }
    return headers;
  }

  private async request(url: string, init: RequestInit = {}): Promise<Response> {
    const response = await this.fetchFn(url, {
      ...init,
      headers: { ...this.headers(), ...(init.headers as Record<string, string>) },
    });
    if (!response.ok) {
      let code = "http-error";
      let message = `${response.status}`;
      try {
        const body = await response.json();
        code = body.error ?? code;
        message = body.message ?? message;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(response.status, code, message);
    }
    return response;
  }

  async healthz(): Promise<boolean> {
    const response = await this.request(`${this.config.baseUrl}/healthz`);
    return (await response.json()).status === "ok";
  }

  async query(text: string, tags?: string[]): Promise<QueryResponse> {
    const params = new URLSearchParams({ query: text });
    if (tags && tags.length > 0) {
      params.set("tags", tags.join(","));
    }
    const response = await this.request(`${this.config.baseUrl}/objects?${params}`);
    return response.json();
  }

  async listTags(objectId: string): Promise<TagListing[]> {
    const response = await this.request(
      `${this.config.baseUrl}/objects/${encodeURIComponent(objectId)}`,
    );
    return (await response.json()).tags;
  }

  /** Primitive values come back as JSON text; callers parse as needed. */
  async getTagText(objectId: string, tagPath: string): Promise<string> {
    const response = await this.request(this.tagUrl(objectId, tagPath));
    return response.text();
  }

  async putTagJson(objectId: string, tagPath: string, value: unknown): Promise<void> {
    await this.request(this.tagUrl(objectId, tagPath), {
      method: "PUT",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(value),
    });
  }

  async putTagOpaque(objectId: string, tagPath: string, body: Blob): Promise<void> {
    await this.request(this.tagUrl(objectId, tagPath), {
      method: "PUT",
      headers: { "Content-Type": body.type || "application/octet-stream" },
      body,
    });
  }

  async deleteTag(objectId: string, tagPath: string): Promise<void> {
    await this.request(this.tagUrl(objectId, tagPath), { method: "DELETE" });
  }
}
