// HTTP client for the structforge session API.

import type {
  AdjudicationPayload,
  CatalogClass,
  HintsPayload,
  MovePayload,
  NewSessionRequest,
  OracleCatalog,
  SessionView,
} from "./types.js";

export class ApiError extends Error {
  status: number;
  reason: string;

  constructor(status: number, reason: string, message: string) {
    super(message);
    this.status = status;
    this.reason = reason;
  }
}

async function refusal(res: Response): Promise<ApiError> {
  let reason = "error";
  let message = res.statusText || `request failed with ${res.status}`;
  try {
    const body = await res.json();
    const detail = body?.detail;
    if (detail && typeof detail === "object" && !Array.isArray(detail)) {
      reason = String(detail.reason ?? reason);
      message = String(detail.message ?? message);
    } else if (detail !== undefined) {
      message = JSON.stringify(detail);
    }
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(res.status, reason, message);
}

export class ForgeClient {
  private baseUrl: string;

  constructor(baseUrl: string = "http://127.0.0.1:8431") {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async get<T>(path: string): Promise<T> {
    const res = await fetch(`${this.baseUrl}${path}`);
    if (!res.ok) throw await refusal(res);
    return res.json() as Promise<T>;
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const res = await fetch(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!res.ok) throw await refusal(res);
    return res.json() as Promise<T>;
  }

  createSession(req: NewSessionRequest): Promise<SessionView> {
    return this.post("/sessions", req);
  }

  getSession(id: string): Promise<SessionView> {
    return this.get(`/sessions/${encodeURIComponent(id)}`);
  }

  postMove(id: string, payload: MovePayload): Promise<SessionView> {
    return this.post(`/sessions/${encodeURIComponent(id)}/moves`, payload);
  }

  getHints(id: string, growth?: number): Promise<HintsPayload> {
    const query = growth === undefined ? "" : `?growth=${growth}`;
    return this.get(`/sessions/${encodeURIComponent(id)}/hints${query}`);
  }

  getAdjudication(id: string): Promise<AdjudicationPayload> {
    return this.get(`/sessions/${encodeURIComponent(id)}/adjudication`);
  }

  async listClasses(): Promise<CatalogClass[]> {
    const data = await this.get<{ classes: CatalogClass[] }>("/catalog/classes");
    return data.classes;
  }

  listOracles(): Promise<OracleCatalog> {
    return this.get("/catalog/oracles");
  }
}
