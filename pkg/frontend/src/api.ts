// Typed client for the guide service. Every view the console renders is
// rebuilt from GET /v1/sessions/{id}; the POST responses only carry the
// transient deviation warning.

export interface Advice {
  type: 'auscultate' | 'declare';
  point?: number;
  label?: number;
  alarm?: boolean;
  q_values: number[];
}

export interface HistoryEntry {
  type: 'observation' | 'declaration';
  point?: number;
  features?: number[];
  advised?: number | null;
  deviated?: boolean;
  label?: number;
  alarm?: boolean;
  q_values?: number[];
}

export interface SessionDocument {
  session_id: string;
  model_id: string;
  status: string;
  state: number[][];
  auscultation_count: number;
  history: HistoryEntry[];
  advice: Advice | null;
}

export interface SessionCreated {
  session_id: string;
  status: string;
  advice: Advice | null;
}

export interface SubmitResponse {
  advice: Advice | null;
  status: string;
  warning: string | null;
}

export interface ModelInfo {
  model_id: string;
  layer_sizes: number[];
  metadata: Record<string, unknown>;
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

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ExamApi {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { 'content-type': 'application/json' };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchImpl(this.baseUrl + path, init);
    if (response.status === 204) {
      return undefined as T;
    }
    if (!response.ok) {
      let code = 'unknown';
      let message = `${response.status}`;
      try {
        const payload = await response.json();
        code = payload.code ?? code;
        message = payload.message ?? message;
      } catch {
        // non-JSON error body, keep the status text
      }
      throw new ApiError(response.status, code, message);
    }
    return response.json() as Promise<T>;
  }

  listModels(): Promise<{ models: ModelInfo[] }> {
    return this.request('GET', '/v1/models');
  }

  createSession(modelId?: string): Promise<SessionCreated> {
    return this.request('POST', '/v1/sessions', modelId ? { model_id: modelId } : {});
  }

  getSession(sessionId: string): Promise<SessionDocument> {
    return this.request('GET', `/v1/sessions/${sessionId}`);
  }

  submitObservation(sessionId: string, point: number, features: number[]): Promise<SubmitResponse> {
    return this.request('POST', `/v1/sessions/${sessionId}/observations`, { point, features });
  }

  submitRaster(sessionId: string, point: number, raster: object): Promise<SubmitResponse> {
    return this.request('POST', `/v1/sessions/${sessionId}/rasters`, { point, raster });
  }

  closeSession(sessionId: string): Promise<void> {
    return this.request('DELETE', `/v1/sessions/${sessionId}`);
  }
}
