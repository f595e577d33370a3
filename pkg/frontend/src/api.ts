/** Typed client for the questionnaire service. The UI carries no tree
 * logic: every prompt, option, and field requirement comes from these
 * responses. */

export type FieldType = "text" | "url" | "path" | "version" | "keyvalue";

export interface PromptOption {
  id: string;
  label: string;
}

export interface Requirement {
  id: string;
  type: FieldType;
  required: boolean;
  hint: string;
  filled: boolean;
  value: string | Record<string, string> | null;
}

export interface QuestionPrompt {
  kind: "question";
  node_id: string;
  prompt: string;
  options: PromptOption[];
}

export interface LeafPrompt {
  kind: "leaf";
  node_id: string;
  outcome: string;
  prescription: string;
  requirements: Requirement[];
}

export type Prompt = QuestionPrompt | LeafPrompt;

export interface Snapshot {
  prompt: Prompt;
  path: [string, string][];
  complete: boolean;
}

export interface CreatedSession {
  session_id: string;
  prompt: Prompt;
}

export interface FieldFailure {
  field: string;
  code: string;
  message: string;
}

export interface Finding {
  severity: "error" | "warning" | "info";
  code: string;
  message: string;
  location: string;
}

export interface ValidationResult {
  clean: boolean;
  findings: Finding[];
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly fieldErrors: FieldFailure[] = [],
  ) {
    super(message);
  }

  get sessionGone(): boolean {
    return this.code === "E_SESSION_EXPIRED" || this.code === "E_SESSION_NOT_FOUND";
  }
}

type FetchLike = typeof fetch;

/** What the wizard needs from the service; ApiClient is the real thing,
 * tests substitute fakes. */
export interface QuestionnaireApi {
  createSession(): Promise<CreatedSession>;
  getSession(sessionId: string): Promise<Snapshot>;
  answer(sessionId: string, answerId: string): Promise<Snapshot>;
  undo(sessionId: string): Promise<Snapshot>;
  putFields(
    sessionId: string,
    fields: Record<string, string | Record<string, string>>,
  ): Promise<{ complete: boolean; missing: string[] }>;
  manifestText(sessionId: string): Promise<string>;
  validateManifest(manifestText: string): Promise<ValidationResult>;
}

export class ApiClient implements QuestionnaireApi {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = globalThis.fetch.bind(globalThis),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    if (response.ok) {
      return response;
    }
    let code = "E_HTTP";
    let message = `${response.status} ${response.statusText}`;
    let fieldErrors: FieldFailure[] = [];
    try {
      const body = await response.json();
      if (typeof body.code === "string") code = body.code;
      if (typeof body.message === "string") message = body.message;
      if (Array.isArray(body.errors)) fieldErrors = body.errors;
    } catch {
      // non-JSON error body; keep the status line
    }
    throw new ApiError(response.status, code, message, fieldErrors);
  }

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.request(path, init);
    return (await response.json()) as T;
  }

  createSession(): Promise<CreatedSession> {
    return this.json<CreatedSession>("/api/sessions", { method: "POST" });
  }

  getSession(sessionId: string): Promise<Snapshot> {
    return this.json<Snapshot>(`/api/sessions/${sessionId}`);
  }

  answer(sessionId: string, answerId: string): Promise<Snapshot> {
    return this.json<Snapshot>(`/api/sessions/${sessionId}/answer`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ answer_id: answerId }),
    });
  }

  undo(sessionId: string): Promise<Snapshot> {
    return this.json<Snapshot>(`/api/sessions/${sessionId}/undo`, {
      method: "POST",
    });
  }

  putFields(
    sessionId: string,
    fields: Record<string, string | Record<string, string>>,
  ): Promise<{ complete: boolean; missing: string[] }> {
    return this.json(`/api/sessions/${sessionId}/fields`, {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(fields),
    });
  }

  /** Manifest as raw text so the downloaded file is byte-identical to the
   * server's response. */
  async manifestText(sessionId: string): Promise<string> {
    const response = await this.request(`/api/sessions/${sessionId}/manifest`);
    return await response.text();
  }

  validateManifest(manifestText: string): Promise<ValidationResult> {
    return this.json<ValidationResult>("/api/validate", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: manifestText,
    });
  }
}
