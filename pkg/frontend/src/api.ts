// Typed client for the itelint HTTP API. The dashboard performs no detection
// math: every number it shows comes out of these calls, and the raw response
// text is kept around so displayed data can be audited byte-for-byte against
// the CLI's JSON output.

export interface ParamSpec {
  name: string;
  type: "int" | "float" | "duration_days" | "string" | "string_list" | "bool";
  default: unknown;
  description: string;
}

export interface DetectorSpec {
  id: string;
  bp_ids: string[];
  scope: "Issue" | "ITS";
  enabled_default: boolean;
  description: string;
  params: ParamSpec[];
}

export interface DetectorSettings {
  enabled?: boolean;
  weight?: number;
  params?: Record<string, unknown>;
}

export interface LayerDoc {
  kind: string;
  scope: string;
  detectors: Record<string, DetectorSettings>;
}

export interface LayerEnvelope {
  layer: LayerDoc;
  version: string | null;
}

export interface LayerProblem {
  detector: string;
  key: string;
  problem: string;
}

export interface RateCell {
  detector_id: string;
  repo: string;
  project: string;
  applicable: number;
  not_applicable: number;
  violating_issues: number;
  violations: number;
  rate: number | null;
}

export interface BoxStats {
  median: number;
  q1: number;
  q3: number;
  lower_whisker: number;
  upper_whisker: number;
  n: number;
}

export interface ProjectsPayload {
  as_of: string | null;
  evaluated_at: string;
  config_fingerprint: string;
  detector_params: Record<string, Record<string, unknown>>;
  cells: RateCell[];
  cross_project: Record<string, BoxStats>;
}

export interface ScorePayload {
  score: number | null;
  contributions: Array<{
    detector_id: string;
    weight: number;
    rate: number | null;
    applicable: number;
  }>;
}

export interface TrendPoint {
  date: string;
  score: number | null;
  rates: Record<string, number | null>;
  violations: number;
}

export interface HealthRow {
  detector_id: string;
  status: "ok" | "violation" | "not_applicable" | "disabled";
  explanation: string;
}

export interface IssueHealthPayload {
  issue_key: string;
  rows: HealthRow[];
}

export interface RunFilters {
  project?: string;
  team?: string;
  sprint?: string;
  individual?: string;
}

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
    readonly body: unknown,
  ) {
    super(message);
  }
}

export class ConflictError extends ApiError {
  constructor(readonly currentVersion: string | null, body: unknown) {
    super("version conflict", 409, body);
  }
}

export class ValidationError extends ApiError {
  constructor(readonly problems: LayerProblem[], body: unknown) {
    super("invalid layer", 422, body);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetchImpl(this.base + path, init);
    if (response.status === 409) {
      const body = await response.json();
      throw new ConflictError(body.current_version ?? null, body);
    }
    if (response.status === 422) {
      const body = await response.json();
      throw new ValidationError(body.problems ?? [], body);
    }
    if (!response.ok) {
      throw new ApiError(`${init?.method ?? "GET"} ${path} -> ${response.status}`,
        response.status, await response.text());
    }
    return response;
  }

  async detectors(): Promise<DetectorSpec[]> {
    return (await this.request("/detectors")).json();
  }

  async getLayer(kind: string, scope: string): Promise<LayerEnvelope> {
    return (await this.request(`/config/${kind}/${scope}`)).json();
  }

  async putLayer(
    kind: string,
    scope: string,
    layer: LayerDoc,
    version: string | null,
  ): Promise<LayerEnvelope> {
    const response = await this.request(`/config/${kind}/${scope}`, {
      method: "PUT",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ layer, version }),
    });
    return response.json();
  }

  async startRun(filters: RunFilters, asOf?: string): Promise<string> {
    const body: Record<string, unknown> = { filters };
    if (asOf) body.as_of = asOf;
    const response = await this.request("/runs", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    return (await response.json()).run_id;
  }

  /** Projects payload plus the exact bytes the service sent. */
  async runProjects(runId: string): Promise<{ payload: ProjectsPayload; raw: string }> {
    const response = await this.request(`/runs/${runId}/projects`);
    const raw = await response.text();
    return { payload: JSON.parse(raw), raw };
  }

  async runScore(runId: string): Promise<ScorePayload> {
    return (await this.request(`/runs/${runId}/score`)).json();
  }

  async trends(from: string, to: string, step: number, project?: string): Promise<TrendPoint[]> {
    const params = new URLSearchParams({ from, to, step: String(step) });
    if (project) params.set("project", project);
    return (await this.request(`/trends?${params}`)).json();
  }

  async issueHealth(key: string, asOf?: string): Promise<IssueHealthPayload> {
    const suffix = asOf ? `?as_of=${encodeURIComponent(asOf)}` : "";
    return (await this.request(`/issues/${encodeURIComponent(key)}/health${suffix}`)).json();
  }
}
