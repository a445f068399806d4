// View-model behind the health dashboard: filters in, fetched numbers out.
// Everything displayed is taken verbatim from service responses; the raw
// projects JSON is retained so it can be audited against the CLI output.
// Trends are first-class: the score is shown, but the series drives the view.

import {
  ApiClient,
  BoxStats,
  DetectorSpec,
  HealthRow,
  ProjectsPayload,
  ScorePayload,
  TrendPoint,
} from "./api.js";

export interface Filters {
  project?: string;
  theme?: "Requirements" | "Development" | "Maintenance" | "UserSupport";
  from?: string;
  to?: string;
  stepDays?: number;
}

export interface RateRow {
  detectorId: string;
  repo: string;
  project: string;
  applicable: number;
  violating: number;
  rateDisplay: string; // "12.5%" or "n/a"
  spread: BoxStats | null;
}

export interface DashboardViewModel {
  status: "loading" | "ready" | "empty" | "error";
  /** formatted score, or the explicit no-evidence state */
  scoreDisplay: string;
  scoreValue: number | null;
  trend: TrendPoint[];
  rateRows: RateRow[];
  rawProjectsJson: string;
  errorMessage?: string;
}

// Display-side grouping of detectors by the activity theme of their default
// applicability. Pure filtering of which rows are shown; no detection math.
const THEME_CODES: Record<string, string[]> = {
  Requirements: ["Epic", "Story", "NewFeature", "FeatureRequest", "ImprovementSuggestion"],
  Development: ["Task", "SubTask", "QualityAssurance", "Documentation"],
  Maintenance: ["BugReport", "LegacyUpgrade", "ContinuousIntegration"],
  UserSupport: ["UserSupport"],
};

export function detectorMatchesTheme(spec: DetectorSpec, theme: string): boolean {
  const appliesTo = spec.params.find((p) => p.name === "applies_to");
  const codes = (appliesTo?.default as string[] | undefined) ?? ["All"];
  if (codes.includes("All")) return true;
  const themed = THEME_CODES[theme] ?? [];
  return codes.some((code) => themed.includes(code));
}

export function formatRate(rate: number | null): string {
  return rate === null ? "n/a" : `${(rate * 100).toFixed(1)}%`;
}

export function formatScore(score: number | null): string {
  return score === null ? "no applicable issues" : score.toFixed(1);
}

export class Dashboard {
  view: DashboardViewModel = {
    status: "loading",
    scoreDisplay: "",
    scoreValue: null,
    trend: [],
    rateRows: [],
    rawProjectsJson: "",
  };

  private specs: DetectorSpec[] = [];

  constructor(private readonly client: ApiClient) {}

  async explore(filters: Filters): Promise<DashboardViewModel> {
    this.view = { ...this.view, status: "loading" };
    try {
      if (this.specs.length === 0) {
        this.specs = await this.client.detectors();
      }
      const runId = await this.client.startRun(
        filters.project ? { project: filters.project } : {},
      );
      const [{ payload, raw }, score] = await Promise.all([
        this.client.runProjects(runId),
        this.client.runScore(runId),
      ]);
      let trend: TrendPoint[] = [];
      if (filters.from && filters.to) {
        trend = await this.client.trends(
          filters.from, filters.to, filters.stepDays ?? 7, filters.project,
        );
      }
      this.view = this.buildView(payload, score, trend, raw, filters);
    } catch (error) {
      this.view = {
        ...this.view,
        status: "error",
        errorMessage: error instanceof Error ? error.message : String(error),
      };
    }
    return this.view;
  }

  /** Retry hook for the offline/error state. */
  retry(filters: Filters): Promise<DashboardViewModel> {
    return this.explore(filters);
  }

  private buildView(
    payload: ProjectsPayload,
    score: ScorePayload,
    trend: TrendPoint[],
    raw: string,
    filters: Filters,
  ): DashboardViewModel {
    const byId = new Map(this.specs.map((s) => [s.id, s]));
    const rows: RateRow[] = [];
    for (const cell of payload.cells) {
      if (filters.theme) {
        const spec = byId.get(cell.detector_id);
        if (spec && !detectorMatchesTheme(spec, filters.theme)) continue;
      }
      rows.push({
        detectorId: cell.detector_id,
        repo: cell.repo,
        project: cell.project,
        applicable: cell.applicable,
        violating: cell.violating_issues,
        rateDisplay: formatRate(cell.rate),
        spread: payload.cross_project[cell.detector_id] ?? null,
      });
    }
    const anyApplicable = payload.cells.some((c) => c.applicable > 0);
    return {
      status: anyApplicable ? "ready" : "empty",
      scoreDisplay: formatScore(score.score),
      scoreValue: score.score,
      trend,
      rateRows: rows,
      rawProjectsJson: raw,
    };
  }

  async openIssue(key: string): Promise<HealthRow[]> {
    // rows are rendered verbatim: Property / Status / Explanation
    const payload = await this.client.issueHealth(key);
    return payload.rows;
  }
}
