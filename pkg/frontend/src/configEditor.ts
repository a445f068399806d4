// State machine behind the per-layer configuration screen: one row per
// registered detector with an active toggle, typed settings inputs, and a
// weight selector. Saving is a PUT carrying the layer's version token; a 422
// report lands inline on the offending rows, a 409 flips the editor into a
// reload-and-merge prompt. Saving stays disabled while any input is invalid.

import {
  ApiClient,
  ConflictError,
  DetectorSettings,
  DetectorSpec,
  LayerDoc,
  ValidationError,
} from "./api.js";
import { WEIGHT_MAX, WEIGHT_MIN } from "./weightBands.js";

export interface RowState {
  id: string;
  description: string;
  /** toggle as shown; layer value when set, registry default otherwise */
  active: boolean;
  /** weight as shown; null means inherited (no explicit layer value) */
  weight: number | null;
  /** raw input strings per param name, only for params the layer sets */
  paramInputs: Record<string, string>;
  /** field name -> inline error, from local validation or the 422 report */
  errors: Record<string, string>;
  /** keys explicitly set in the layer being edited */
  touched: Set<string>;
}

export type EditorStatus = "editing" | "saving" | "saved" | "conflict" | "error";

function parseParam(spec: DetectorSpec, name: string, raw: string): { value?: unknown; error?: string } {
  const param = spec.params.find((p) => p.name === name);
  if (!param) return { error: "unknown param" };
  const text = raw.trim();
  switch (param.type) {
    case "bool":
      if (text === "true") return { value: true };
      if (text === "false") return { value: false };
      return { error: "expected true or false" };
    case "int": {
      const n = Number(text);
      if (!Number.isInteger(n) || text === "") return { error: "expected an integer" };
      return { value: n };
    }
    case "float":
    case "duration_days": {
      const n = Number(text);
      if (Number.isNaN(n) || text === "") return { error: "expected a number" };
      return { value: n };
    }
    case "string":
      return { value: text };
    case "string_list":
      return { value: text === "" ? [] : text.split(",").map((s) => s.trim()) };
  }
}

export class ConfigEditor {
  rows: RowState[] = [];
  dirty = false;
  status: EditorStatus = "editing";
  version: string | null = null;
  conflictVersion: string | null = null;

  private specs = new Map<string, DetectorSpec>();

  constructor(
    private readonly client: ApiClient,
    readonly kind: string,
    readonly scope: string,
  ) {}

  async load(): Promise<void> {
    const [detectors, envelope] = await Promise.all([
      this.client.detectors(),
      this.client.getLayer(this.kind, this.scope),
    ]);
    this.specs = new Map(detectors.map((d) => [d.id, d]));
    this.version = envelope.version;
    this.rows = detectors.map((spec) => this.rowFrom(spec, envelope.layer.detectors[spec.id]));
    this.dirty = false;
    this.status = "editing";
    this.conflictVersion = null;
  }

  private rowFrom(spec: DetectorSpec, settings: DetectorSettings | undefined): RowState {
    const touched = new Set<string>();
    const paramInputs: Record<string, string> = {};
    if (settings?.enabled !== undefined) touched.add("enabled");
    if (settings?.weight !== undefined) touched.add("weight");
    for (const [name, value] of Object.entries(settings?.params ?? {})) {
      touched.add(`params.${name}`);
      paramInputs[name] = Array.isArray(value) ? value.join(", ") : String(value);
    }
    return {
      id: spec.id,
      description: spec.description,
      active: settings?.enabled ?? spec.enabled_default,
      weight: settings?.weight ?? null,
      paramInputs,
      errors: {},
      touched,
    };
  }

  private row(id: string): RowState {
    const row = this.rows.find((r) => r.id === id);
    if (!row) throw new Error(`no detector row ${id}`);
    return row;
  }

  toggle(id: string, active: boolean): void {
    const row = this.row(id);
    row.active = active;
    row.touched.add("enabled");
    this.dirty = true;
    this.status = "editing";
  }

  setWeight(id: string, weight: number): void {
    const row = this.row(id);
    row.weight = weight;
    row.touched.add("weight");
    if (!Number.isInteger(weight) || weight < WEIGHT_MIN || weight > WEIGHT_MAX) {
      row.errors.weight = `weight must be an integer in [${WEIGHT_MIN}, ${WEIGHT_MAX}]`;
    } else {
      delete row.errors.weight;
    }
    this.dirty = true;
    this.status = "editing";
  }

  setParam(id: string, name: string, raw: string): void {
    const row = this.row(id);
    const spec = this.specs.get(id);
    row.paramInputs[name] = raw;
    row.touched.add(`params.${name}`);
    const parsed = spec ? parseParam(spec, name, raw) : { error: "unknown detector" };
    if (parsed.error) {
      row.errors[`params.${name}`] = parsed.error;
    } else {
      delete row.errors[`params.${name}`];
    }
    this.dirty = true;
    this.status = "editing";
  }

  get valid(): boolean {
    return this.rows.every((row) => Object.keys(row.errors).length === 0);
  }

  get canSave(): boolean {
    return this.dirty && this.valid && this.status !== "saving" && this.status !== "conflict";
  }

  /** The partial layer document: only explicitly-set keys participate. */
  layerDoc(): LayerDoc {
    const detectors: Record<string, DetectorSettings> = {};
    for (const row of this.rows) {
      const entry: DetectorSettings = {};
      if (row.touched.has("enabled")) entry.enabled = row.active;
      if (row.touched.has("weight") && row.weight !== null) entry.weight = row.weight;
      const params: Record<string, unknown> = {};
      const spec = this.specs.get(row.id);
      for (const key of row.touched) {
        if (!key.startsWith("params.")) continue;
        const name = key.slice("params.".length);
        const parsed = spec ? parseParam(spec, name, row.paramInputs[name] ?? "") : {};
        if (parsed.value !== undefined) params[name] = parsed.value;
      }
      if (Object.keys(params).length > 0) entry.params = params;
      if (Object.keys(entry).length > 0) detectors[row.id] = entry;
    }
    return { kind: this.kind, scope: this.scope, detectors };
  }

  async save(): Promise<boolean> {
    if (!this.canSave) return false;
    this.status = "saving";
    try {
      const envelope = await this.client.putLayer(
        this.kind, this.scope, this.layerDoc(), this.version,
      );
      this.version = envelope.version;
      this.dirty = false;
      this.status = "saved";
      return true;
    } catch (error) {
      if (error instanceof ValidationError) {
        for (const problem of error.problems) {
          const row = this.rows.find((r) => r.id === problem.detector);
          if (row) row.errors[problem.key || "detector"] = problem.problem;
        }
        this.status = "editing";
        return false;
      }
      if (error instanceof ConflictError) {
        this.status = "conflict";
        this.conflictVersion = error.currentVersion;
        return false;
      }
      this.status = "error";
      throw error;
    }
  }

  /** After a 409: refetch the layer, then re-apply the local edits on top. */
  async reloadAndMerge(): Promise<void> {
    const edited = this.layerDoc();
    await this.load();
    for (const [id, entry] of Object.entries(edited.detectors)) {
      if (entry.enabled !== undefined) this.toggle(id, entry.enabled);
      if (entry.weight !== undefined) this.setWeight(id, entry.weight);
      for (const [name, value] of Object.entries(entry.params ?? {})) {
        this.setParam(id, name, Array.isArray(value) ? value.join(", ") : String(value));
      }
    }
  }
}
