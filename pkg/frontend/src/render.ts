// DOM rendering for the two screens. Kept deliberately thin: all state and
// decisions live in ConfigEditor and Dashboard; this module only paints them.

import { HealthRow } from "./api.js";
import { ConfigEditor } from "./configEditor.js";
import { DashboardViewModel } from "./dashboard.js";
import { weightLabel } from "./weightBands.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderConfigEditor(editor: ConfigEditor, onChange: () => void): HTMLElement {
  const root = el("section", { class: "config-editor" });
  root.append(el("h2", {}, `Configuration: ${editor.kind}/${editor.scope}`));

  if (editor.status === "conflict") {
    const banner = el("div", { class: "banner conflict" },
      "Someone else changed this layer. ");
    const reload = el("button", {}, "Reload and merge");
    reload.addEventListener("click", () => {
      void editor.reloadAndMerge().then(onChange);
    });
    banner.append(reload);
    root.append(banner);
  }

  const table = el("table");
  const head = el("tr");
  for (const title of ["Best practice violation", "Active", "Settings", "Weighting"]) {
    head.append(el("th", {}, title));
  }
  table.append(head);

  for (const row of editor.rows) {
    const tr = el("tr", { "data-detector": row.id });
    tr.append(el("td", {}, row.description || row.id));

    const toggleCell = el("td");
    const toggle = el("input", { type: "checkbox" });
    toggle.checked = row.active;
    toggle.addEventListener("change", () => {
      editor.toggle(row.id, toggle.checked);
      onChange();
    });
    toggleCell.append(toggle);
    tr.append(toggleCell);

    const settingsCell = el("td");
    for (const [name, value] of Object.entries(row.paramInputs)) {
      const input = el("input", { type: "text", "data-param": name });
      input.value = value;
      input.addEventListener("input", () => {
        editor.setParam(row.id, name, input.value);
        onChange();
      });
      settingsCell.append(el("label", {}, `${name} `), input);
      const error = row.errors[`params.${name}`];
      if (error) settingsCell.append(el("span", { class: "error" }, error));
    }
    tr.append(settingsCell);

    const weightCell = el("td");
    const weight = el("input", { type: "number", min: "1", max: "12" });
    if (row.weight !== null) weight.value = String(row.weight);
    weight.addEventListener("input", () => {
      editor.setWeight(row.id, Number(weight.value));
      onChange();
    });
    weightCell.append(weight);
    if (row.weight !== null) weightCell.append(el("span", { class: "band" }, weightLabel(row.weight)));
    if (row.errors.weight) weightCell.append(el("span", { class: "error" }, row.errors.weight));
    tr.append(weightCell);
    table.append(tr);
  }
  root.append(table);

  const save = el("button", { class: "save" }, editor.status === "saving" ? "Saving…" : "Save");
  save.disabled = !editor.canSave;
  save.addEventListener("click", () => {
    void editor.save().then(onChange);
  });
  root.append(save);
  return root;
}

export function renderDashboard(
  view: DashboardViewModel,
  onIssue: (key: string) => void,
  onRetry: () => void,
): HTMLElement {
  const root = el("section", { class: "dashboard" });

  if (view.status === "error") {
    const banner = el("div", { class: "banner error" },
      `Service unreachable: ${view.errorMessage ?? "unknown error"}. `);
    const retry = el("button", {}, "Retry");
    retry.addEventListener("click", onRetry);
    banner.append(retry);
    root.append(banner);
    return root;
  }

  const scoreBox = el("div", { class: "score" });
  scoreBox.append(el("h2", {}, "Health"));
  scoreBox.append(el("strong", { class: "score-value" }, view.scoreDisplay));
  root.append(scoreBox);

  const trendBox = el("div", { class: "trend" });
  trendBox.append(el("h3", {}, "Trend"));
  if (view.trend.length === 0) {
    trendBox.append(el("p", {}, "pick a date range to see the trend"));
  } else {
    const list = el("ul");
    for (const point of view.trend) {
      list.append(el("li", {},
        `${point.date.slice(0, 10)}: ${point.score === null ? "n/a" : point.score.toFixed(1)}`));
    }
    trendBox.append(list);
  }
  root.append(trendBox);

  const table = el("table", { class: "rates" });
  const head = el("tr");
  for (const title of ["Detector", "Repo", "Project", "Applicable", "Violating", "Rate", "Median across projects"]) {
    head.append(el("th", {}, title));
  }
  table.append(head);
  for (const row of view.rateRows) {
    const tr = el("tr");
    tr.append(el("td", {}, row.detectorId));
    tr.append(el("td", {}, row.repo));
    const projectCell = el("td");
    const link = el("a", { href: "#" }, row.project);
    link.addEventListener("click", (event) => {
      event.preventDefault();
      onIssue(row.project);
    });
    projectCell.append(link);
    tr.append(projectCell);
    tr.append(el("td", {}, String(row.applicable)));
    tr.append(el("td", {}, String(row.violating)));
    tr.append(el("td", {}, row.rateDisplay));
    tr.append(el("td", {}, row.spread ? (row.spread.median * 100).toFixed(1) + "%" : "n/a"));
    table.append(tr);
  }
  root.append(table);
  return root;
}

export function renderIssueHealth(key: string, rows: HealthRow[]): HTMLElement {
  const root = el("section", { class: "issue-health" });
  root.append(el("h3", {}, `Issue Health: ${key}`));
  const table = el("table");
  const head = el("tr");
  for (const title of ["Property", "Status", "Explanation"]) head.append(el("th", {}, title));
  table.append(head);
  for (const row of rows) {
    const tr = el("tr", { class: `status-${row.status}` });
    tr.append(el("td", {}, row.detector_id));
    tr.append(el("td", {}, row.status));
    tr.append(el("td", {}, row.explanation));
    table.append(tr);
  }
  root.append(table);
  return root;
}
