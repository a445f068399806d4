// Browser wiring: a config editor for one layer and the health dashboard,
// side by side, talking to the itelint service on the same origin.

import { ApiClient } from "./api.js";
import { ConfigEditor } from "./configEditor.js";
import { Dashboard, Filters } from "./dashboard.js";
import { renderConfigEditor, renderDashboard, renderIssueHealth } from "./render.js";

const client = new ApiClient("");
const editor = new ConfigEditor(client, "organisation", "default");
const dashboard = new Dashboard(client);

const filters: Filters = {};

function repaint(): void {
  const configMount = document.getElementById("config");
  const dashMount = document.getElementById("dashboard");
  if (configMount) {
    configMount.replaceChildren(renderConfigEditor(editor, repaint));
  }
  if (dashMount) {
    dashMount.replaceChildren(
      renderDashboard(
        dashboard.view,
        (key) => {
          void dashboard.openIssue(key).then((rows) => {
            const drill = document.getElementById("issue");
            if (drill) drill.replaceChildren(renderIssueHealth(key, rows));
          });
        },
        () => {
          void dashboard.retry(filters).then(repaint);
        },
      ),
    );
  }
}

async function boot(): Promise<void> {
  const projectInput = document.getElementById("filter-project") as HTMLInputElement | null;
  projectInput?.addEventListener("change", () => {
    filters.project = projectInput.value || undefined;
    void dashboard.explore(filters).then(repaint);
  });
  await editor.load();
  await dashboard.explore(filters);
  repaint();
}

void boot();
