import { ApiClient } from "./api.js";
import { JudgingController } from "./judging.js";
import { buildHeatmap, itemCount, queueFromReport } from "./moderation.js";
import { renderHeatmap, renderNext, renderQueue } from "./render.js";

/**
 * Page glue.  The query string selects the assessment and role:
 *
 *   judge.html?service=http://localhost:8440&assessment=abc123
 *   moderate.html?service=...&assessment=...&token=...&threshold=50
 *
 * All truth lives on the service; every mutation is followed by a
 * refetch, and a reload rebuilds the exact same view.
 */
class JudgeUi {
  private readonly api: ApiClient;
  private readonly assessmentId: string;
  private readonly threshold: number;
  private controller: JudgingController;

  constructor(private readonly root: HTMLElement) {
    const params = new URLSearchParams(window.location.search);
    const service = params.get("service") ?? "http://localhost:8440";
    const assessment = params.get("assessment");
    if (!assessment) {
      throw new Error("missing ?assessment=<id> in the page URL");
    }
    this.assessmentId = assessment;
    this.threshold = Number(params.get("threshold") ?? "50");
    this.api = new ApiClient(service, params.get("token") ?? undefined);
    this.controller = new JudgingController(this.api, this.assessmentId);
  }

  async startJudging(): Promise<void> {
    await this.controller.refresh();
    this.paintJudging();
  }

  private paintJudging(): void {
    const doc = this.controller.view;
    if (!doc) return;
    this.root.innerHTML = renderNext(doc, (criterion) =>
      this.controller.selectionFor(criterion),
    );
    for (const button of this.root.querySelectorAll<HTMLButtonElement>(
      "button[data-criterion]",
    )) {
      button.addEventListener("click", () => {
        this.controller.select(
          Number(button.dataset.criterion),
          Number(button.dataset.winner),
        );
        this.paintJudging();
      });
    }
    const submit = this.root.querySelector<HTMLButtonElement>("#submit");
    submit?.addEventListener("click", () => {
      void this.controller.submit().then(() => this.paintJudging());
    });
  }

  async startModerating(): Promise<void> {
    const report = await this.api.report(this.assessmentId);
    const grid = buildHeatmap(
      report.reliability.pairs,
      itemCount(report),
      0,
      this.threshold,
    );
    const queue = queueFromReport(report);
    this.root.innerHTML = `
      <div class="moderation">
        ${renderHeatmap(grid)}
        ${renderQueue(queue)}
      </div>`;
    for (const row of this.root.querySelectorAll<HTMLTableRowElement>(
      "tr[data-i]",
    )) {
      row
        .querySelector<HTMLButtonElement>("button.intervene")
        ?.addEventListener("click", () => {
          const i = Number(row.dataset.i);
          const j = Number(row.dataset.j);
          const d = Number(row.dataset.d);
          const winner = window.prompt(
            `Pair (${i}, ${j}), criterion ${d}: id of the better item?`,
          );
          if (winner === null) return;
          void this.api
            .moderate(this.assessmentId, {
              pair: [i, j],
              criterion: d,
              chosen_winner: Number(winner),
            })
            .then(() => this.startModerating());
        });
    }
  }
}

if (typeof document !== "undefined") {
  const root = document.getElementById("app");
  if (root) {
    const ui = new JudgeUi(root);
    const flow = root.dataset.view === "moderation"
      ? ui.startModerating()
      : ui.startJudging();
    flow.catch((error) => {
      root.innerHTML = `<p class="error">${String(error)}</p>`;
    });
  }
}

export { JudgeUi };
