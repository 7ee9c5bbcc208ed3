/**
 * DOM layer: renders the active task, binds the keyboard, and keeps the
 * progress bar in sync with the server.
 *
 * Keys: 1/2/3 stage a top suggestion, O expands the remaining candidates,
 * Enter submits and advances. Clicking any candidate stages it.
 */

import { VerifyApi } from "./api.js";
import { QueueSession } from "./session.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export class ReviewApp {
  private root: HTMLElement;

  constructor(
    private readonly api: VerifyApi,
    private readonly session: QueueSession,
    rootId = "app",
  ) {
    const root = document.getElementById(rootId);
    if (!root) throw new Error(`missing #${rootId} container`);
    this.root = root;
  }

  async run(): Promise<void> {
    document.addEventListener("keydown", (event) => void this.onKey(event));
    await this.session.start();
    await this.render();
  }

  private async onKey(event: KeyboardEvent): Promise<void> {
    if (event.key >= "1" && event.key <= "3") {
      if (this.session.selectTop(Number(event.key) - 1)) await this.render();
    } else if (event.key.toLowerCase() === "o") {
      this.session.toggleOthers();
      await this.render();
    } else if (event.key === "Enter") {
      await this.session.submit();
      await this.render();
    }
  }

  private async render(): Promise<void> {
    const session = this.session;
    this.root.replaceChildren();

    const progress = await session.progress().catch(() => null);
    if (progress) {
      const bar = el("div", "progress");
      const fill = el("div", "progress-fill");
      const fraction = progress.total ? progress.decided / progress.total : 0;
      fill.style.width = `${(100 * fraction).toFixed(1)}%`;
      bar.append(fill);
      this.root.append(
        bar,
        el("div", "progress-label",
           `${progress.decided} / ${progress.total} decided`),
      );
    }

    if (session.lastNotice) {
      this.root.append(el("div", `notice notice-${session.lastNotice.kind}`,
                          session.lastNotice.message));
    }

    const task = session.current;
    if (!task) {
      this.root.append(el("h2", "done", "Queue complete"));
      this.root.append(this.statsBlock());
      return;
    }

    const header = el("div", "task-header");
    header.append(
      el("h2", undefined, `Segment ${task.segment_id}`),
      el("span", "original", `original name: ${task.original_name}`),
      el("span", "queue-pos",
         `${session.queuePosition + 1} of ${session.queueLength} in this session`),
    );
    this.root.append(header);

    const imagery = el("div", "imagery");
    for (const [label, url] of [
      ["context", this.api.imageUrl(task)],
      ["segment", this.api.overlayUrl(task)],
    ] as const) {
      const figure = el("figure");
      const img = el("img");
      img.src = url;
      img.alt = label;
      figure.append(img, el("figcaption", undefined, label));
      imagery.append(figure);
    }
    this.root.append(imagery);

    const list = el("ol", "top3");
    task.top3.forEach((suggestion, index) => {
      const item = el("li",
                      session.stagedChoice === suggestion.name ? "staged" : undefined);
      const button = el("button", "candidate",
                        `[${index + 1}] ${suggestion.name}  (${suggestion.score.toFixed(3)})`);
      button.addEventListener("click", () => {
        session.selectTop(index);
        void this.render();
      });
      item.append(button);
      list.append(item);
    });
    this.root.append(list);

    const othersToggle = el("button", "others-toggle",
                            session.othersExpanded
                              ? "hide other candidates [O]"
                              : `show ${task.others.length} other candidates [O]`);
    othersToggle.addEventListener("click", () => {
      session.toggleOthers();
      void this.render();
    });
    this.root.append(othersToggle);

    if (session.othersExpanded) {
      const others = el("ul", "others");
      for (const name of task.others) {
        const item = el("li", session.stagedChoice === name ? "staged" : undefined);
        const button = el("button", "candidate", name);
        button.addEventListener("click", () => {
          session.selectOther(name);
          void this.render();
        });
        item.append(button);
        others.append(item);
      }
      this.root.append(others);
    }

    const submit = el("button", "submit",
                      session.stagedChoice
                        ? `submit "${session.stagedChoice}" [Enter]`
                        : "stage a candidate first");
    submit.disabled = session.stagedChoice === null;
    submit.addEventListener("click", async () => {
      await session.submit();
      await this.render();
    });
    this.root.append(submit, this.statsBlock());
  }

  private statsBlock(): HTMLElement {
    const stats = this.session.stats();
    const parts = [
      `${stats.decisions} decisions`,
      `${stats.decisionsPerMinute.toFixed(1)}/min`,
      `top1 ${(100 * stats.breakdown.top1).toFixed(0)}%`,
      `top3 ${(100 * stats.breakdown.top3).toFixed(0)}%`,
      `others ${(100 * stats.breakdown.others).toFixed(0)}%`,
    ];
    return el("div", "session-stats", parts.join("  ·  "));
  }
}
