// Verdict form. Submits optimistically: the entry shows up in the local log
// the moment the button is pressed and is reconciled (or marked failed) when
// the backend answers.

import { ApiError, Client, Verdict, VerdictRecord, VERDICTS } from "./api.js";

const VERDICT_HINTS: Record<Verdict, string> = {
  sv_failure: "supervised labels wrong",
  ssv_failure: "predictive labels wrong",
  both_failed: "both streams wrong",
  false_alarm: "nothing wrong here",
  unsure: "cannot tell",
};

export class VerdictForm {
  private frameId: string | null = null;
  private clusterId: number | null = null;
  private buttons = new Map<Verdict, HTMLButtonElement>();
  private tagsInput: HTMLInputElement;
  private reviewerInput: HTMLInputElement;
  private target: HTMLElement;
  private log: HTMLElement;

  onSaved: ((record: VerdictRecord) => void) | null = null;

  constructor(
    root: HTMLElement,
    private client: Client
  ) {
    this.target = root.querySelector(".verdict-target")!;
    this.tagsInput = root.querySelector(".verdict-tags")!;
    this.reviewerInput = root.querySelector(".verdict-reviewer")!;
    this.log = root.querySelector(".verdict-log")!;
    this.reviewerInput.value = localStorage.getItem("motioncheck.reviewer") ?? "";
    this.reviewerInput.addEventListener("change", () => {
      localStorage.setItem("motioncheck.reviewer", this.reviewerInput.value);
    });

    const buttonRow = root.querySelector(".verdict-buttons")!;
    for (const verdict of VERDICTS) {
      const btn = document.createElement("button");
      btn.textContent = verdict.replace("_", " ");
      btn.title = VERDICT_HINTS[verdict];
      btn.className = `verdict-btn verdict-${verdict}`;
      btn.disabled = true;
      btn.onclick = () => void this.submit(verdict);
      this.buttons.set(verdict, btn);
      buttonRow.appendChild(btn);
    }
    this.renderTarget();
  }

  setTarget(frameId: string, clusterId: number | null): void {
    this.frameId = frameId;
    this.clusterId = clusterId;
    this.renderTarget();
  }

  private renderTarget(): void {
    const ready = this.frameId !== null && this.clusterId !== null;
    this.target.textContent = ready
      ? `frame ${this.frameId}, cluster #${this.clusterId}`
      : "pick a cluster to review";
    for (const btn of this.buttons.values()) btn.disabled = !ready;
  }

  private async submit(verdict: Verdict): Promise<void> {
    if (this.frameId === null || this.clusterId === null) return;
    const frameId = this.frameId;
    const clusterId = this.clusterId;
    const tags = this.tagsInput.value
      .split(",")
      .map((t) => t.trim())
      .filter((t) => t.length > 0);
    const reviewer = this.reviewerInput.value.trim() || "anonymous";

    const entry = document.createElement("div");
    entry.className = "log-entry pending";
    entry.textContent = `${frameId} #${clusterId} ${verdict} ... saving`;
    this.log.prepend(entry);

    try {
      const record = await this.client.postVerdict({
        frameId,
        clusterId,
        verdict,
        tags,
        reviewer,
      });
      entry.className = "log-entry saved";
      const tagText = record.tags.length ? ` [${record.tags.join(", ")}]` : "";
      entry.textContent = `${record.frameId} #${record.clusterId} ${record.verdict}${tagText} · ${record.reviewer}`;
      this.tagsInput.value = "";
      this.onSaved?.(record);
    } catch (e) {
      entry.className = "log-entry failed";
      const reason = e instanceof ApiError ? `${e.code}: ${e.message}` : String(e);
      entry.textContent = `${frameId} #${clusterId} ${verdict} failed (${reason})`;
    }
  }
}
