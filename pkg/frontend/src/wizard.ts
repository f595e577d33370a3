/** The questionnaire wizard. All content (prompts, options, requirements)
 * comes from API responses; this module only renders state and forwards
 * user intent. At most one mutating request is in flight at a time. */

import {
  ApiError,
  LeafPrompt,
  QuestionnaireApi,
  Requirement,
  Snapshot,
} from "./api.js";
import { triggerDownload } from "./download.js";
import { urlSyntaxError } from "./urlcheck.js";

export const MANIFEST_FILENAME = "retrievability.json";

type Screen =
  | { kind: "loading" }
  | { kind: "prompt"; snapshot: Snapshot }
  | { kind: "done"; outcome: string; manifestText: string }
  | { kind: "gone"; message: string }
  | { kind: "error"; message: string; retry: () => Promise<void> };

export interface WizardConfig {
  root: HTMLElement;
  api: QuestionnaireApi;
  getHashSessionId?: () => string | null;
  setHashSessionId?: (id: string | null) => void;
}

function defaultGetHash(): string | null {
  const hash = window.location.hash;
  return hash.startsWith("#s=") ? hash.slice(3) : null;
}

function defaultSetHash(id: string | null): void {
  window.location.hash = id ? `#s=${id}` : "";
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  node.append(...children);
  return node;
}

export function parseKeyValueLines(
  raw: string,
): { value: Record<string, string> } | { error: string } {
  const value: Record<string, string> = {};
  for (const line of raw.split("\n")) {
    const trimmed = line.trim();
    if (!trimmed) continue;
    const separator = trimmed.indexOf("=");
    if (separator <= 0) {
      return { error: `expected key=value, got '${trimmed}'` };
    }
    value[trimmed.slice(0, separator).trim()] = trimmed.slice(separator + 1).trim();
  }
  if (Object.keys(value).length === 0) {
    return { error: "enter at least one key=value line" };
  }
  return { value };
}

function keyValueToLines(value: Record<string, string>): string {
  return Object.entries(value)
    .map(([key, item]) => `${key}=${item}`)
    .join("\n");
}

export class Wizard {
  private readonly root: HTMLElement;
  private readonly api: QuestionnaireApi;
  private readonly getHash: () => string | null;
  private readonly setHash: (id: string | null) => void;
  private sessionId: string | null = null;
  private screen: Screen = { kind: "loading" };
  private busy = false;

  constructor(config: WizardConfig) {
    this.root = config.root;
    this.api = config.api;
    this.getHash = config.getHashSessionId ?? defaultGetHash;
    this.setHash = config.setHashSessionId ?? defaultSetHash;
  }

  async init(): Promise<void> {
    this.render();
    const existing = this.getHash();
    if (existing) {
      this.sessionId = existing;
      await this.refresh();
    } else {
      await this.startFresh();
    }
  }

  private async startFresh(): Promise<void> {
    try {
      const created = await this.api.createSession();
      this.sessionId = created.session_id;
      this.setHash(created.session_id);
      await this.refresh();
    } catch (error) {
      this.toErrorScreen(error, () => this.startFresh());
    }
  }

  private async refresh(): Promise<void> {
    if (!this.sessionId) return;
    try {
      const snapshot = await this.api.getSession(this.sessionId);
      this.screen = { kind: "prompt", snapshot };
      this.render();
    } catch (error) {
      this.toErrorScreen(error, () => this.refresh());
    }
  }

  private toErrorScreen(error: unknown, retry: () => Promise<void>): void {
    if (error instanceof ApiError && error.sessionGone) {
      this.screen = { kind: "gone", message: error.message };
    } else {
      const message = error instanceof Error ? error.message : String(error);
      this.screen = { kind: "error", message, retry };
    }
    this.render();
  }

  /** Busy-guard every mutation: controls are disabled while one request is
   * pending, so a second click cannot start an overlapping mutation. */
  private async mutate(action: () => Promise<void>): Promise<void> {
    if (this.busy) return;
    this.busy = true;
    this.setControlsDisabled(true);
    try {
      await action();
    } finally {
      this.busy = false;
      this.setControlsDisabled(false);
    }
  }

  private setControlsDisabled(disabled: boolean): void {
    if (disabled) {
      for (const control of this.root.querySelectorAll<HTMLButtonElement>(
        "button, input, textarea",
      )) {
        if (!control.disabled) {
          control.disabled = true;
          control.setAttribute("data-busy", "");
        }
      }
    } else {
      // a render() during the action replaces the DOM; only controls we
      // disabled ourselves get re-enabled, so intrinsic disabled state
      // (Back at the first question) survives
      for (const control of this.root.querySelectorAll<HTMLButtonElement>("[data-busy]")) {
        control.disabled = false;
        control.removeAttribute("data-busy");
      }
    }
  }

  private async doAnswer(answerId: string): Promise<void> {
    await this.mutate(async () => {
      try {
        const snapshot = await this.api.answer(this.sessionId!, answerId);
        this.screen = { kind: "prompt", snapshot };
        this.render();
      } catch (error) {
        this.toErrorScreen(error, () => this.doAnswer(answerId));
      }
    });
  }

  private async doUndo(): Promise<void> {
    await this.mutate(async () => {
      try {
        const snapshot = await this.api.undo(this.sessionId!);
        this.screen = { kind: "prompt", snapshot };
        this.render();
      } catch (error) {
        this.toErrorScreen(error, () => this.doUndo());
      }
    });
  }

  private async doSubmit(leaf: LeafPrompt): Promise<void> {
    // client-side pass first: no request leaves the page while anything
    // is known-bad (the server re-checks everything anyway)
    const fields: Record<string, string | Record<string, string>> = {};
    let anyClientError = false;
    for (const requirement of leaf.requirements) {
      const control = this.fieldControl(requirement.id);
      if (!control) continue;
      const raw = control.value;
      this.setFieldError(requirement.id, null);
      if (!raw.trim()) {
        if (requirement.required) {
          this.setFieldError(requirement.id, "this field is required");
          anyClientError = true;
        }
        continue;
      }
      if (requirement.type === "url") {
        const problem = urlSyntaxError(raw.trim());
        if (problem) {
          this.setFieldError(requirement.id, problem);
          anyClientError = true;
          continue;
        }
        fields[requirement.id] = raw.trim();
      } else if (requirement.type === "keyvalue") {
        const parsed = parseKeyValueLines(raw);
        if ("error" in parsed) {
          this.setFieldError(requirement.id, parsed.error);
          anyClientError = true;
          continue;
        }
        fields[requirement.id] = parsed.value;
      } else {
        fields[requirement.id] = raw.trim();
      }
    }
    if (anyClientError) return;

    await this.mutate(async () => {
      try {
        await this.api.putFields(this.sessionId!, fields);
        const manifestText = await this.api.manifestText(this.sessionId!);
        triggerDownload(MANIFEST_FILENAME, manifestText);
        this.screen = { kind: "done", outcome: leaf.outcome, manifestText };
        this.render();
      } catch (error) {
        if (error instanceof ApiError && error.status === 422) {
          for (const failure of error.fieldErrors) {
            this.setFieldError(failure.field, failure.message);
          }
          return; // stay on the form, inputs untouched
        }
        this.toErrorScreen(error, () => this.doSubmit(leaf));
      }
    });
  }

  private fieldControl(fieldId: string): HTMLInputElement | HTMLTextAreaElement | null {
    return this.root.querySelector(`[data-field-id="${fieldId}"]`);
  }

  private setFieldError(fieldId: string, message: string | null): void {
    const span = this.root.querySelector(`[data-field-error="${fieldId}"]`);
    if (span) {
      span.textContent = message ?? "";
      (span as HTMLElement).hidden = !message;
    }
  }

  render(): void {
    const main = el("div", { class: "wizard" });
    switch (this.screen.kind) {
      case "loading":
        main.append(el("p", { class: "status" }, "loading…"));
        break;
      case "prompt":
        main.append(...this.renderPrompt(this.screen.snapshot));
        break;
      case "done":
        main.append(...this.renderDone(this.screen.outcome, this.screen.manifestText));
        break;
      case "gone":
        main.append(...this.renderGone(this.screen.message));
        break;
      case "error":
        main.append(...this.renderError(this.screen.message, this.screen.retry));
        break;
    }
    main.append(this.renderValidatePanel());
    this.root.replaceChildren(main);
  }

  private renderBreadcrumb(path: [string, string][]): HTMLElement {
    const list = el("ol", { class: "breadcrumb", "aria-label": "answers so far" });
    for (const [question, answer] of path) {
      list.append(el("li", {}, `${question} = ${answer}`));
    }
    return list;
  }

  private renderBackButton(enabled: boolean): HTMLButtonElement {
    const back = el("button", { class: "back", type: "button" }, "Back");
    back.disabled = !enabled;
    back.addEventListener("click", () => void this.doUndo());
    return back;
  }

  private renderPrompt(snapshot: Snapshot): Node[] {
    if (snapshot.prompt.kind === "question") {
      const prompt = snapshot.prompt;
      const options = el("div", { class: "options" });
      for (const option of prompt.options) {
        const button = el(
          "button",
          { class: "option", type: "button", "data-answer-id": option.id },
          option.label,
        );
        button.addEventListener("click", () => void this.doAnswer(option.id));
        options.append(button);
      }
      return [
        this.renderBreadcrumb(snapshot.path),
        el("h2", { class: "question-text" }, prompt.prompt),
        options,
        this.renderBackButton(snapshot.path.length > 0),
      ];
    }

    const leaf = snapshot.prompt;
    const form = el("form", { class: "leaf-form", novalidate: "" });
    for (const requirement of leaf.requirements) {
      form.append(this.renderField(requirement));
    }
    const submit = el(
      "button",
      { class: "submit", type: "submit" },
      "Save answers and download manifest",
    );
    form.append(submit);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.doSubmit(leaf);
    });
    return [
      this.renderBreadcrumb(snapshot.path),
      el("p", { class: "outcome-chip" }, leaf.outcome),
      el("h2", { class: "prescription" }, leaf.prescription),
      form,
      this.renderBackButton(snapshot.path.length > 0),
    ];
  }

  private renderField(requirement: Requirement): HTMLElement {
    const isMultiline = requirement.type === "text" || requirement.type === "keyvalue";
    const control = isMultiline
      ? el("textarea", { rows: requirement.type === "text" ? "3" : "4" })
      : el("input", { type: "text" });
    control.setAttribute("data-field-id", requirement.id);
    control.setAttribute("name", requirement.id);
    if (requirement.filled && requirement.value != null) {
      control.value =
        typeof requirement.value === "string"
          ? requirement.value
          : keyValueToLines(requirement.value);
    }
    if (requirement.type === "keyvalue") {
      control.setAttribute("placeholder", "one key=value per line");
    }
    const label = el(
      "label",
      { class: "field-label" },
      requirement.id,
      requirement.required
        ? el("span", { class: "required-mark", title: "required" }, " *")
        : el("span", { class: "optional-mark" }, " (optional)"),
    );
    const error = el("span", { class: "field-error" });
    error.setAttribute("data-field-error", requirement.id);
    (error as HTMLElement).hidden = true;
    const wrapper = el("div", { class: "field", "data-field": requirement.id });
    wrapper.append(label);
    if (requirement.hint) {
      wrapper.append(el("div", { class: "hint" }, requirement.hint));
    }
    wrapper.append(control, error);
    return wrapper;
  }

  private renderDone(outcome: string, manifestText: string): Node[] {
    const again = el("button", { class: "download-again", type: "button" }, "Download again");
    again.addEventListener("click", () =>
      triggerDownload(MANIFEST_FILENAME, manifestText),
    );
    const restart = el("button", { class: "restart", type: "button" }, "Start over");
    restart.addEventListener("click", () => void this.mutate(() => this.startFresh()));
    return [
      el("h2", { class: "done-title" }, "Manifest saved"),
      el(
        "p",
        { class: "done-note" },
        `Outcome ${outcome}: ${MANIFEST_FILENAME} was downloaded. ` +
          "Keep it next to the dataset.",
      ),
      again,
      restart,
    ];
  }

  private renderGone(message: string): Node[] {
    const restart = el("button", { class: "restart", type: "button" }, "Start a new session");
    restart.addEventListener("click", () => void this.mutate(() => this.startFresh()));
    return [
      el("h2", {}, "Session unavailable"),
      el("p", { class: "status" }, message),
      restart,
    ];
  }

  private renderError(message: string, retry: () => Promise<void>): Node[] {
    const retryButton = el("button", { class: "retry", type: "button" }, "Retry");
    retryButton.addEventListener("click", () => void this.mutate(retry));
    const restart = el("button", { class: "restart", type: "button" }, "Start over");
    restart.addEventListener("click", () => void this.mutate(() => this.startFresh()));
    return [
      el("h2", {}, "Something went wrong"),
      el("p", { class: "error-message" }, message),
      retryButton,
      restart,
    ];
  }

  private renderValidatePanel(): HTMLElement {
    const input = el("input", { type: "file", accept: ".json,application/json" });
    input.setAttribute("data-validate-input", "");
    const button = el("button", { class: "validate", type: "button" }, "Validate manifest");
    const results = el("ul", { class: "findings" });
    results.setAttribute("data-validate-results", "");

    button.addEventListener("click", async () => {
      results.replaceChildren();
      const file = (input as HTMLInputElement).files?.[0];
      if (!file) {
        results.append(el("li", { class: "status" }, "choose a manifest file first"));
        return;
      }
      try {
        const report = await this.api.validateManifest(await file.text());
        if (report.findings.length === 0) {
          results.append(el("li", { class: "status" }, "clean — no findings"));
        }
        for (const finding of report.findings) {
          results.append(
            el(
              "li",
              { class: "finding" },
              el("span", { class: `badge ${finding.severity}` }, finding.severity),
              ` ${finding.code} ${finding.location ? `[${finding.location}] ` : ""}${finding.message}`,
            ),
          );
        }
      } catch (error) {
        const message = error instanceof Error ? error.message : String(error);
        results.append(el("li", { class: "finding" },
          el("span", { class: "badge error" }, "error"), ` ${message}`));
      }
    });

    const panel = el("details", { class: "validate-panel" });
    panel.append(
      el("summary", {}, "Validate an existing manifest"),
      el("p", { class: "hint" }, "Upload a retrievability.json to check it against the loaded questionnaire."),
      input,
      button,
      results,
    );
    return panel;
  }
}
