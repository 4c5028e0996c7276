/** DOM bindings. Everything here is presentation; behaviour lives in app.ts. */

import { ApiClient } from "./api.js";
import { App } from "./app.js";
import { agreementLine, progressLines } from "./dashboard.js";
import { correctionFieldsEnabled, setCategory, setField, setVerdict } from "./editor.js";
import { keyHelp } from "./keyboard.js";
import { ReviewSession } from "./session.js";
import { ERROR_CATEGORIES, TriageToken, categoryLabel } from "./types.js";

const root = document.getElementById("app") as HTMLElement;

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

function statusBadge(status: TriageToken): HTMLElement {
  const label = status === "top_priority" ? "TOP" : "LOW";
  return el("span", { class: `badge badge-${status}` }, label);
}

function renderLogin(onReady: (client: ApiClient, session: ReviewSession) => void): void {
  const annotator = el("input", {
    id: "login-annotator",
    placeholder: "annotator id (e.g. a1)",
    autocomplete: "off",
  });
  const token = el("input", {
    id: "login-token",
    type: "password",
    placeholder: "bearer token (optional)",
  });
  const base = el("input", {
    id: "login-base",
    placeholder: "service URL (blank = this origin)",
  });
  const error = el("p", { class: "error", role: "alert" });
  const button = el("button", { type: "submit" }, "Start reviewing");
  const form = el(
    "form",
    { class: "login" },
    el("h1", {}, "Draft review"),
    el("label", { for: "login-annotator" }, "Annotator"),
    annotator,
    el("label", { for: "login-token" }, "Token"),
    token,
    el("label", { for: "login-base" }, "Service"),
    base,
    error,
    button,
  );
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const id = annotator.value.trim();
    if (id === "") {
      error.textContent = "annotator id is required";
      return;
    }
    const client = new ApiClient({
      annotatorId: id,
      baseUrl: base.value.trim() || undefined,
      token: token.value.trim() || undefined,
    });
    onReady(client, new ReviewSession(id));
  });
  root.replaceChildren(form);
  annotator.focus();
}

function renderQueue(app: App): HTMLElement {
  const section = el("section", { class: "queue" });
  const filter = el("select", { id: "queue-filter", "aria-label": "status filter" });
  for (const [value, label] of [
    ["", "All flagged"],
    ["top_priority", "Top priority"],
    ["low_priority", "Low priority"],
  ]) {
    const option = el("option", { value: value ?? "" }, label ?? "");
    if ((app.session.queueFilter ?? "") === value) {
      option.selected = true;
    }
    filter.append(option);
  }
  filter.addEventListener("change", () => {
    const value = filter.value as TriageToken | "";
    void app.setFilter(value === "" ? null : value);
  });
  section.append(
    el(
      "header",
      {},
      el("h1", {}, "Review queue"),
      el("span", { class: "who" }, `signed in as ${app.session.annotatorId}`),
      filter,
    ),
  );
  if (app.queueError !== null) {
    const retry = el("button", { type: "button" }, "Retry");
    retry.addEventListener("click", () => void app.loadQueue());
    section.append(el("p", { class: "error", role: "alert" }, app.queueError, " ", retry));
    return section;
  }
  if (app.queue.length === 0) {
    section.append(el("p", {}, "Nothing left to review."));
    return section;
  }
  const list = el("ol", { class: "drafts" });
  app.queue.forEach((draft, index) => {
    const row = el(
      "li",
      { class: index === app.cursor ? "selected" : "" },
      statusBadge(draft.status),
      el("code", {}, draft.id),
      el("span", { class: "snippet" }, draft.instruction_lrl),
    );
    row.addEventListener("click", () => {
      app.cursor = index;
      void app.openSelected();
    });
    list.append(row);
  });
  section.append(list);
  return section;
}

function renderEditor(app: App): HTMLElement {
  const state = app.editor;
  if (state === null) {
    return el("section", {}, "no draft claimed");
  }
  const draft = state.draft;
  const section = el("section", { class: "editor" });
  section.append(
    el("header", {}, statusBadge(draft.status), el("h1", {}, draft.id)),
    el("dl", {},
      el("dt", {}, "Instruction (French)"),
      el("dd", {}, draft.instruction_fr),
      el("dt", {}, "Instruction"),
      el("dd", { lang: "dje" }, draft.instruction_lrl),
      el("dt", {}, "Response"),
      el("dd", { lang: "dje" }, draft.response_lrl),
      el("dt", {}, "Checker reason"),
      el("dd", {}, draft.reason ?? "(none)"),
    ),
  );

  if (draft.options.length > 0) {
    const list = el("ol", { class: "options" });
    draft.options.forEach((option, index) => {
      const adopt = el("button", { type: "button" }, `Use option ${index + 1}`);
      adopt.addEventListener("click", () => {
        if (app.editor !== null && !app.editor.locked) {
          void app.handleKey(String(index + 1));
        }
      });
      list.append(
        el("li", {}, el("span", { lang: "dje" }, option.text), " · ", option.explanation, " ", adopt),
      );
    });
    section.append(el("h2", {}, "Checker options"), list);
  }

  const yes = el("input", { type: "radio", name: "verdict", id: "verdict-yes" });
  const no = el("input", { type: "radio", name: "verdict", id: "verdict-no" });
  yes.checked = state.verdict === true;
  no.checked = state.verdict === false;
  yes.addEventListener("change", () => {
    if (app.editor !== null) {
      app.editor = setVerdict(app.editor, true);
      paint(app);
    }
  });
  no.addEventListener("change", () => {
    if (app.editor !== null) {
      app.editor = setVerdict(app.editor, false);
      paint(app);
    }
  });
  section.append(
    el(
      "fieldset",
      {},
      el("legend", {}, "Is the draft correct?"),
      yes,
      el("label", { for: "verdict-yes" }, "Yes"),
      no,
      el("label", { for: "verdict-no" }, "No"),
    ),
  );

  const enabled = correctionFieldsEnabled(state);
  const instr = el("textarea", { id: "fix-instr", rows: "2" });
  instr.value = state.correctedInstruction;
  const resp = el("textarea", { id: "fix-resp", rows: "2" });
  resp.value = state.correctedResponse;
  const category = el("select", { id: "fix-category" });
  category.append(el("option", { value: "" }, "(choose a category)"));
  for (const entry of ERROR_CATEGORIES) {
    const option = el("option", { value: entry.token }, entry.label);
    if (state.category === entry.token) {
      option.selected = true;
    }
    category.append(option);
  }
  instr.disabled = !enabled;
  resp.disabled = !enabled;
  category.disabled = !enabled;
  instr.addEventListener("input", () => {
    if (app.editor !== null) {
      app.editor = setField(app.editor, "correctedInstruction", instr.value);
    }
  });
  resp.addEventListener("input", () => {
    if (app.editor !== null) {
      app.editor = setField(app.editor, "correctedResponse", resp.value);
    }
  });
  category.addEventListener("change", () => {
    if (app.editor !== null) {
      app.editor = setCategory(app.editor, category.value === "" ? null : category.value);
    }
  });
  const comments = el("textarea", { id: "fix-comments", rows: "2" });
  comments.value = state.comments;
  comments.addEventListener("input", () => {
    if (app.editor !== null) {
      app.editor = setField(app.editor, "comments", comments.value);
    }
  });
  section.append(
    el("label", { for: "fix-instr" }, "Corrected instruction"),
    instr,
    el("label", { for: "fix-resp" }, "Corrected response"),
    resp,
    el("label", { for: "fix-category" }, "Error category"),
    category,
    el("label", { for: "fix-comments" }, "Comments"),
    comments,
  );

  if (state.error !== null) {
    section.append(el("p", { class: "error", role: "alert" }, state.error));
  }

  const submit = el("button", { type: "button", class: "primary" }, "Submit");
  submit.disabled = state.locked;
  submit.addEventListener("click", () => void app.submit());
  const release = el("button", { type: "button" }, "Release");
  release.addEventListener("click", () => app.releaseEditor());
  const actions = el("div", { class: "actions" }, submit, release);
  if (state.locked) {
    const reclaim = el("button", { type: "button", class: "primary" }, "Re-claim draft");
    reclaim.addEventListener("click", () => void app.reclaim());
    actions.prepend(reclaim);
  }
  section.append(actions);
  return section;
}

function renderDashboard(app: App): HTMLElement {
  const section = el("section", { class: "dashboard" }, el("h1", {}, "Progress"));
  if (app.dashboard === null) {
    section.append(el("p", {}, "No data yet."));
    return section;
  }
  const table = el(
    "table",
    {},
    el(
      "tr",
      {},
      el("th", {}, "Queue"),
      el("th", {}, "Reviewed"),
      el("th", {}, "Remaining"),
      el("th", {}, "Total"),
    ),
  );
  for (const line of progressLines(app.dashboard.progress)) {
    table.append(
      el(
        "tr",
        {},
        el("td", {}, line.label),
        el("td", {}, String(line.reviewed)),
        el("td", {}, String(line.remaining)),
        el("td", {}, String(line.total)),
      ),
    );
  }
  section.append(table, el("p", { class: "agreement" }, agreementLine(app.dashboard.agreement)));
  return section;
}

function paint(app: App): void {
  const body =
    app.screen === "editor"
      ? renderEditor(app)
      : app.screen === "dashboard"
        ? renderDashboard(app)
        : renderQueue(app);
  const footer = el("footer", {}, keyHelp(app.screen));
  const parts: HTMLElement[] = [];
  if (app.notice !== null) {
    parts.push(el("p", { class: "notice", role: "status" }, app.notice));
  }
  parts.push(body, footer);
  root.replaceChildren(...parts);
}

function start(client: ApiClient, session: ReviewSession): void {
  const app: App = new App(client, session, () => paint(app));
  document.addEventListener("keydown", (event) => {
    const target = event.target as HTMLElement | null;
    const typing =
      target !== null &&
      (target.tagName === "INPUT" || target.tagName === "TEXTAREA" || target.tagName === "SELECT");
    if (typing && event.key !== "Escape") {
      return;
    }
    void app.handleKey(event.key).then((handled) => {
      if (handled) {
        event.preventDefault();
      }
    });
  });
  void app.loadQueue();
}

renderLogin(start);
export { categoryLabel };
