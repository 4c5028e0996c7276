/** Headless application controller: all behaviour, no DOM. main.ts renders it. */

import { ApiClient, ApiError, ServiceUnreachable } from "./api.js";
import {
  EditorState,
  adoptOption,
  newEditor,
  setCategory,
  setVerdict,
  submitEditor,
} from "./editor.js";
import { KeyAction, Screen, keyAction } from "./keyboard.js";
import { orderQueue } from "./queue.js";
import { ReviewSession } from "./session.js";
import {
  AgreementReport,
  DraftView,
  ERROR_CATEGORIES,
  ProgressReport,
  TriageToken,
} from "./types.js";

export interface DashboardData {
  progress: ProgressReport;
  agreement: AgreementReport;
}

export class App {
  readonly client: ApiClient;
  readonly session: ReviewSession;

  screen: Screen = "queue";
  queue: DraftView[] = [];
  cursor = 0;
  /** Set when the queue could not be fetched; render as a retry prompt. */
  queueError: string | null = null;
  editor: EditorState | null = null;
  dashboard: DashboardData | null = null;
  /** One-shot status line (claim conflicts, submit confirmations). */
  notice: string | null = null;

  private onRender: () => void;

  constructor(client: ApiClient, session: ReviewSession, onRender?: () => void) {
    this.client = client;
    this.session = session;
    this.onRender = onRender ?? (() => undefined);
  }

  private render(): void {
    this.onRender();
  }

  get selectedDraft(): DraftView | null {
    return this.queue[this.cursor] ?? null;
  }

  async loadQueue(): Promise<void> {
    this.notice = null;
    try {
      const drafts = await this.client.listDrafts();
      this.queue = orderQueue(drafts, {
        filter: this.session.queueFilter,
        hideAnnotatedBy: this.session.annotatorId,
      });
      this.queueError = null;
      if (this.cursor >= this.queue.length) {
        this.cursor = Math.max(0, this.queue.length - 1);
      }
    } catch (exc) {
      if (exc instanceof ServiceUnreachable) {
        this.queueError = "service unreachable; press r to retry";
      } else if (exc instanceof ApiError) {
        this.queueError = `service error: ${exc.detail}`;
      } else {
        throw exc;
      }
    }
    this.render();
  }

  async setFilter(filter: TriageToken | null): Promise<void> {
    this.session.queueFilter = filter;
    this.cursor = 0;
    await this.loadQueue();
  }

  moveCursor(delta: number): void {
    if (this.queue.length === 0) {
      return;
    }
    const next = this.cursor + delta;
    this.cursor = Math.min(this.queue.length - 1, Math.max(0, next));
    this.render();
  }

  async openSelected(): Promise<void> {
    const draft = this.selectedDraft;
    if (draft === null) {
      return;
    }
    await this.claimAndEdit(draft);
  }

  private async claimAndEdit(draft: DraftView): Promise<void> {
    try {
      await this.client.claim(draft.id);
    } catch (exc) {
      if (exc instanceof ApiError && exc.isConflict) {
        this.notice = `${draft.id} is claimed by someone else`;
        this.render();
        return;
      }
      if (exc instanceof ServiceUnreachable) {
        this.notice = "service unreachable; claim not taken";
        this.render();
        return;
      }
      throw exc;
    }
    this.session.claim(draft);
    this.editor = newEditor(draft);
    this.screen = "editor";
    this.notice = null;
    this.render();
  }

  /** Re-take the lease on a locked editor after a 409. */
  async reclaim(): Promise<void> {
    if (this.editor === null) {
      return;
    }
    const draft = this.editor.draft;
    this.session.release();
    // On failure the locked editor stays up so the prompt can be retried.
    await this.claimAndEdit(draft);
  }

  releaseEditor(): void {
    this.session.release();
    this.editor = null;
    this.screen = "queue";
    this.render();
  }

  async submit(): Promise<void> {
    if (this.editor === null || this.editor.locked) {
      return;
    }
    const outcome = await submitEditor(this.editor, this.client);
    this.editor = outcome.state;
    if (outcome.kind === "submitted") {
      const id = outcome.result.draft_id;
      this.session.release();
      this.editor = null;
      this.screen = "queue";
      await this.loadQueue();
      this.notice = `saved ${id}`;
      this.render();
      return;
    }
    this.render();
  }

  async showDashboard(): Promise<void> {
    try {
      const [progress, agreement] = await Promise.all([
        this.client.progress(),
        this.client.agreement(),
      ]);
      this.dashboard = { progress, agreement };
      this.screen = "dashboard";
      this.notice = null;
    } catch (exc) {
      if (exc instanceof ServiceUnreachable) {
        this.notice = "service unreachable; dashboard not loaded";
      } else if (exc instanceof ApiError) {
        this.notice = `service error: ${exc.detail}`;
      } else {
        throw exc;
      }
    }
    this.render();
  }

  cycleCategory(): void {
    if (this.editor === null) {
      return;
    }
    const tokens = ERROR_CATEGORIES.map((c) => c.token);
    const current = this.editor.category;
    const at = current === null ? -1 : tokens.indexOf(current);
    const next = at + 1 >= tokens.length ? null : tokens[at + 1] ?? null;
    this.editor = setCategory(this.editor, next);
    this.render();
  }

  /** Route one keypress. Returns true when the key did something. */
  async handleKey(key: string): Promise<boolean> {
    const action = keyAction(this.screen, key);
    if (action === null) {
      return false;
    }
    await this.applyAction(action);
    return true;
  }

  private async applyAction(action: KeyAction): Promise<void> {
    switch (action.kind) {
      case "move":
        this.moveCursor(action.delta);
        return;
      case "open":
        await this.openSelected();
        return;
      case "refresh":
        await this.loadQueue();
        return;
      case "show-dashboard":
        await this.showDashboard();
        return;
      case "verdict":
        if (this.editor !== null && !this.editor.locked) {
          this.editor = setVerdict(this.editor, action.value);
          this.render();
        }
        return;
      case "adopt":
        if (this.editor !== null && !this.editor.locked) {
          this.editor = adoptOption(this.editor, action.index);
          this.render();
        }
        return;
      case "cycle-category":
        if (this.editor !== null && !this.editor.locked) {
          this.cycleCategory();
        }
        return;
      case "submit":
        await this.submit();
        return;
      case "back":
        if (this.screen === "editor") {
          this.releaseEditor();
        } else {
          this.screen = "queue";
          this.render();
        }
        return;
    }
  }
}
