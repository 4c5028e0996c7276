/** Keyboard map. Every review step is reachable without a pointer. */

export type Screen = "queue" | "editor" | "dashboard";

export type KeyAction =
  | { kind: "move"; delta: 1 | -1 }
  | { kind: "open" }
  | { kind: "refresh" }
  | { kind: "show-dashboard" }
  | { kind: "verdict"; value: boolean }
  | { kind: "adopt"; index: 0 | 1 | 2 }
  | { kind: "cycle-category" }
  | { kind: "submit" }
  | { kind: "back" };

export function keyAction(screen: Screen, key: string): KeyAction | null {
  if (key === "Escape") {
    return screen === "queue" ? null : { kind: "back" };
  }
  if (screen === "queue") {
    switch (key) {
      case "j":
      case "ArrowDown":
        return { kind: "move", delta: 1 };
      case "k":
      case "ArrowUp":
        return { kind: "move", delta: -1 };
      case "Enter":
        return { kind: "open" };
      case "r":
        return { kind: "refresh" };
      case "d":
        return { kind: "show-dashboard" };
      default:
        return null;
    }
  }
  if (screen === "editor") {
    switch (key) {
      case "y":
        return { kind: "verdict", value: true };
      case "n":
        return { kind: "verdict", value: false };
      case "1":
        return { kind: "adopt", index: 0 };
      case "2":
        return { kind: "adopt", index: 1 };
      case "3":
        return { kind: "adopt", index: 2 };
      case "c":
        return { kind: "cycle-category" };
      case "s":
        return { kind: "submit" };
      default:
        return null;
    }
  }
  return null;
}

/** Key help strings for the footer, per screen. */
export function keyHelp(screen: Screen): string {
  if (screen === "queue") {
    return "j/k move · Enter claim · r refresh · d dashboard";
  }
  if (screen === "editor") {
    return "y/n verdict · 1-3 adopt option · c category · s submit · Esc release";
  }
  return "Esc back to queue";
}
