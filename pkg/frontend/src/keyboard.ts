import { MULTICLASS_TAGS, type Tag } from "./types.js";

/** Keyboard-first review: reviewers work through ~1000 items, so every
 * verdict is one or two keystrokes. */
export type KeyAction =
  | { kind: "accept" }
  | { kind: "override" }
  | { kind: "unreadable" }
  | { kind: "pick"; tag: Tag }
  | { kind: "refresh" };

export function actionForKey(key: string): KeyAction | null {
  switch (key.toLowerCase()) {
    case "a":
      return { kind: "accept" };
    case "o":
      return { kind: "override" };
    case "u":
      return { kind: "unreadable" };
    case "r":
      return { kind: "refresh" };
    default: {
      const index = Number.parseInt(key, 10) - 1;
      const tag = MULTICLASS_TAGS[index];
      if (key.length === 1 && tag !== undefined) return { kind: "pick", tag };
      return null;
    }
  }
}

/** Attach the key map to a DOM target; keystrokes inside editable elements
 * are ignored. Returns a detach function. */
export function attachKeyboard(
  target: { addEventListener: Function; removeEventListener: Function },
  dispatch: (action: KeyAction) => void,
): () => void {
  const handler = (event: KeyboardEvent) => {
    const element = event.target as HTMLElement | null;
    if (
      element &&
      (element.tagName === "INPUT" ||
        element.tagName === "TEXTAREA" ||
        element.isContentEditable)
    ) {
      return;
    }
    const action = actionForKey(event.key);
    if (action) {
      event.preventDefault();
      dispatch(action);
    }
  };
  target.addEventListener("keydown", handler);
  return () => target.removeEventListener("keydown", handler);
}
