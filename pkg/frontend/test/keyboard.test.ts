import { describe, expect, it } from "vitest";

import { actionForKey, attachKeyboard } from "../src/keyboard.js";

describe("key map", () => {
  it("maps the three verdict keys", () => {
    expect(actionForKey("a")).toEqual({ kind: "accept" });
    expect(actionForKey("A")).toEqual({ kind: "accept" });
    expect(actionForKey("o")).toEqual({ kind: "override" });
    expect(actionForKey("u")).toEqual({ kind: "unreadable" });
    expect(actionForKey("r")).toEqual({ kind: "refresh" });
  });

  it("maps digits to the four-tag picker", () => {
    expect(actionForKey("1")).toEqual({ kind: "pick", tag: "IRONÍA" });
    expect(actionForKey("2")).toEqual({ kind: "pick", tag: "NEGATIVO" });
    expect(actionForKey("3")).toEqual({ kind: "pick", tag: "NEUTRO" });
    expect(actionForKey("4")).toEqual({ kind: "pick", tag: "POSITIVO" });
  });

  it("ignores everything else", () => {
    for (const key of ["5", "0", "x", "Enter", "Escape", "12"]) {
      expect(actionForKey(key)).toBeNull();
    }
  });
});

describe("DOM binding", () => {
  function fakeTarget() {
    const handlers: ((event: unknown) => void)[] = [];
    return {
      addEventListener: (_type: string, h: (event: unknown) => void) => handlers.push(h),
      removeEventListener: (_type: string, h: (event: unknown) => void) => {
        const i = handlers.indexOf(h);
        if (i >= 0) handlers.splice(i, 1);
      },
      fire: (event: unknown) => handlers.forEach((h) => h(event)),
      count: () => handlers.length,
    };
  }

  function keyEvent(key: string, tagName = "BODY") {
    return {
      key,
      target: { tagName, isContentEditable: false },
      preventDefault: () => {},
    };
  }

  it("dispatches mapped keys and detaches cleanly", () => {
    const target = fakeTarget();
    const seen: string[] = [];
    const detach = attachKeyboard(target, (action) => seen.push(action.kind));
    target.fire(keyEvent("a"));
    target.fire(keyEvent("2"));
    expect(seen).toEqual(["accept", "pick"]);
    detach();
    expect(target.count()).toBe(0);
  });

  it("ignores keystrokes inside editable elements", () => {
    const target = fakeTarget();
    const seen: string[] = [];
    attachKeyboard(target, (action) => seen.push(action.kind));
    target.fire(keyEvent("a", "INPUT"));
    target.fire(keyEvent("a", "TEXTAREA"));
    expect(seen).toEqual([]);
  });
});
