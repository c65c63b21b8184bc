import { ReviewApiClient } from "./api.js";
import { dashboardView } from "./dashboard.js";
import { renderDashboard, renderSession } from "./dom.js";
import { attachKeyboard } from "./keyboard.js";
import { ReviewSession, isTag } from "./session.js";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("service") ?? "";
const reviewerId = params.get("reviewer") ?? "anonymous";

const client = new ReviewApiClient(baseUrl);
const sessionRoot = document.getElementById("session")!;
const dashboardRoot = document.getElementById("dashboard")!;

async function refreshDashboard(): Promise<void> {
  try {
    renderDashboard(dashboardRoot, dashboardView(await client.stats()));
  } catch {
    // dashboard is best-effort; the review flow keeps working without it
  }
}

const session = new ReviewSession(client, reviewerId, () => Date.now(), () => {
  void refreshDashboard();
});

session.subscribe((state) => renderSession(sessionRoot, state, session.leaseRemaining()));

sessionRoot.addEventListener("click", (event) => {
  const element = (event.target as HTMLElement).closest("button");
  if (!element) return;
  const action = element.dataset.action;
  const tag = element.dataset.tag;
  if (action === "accept" || action === "override" || action === "unreadable") {
    void session.submit(action);
  } else if (action === "refresh") {
    void session.refresh();
  } else if (tag && isTag(tag)) {
    session.selectOverrideTag(tag);
  }
});

attachKeyboard(window, (action) => {
  switch (action.kind) {
    case "accept":
    case "unreadable":
      void session.submit(action.kind);
      break;
    case "override":
      // First press opens the picker; once a tag is chosen it submits.
      if (session.getState().overrideTag) void session.submit("override");
      else session.armOverride();
      break;
    case "pick":
      session.selectOverrideTag(action.tag);
      break;
    case "refresh":
      void session.refresh();
      break;
  }
});

// Tick the lease countdown once a second.
setInterval(() => {
  renderSession(sessionRoot, session.getState(), session.leaseRemaining());
}, 1000);

void session.start().then(refreshDashboard);
