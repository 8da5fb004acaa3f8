import { ApiClient } from "./api.js";
import { DashboardView } from "./dashboard.js";
import { StreamEditor } from "./forms.js";
import { ProfilePanel } from "./profiles.js";
import { DashboardController } from "./state.js";

function applyTheme(theme: string): void {
  document.body.classList.toggle("dark", theme === "dark");
  try {
    localStorage.setItem("swtg-theme", theme);
  } catch {
    // private mode: theme simply resets next load
  }
}

function init(): void {
  const api = new ApiClient("/api/v1");
  const controller = new DashboardController(api);

  const saved = (() => {
    try {
      return localStorage.getItem("swtg-theme");
    } catch {
      return null;
    }
  })();
  if (saved === "dark") {
    controller.state.theme = "dark";
    applyTheme("dark");
  }

  const dashboard = new DashboardView(document.getElementById("dashboard")!);
  controller.onChange((state) => dashboard.render(state));

  new StreamEditor(document.getElementById("editor")!, api, () => {
    const note = document.getElementById("run-note")!;
    note.textContent = "Configured";
  });

  new ProfilePanel(document.getElementById("profiles")!, api, controller);

  document.getElementById("btn-start")!.addEventListener("click", () => {
    void controller.start().then((ok) => {
      document.getElementById("run-note")!.textContent = ok
        ? "Running"
        : controller.state.notice ?? "";
    });
  });
  document.getElementById("btn-stop")!.addEventListener("click", () => {
    void controller.stop().then((ok) => {
      document.getElementById("run-note")!.textContent = ok
        ? "Stopped"
        : controller.state.notice ?? "";
    });
  });
  document.getElementById("btn-theme")!.addEventListener("click", () => {
    applyTheme(controller.toggleTheme());
  });

  controller.startPolling(1000);
}

document.addEventListener("DOMContentLoaded", init);
