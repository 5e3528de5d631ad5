import { ApiClient } from "./api";
import { contributionSum, findChart, inspectCell, inspectConfig, inspectTag } from "./inspect";
import { renderDiagram } from "./render";
import { sliderFloor, ViewerState } from "./state";
import type { InspectLine, ModelInfo } from "./types";

// Thin DOM wiring: sliders in native units drive the state manager, the
// diagram container re-renders from each snapshot, and a delegated
// mousemove handler fills the popover from the document values.

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text = ""
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  if (text) node.textContent = text;
  return node;
}

function popoverHtml(lines: InspectLine[]): string {
  return lines.map((l) => `<div><span class="k">${l.label}</span> <span class="v">${l.value}</span></div>`).join("");
}

export async function mountViewer(root: HTMLElement, base = ""): Promise<ViewerState> {
  const api = new ApiClient(base);
  const model: ModelInfo = await api.model();
  const state = new ViewerState(model, api);

  root.innerHTML = "";
  const controls = el("div", { class: "controls" });
  const status = el("div", { class: "status" });
  const diagramBox = el("div", { class: "diagram" });
  const popover = el("div", { class: "popover", style: "display:none;position:fixed;" });
  root.append(controls, status, diagramBox, popover);

  const maxima = model.scaling_maxima;
  model.domain_names.forEach((name, k) => {
    const range = model.ranges?.[k] ?? [0, maxima ? maxima[k] : 1];
    const lo = sliderFloor(range[0], model.epsilon, maxima ? maxima[k] : null);
    const hi = range[1];
    const wrap = el("label", { class: "slider" }, `${name}: `);
    const value = el("span", { class: "value" });
    const input = el("input", {
      type: "range",
      min: String(lo),
      max: String(hi),
      step: String((hi - lo) / 200),
      value: String(state.snapshot().scores[k]),
      "data-domain": String(k),
    });
    input.addEventListener("input", () => {
      state.editScore(k, Number(input.value));
    });
    wrap.append(input, value);
    controls.append(wrap);
  });

  state.subscribe((snap) => {
    controls.querySelectorAll("span.value").forEach((node, k) => {
      node.textContent = snap.scores[k].toFixed(2);
    });
    status.textContent = snap.error
      ? `service error: ${snap.error} (showing last valid diagram)`
      : snap.pending
        ? "updating..."
        : snap.prediction
          ? `assigned: ${snap.prediction.label_names.join(", ") || "none"}`
          : "";
    status.className = snap.error ? "status error" : "status";
    if (snap.diagram) {
      diagramBox.innerHTML = renderDiagram(snap.diagram);
    }
  });

  diagramBox.addEventListener("mousemove", (event) => {
    const target = event.target as Element | null;
    const snap = state.snapshot();
    if (!target || !snap.diagram) return;
    let lines: InspectLine[] = [];
    if (target.classList.contains("cell")) {
      const [row, col] = (target.getAttribute("data-chart") ?? "0:0").split(":").map(Number);
      const chart = findChart(snap.diagram, row, col);
      const idx = Number(target.getAttribute("data-cell"));
      if (chart) {
        lines = inspectCell(snap.diagram, chart, idx);
        if (chart.kind === "matching" && chart.tag) {
          lines.push({ label: "row sum", value: String(contributionSum(chart)) });
        }
      }
    } else if (target.classList.contains("tag")) {
      const [row, col] = (target.getAttribute("data-chart") ?? "0:0").split(":").map(Number);
      const chart = findChart(snap.diagram, row, col);
      if (chart) lines = inspectTag(snap.diagram, chart);
    } else if (target.hasAttribute("data-config")) {
      lines = inspectConfig(snap.diagram);
    } else if (target.hasAttribute("data-tick")) {
      const idx = Number(target.getAttribute("data-tick"));
      lines = [{ label: "colorbar tick", value: String(snap.diagram.colorbar.ticks[idx]) }];
    }
    if (lines.length) {
      popover.innerHTML = popoverHtml(lines);
      popover.style.display = "block";
      popover.style.left = `${event.clientX + 12}px`;
      popover.style.top = `${event.clientY + 12}px`;
    } else {
      popover.style.display = "none";
    }
  });
  diagramBox.addEventListener("mouseleave", () => {
    popover.style.display = "none";
  });

  await state.refresh();
  return state;
}
