// Browser glue: fetch the bundle (or take one from the file picker), keep a
// SessionState, and re-render on every interaction. All the logic lives in
// the pure modules; this file only touches the DOM.

import { parseBundleText, parseReportText, sha256Hex } from "./bundle.js";
import { applyFlags, exportFlags, importFlags } from "./flags.js";
import { renderGrid, renderSidebar } from "./render.js";
import {
  hoverLink,
  newSession,
  setAngle,
  setDelta,
  setStandardized,
  setView,
  toggleFlag,
  togglePin,
} from "./state.js";
import type { Report, SessionState, View } from "./types.js";

let state: SessionState | null = null;
let report: Report | null = null;
let bundleHash = "";

function $(sel: string): HTMLElement {
  const el = document.querySelector(sel);
  if (!el) throw new Error(`missing element ${sel}`);
  return el as HTMLElement;
}

function banner(message: string): void {
  $("#grid").innerHTML = `<div class="error-banner" role="alert">${message}</div>`;
}

function rerender(): void {
  if (!state) return;
  $("#grid").innerHTML = renderGrid(state, report);
  $("#sidebar").innerHTML = renderSidebar(state, report);
  const slider = $("#delta") as HTMLInputElement;
  slider.value = String(state.delta);
  $("#delta-value").textContent = state.delta.toFixed(2);
}

async function loadBytes(bytes: ArrayBuffer, label: string): Promise<void> {
  try {
    const text = new TextDecoder().decode(bytes);
    bundleHash = await sha256Hex(bytes);
    state = newSession(parseBundleText(text));
    $("#source").textContent = `${label} · sha256 ${bundleHash.slice(0, 12)}`;
    rerender();
  } catch (e) {
    banner((e as Error).message);
  }
}

async function loadFromServer(): Promise<boolean> {
  try {
    const res = await fetch("/api/bundle");
    if (!res.ok) return false;
    const bytes = await res.arrayBuffer();
    try {
      const rres = await fetch("/api/report");
      report = rres.ok ? parseReportText(await rres.text()) : null;
    } catch {
      report = null;
    }
    await loadBytes(bytes, "/api/bundle");
    return true;
  } catch {
    return false; // serverless mode: wait for the file picker
  }
}

function wire(): void {
  const grid = $("#grid");
  grid.addEventListener("mouseover", (ev) => {
    const target = (ev.target as Element).closest("[data-id]");
    if (state && target) {
      state = hoverLink(state, target.getAttribute("data-id"));
      rerender();
    }
  });
  grid.addEventListener("mouseleave", () => {
    if (state && state.hoveredId !== null) {
      state = hoverLink(state, null);
      rerender();
    }
  });
  grid.addEventListener("click", (ev) => {
    const target = (ev.target as Element).closest("[data-id]");
    if (state && target) {
      state = togglePin(state, target.getAttribute("data-id")!);
      rerender();
    }
  });
  $("#sidebar").addEventListener("click", (ev) => {
    const li = (ev.target as Element).closest("li[data-id]");
    if (!state || !li) return;
    const id = li.getAttribute("data-id")!;
    state = (ev as MouseEvent).shiftKey ? toggleFlag(state, id) : togglePin(state, id);
    rerender();
  });
  ($("#delta") as HTMLInputElement).addEventListener("input", (ev) => {
    if (!state) return;
    state = setDelta(state, Number((ev.target as HTMLInputElement).value));
    rerender();
  });
  ($("#view") as HTMLSelectElement).addEventListener("change", (ev) => {
    if (!state) return;
    state = setView(state, (ev.target as HTMLSelectElement).value as View);
    rerender();
  });
  ($("#angle") as HTMLSelectElement).addEventListener("change", (ev) => {
    if (!state) return;
    state = setAngle(state, Number((ev.target as HTMLSelectElement).value));
    rerender();
  });
  ($("#standardized") as HTMLInputElement).addEventListener("change", (ev) => {
    if (!state) return;
    state = setStandardized(state, (ev.target as HTMLInputElement).checked);
    rerender();
  });
  $("#flag-hovered").addEventListener("click", () => {
    if (state && state.hoveredId !== null) {
      state = toggleFlag(state, state.hoveredId);
      rerender();
    }
  });
  $("#export").addEventListener("click", () => {
    if (!state) return;
    const blob = new Blob([exportFlags(state, bundleHash)], { type: "application/json" });
    const a = document.createElement("a");
    a.href = URL.createObjectURL(blob);
    a.download = "flags.json";
    a.click();
    URL.revokeObjectURL(a.href);
  });
  ($("#import") as HTMLInputElement).addEventListener("change", async (ev) => {
    const file = (ev.target as HTMLInputElement).files?.[0];
    if (!state || !file) return;
    try {
      state = applyFlags(state, importFlags(await file.text(), bundleHash));
      rerender();
    } catch (e) {
      alert((e as Error).message);
    }
  });
  ($("#picker") as HTMLInputElement).addEventListener("change", async (ev) => {
    const file = (ev.target as HTMLInputElement).files?.[0];
    if (!file) return;
    report = null;
    await loadBytes(await file.arrayBuffer(), file.name);
    if (state) populateAngleOptions();
  });
}

function populateAngleOptions(): void {
  if (!state) return;
  const sel = $("#angle") as HTMLSelectElement;
  sel.innerHTML = state.bundle.angles
    .map((a, i) => `<option value="${i}">α = ${a.alpha.toFixed(3)}</option>`)
    .join("");
}

window.addEventListener("DOMContentLoaded", async () => {
  wire();
  const ok = await loadFromServer();
  if (ok) {
    populateAngleOptions();
  } else {
    $("#source").textContent = "no server — pick a bundle file";
  }
});
