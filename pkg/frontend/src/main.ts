// Page wiring: pointer events in, pane flashes and tallies out.
//
// Left pane reacts per the loaded model's immediate decision; right pane
// is the conventional wait-for-the-window detector. Taps are recorded in
// the trainer's trace format for download.

import { DemoSession, FiredEvent, TallyRow, cellCounts } from "./detector.js";
import { DemoSample, TapBuffer, featureValues } from "./features.js";
import { ModelFile, parseModelFile, scoreVector } from "./model.js";
import { TraceRecorder } from "./trace.js";

const THRESHOLD_US = 500_000;

let model: ModelFile | null = null;
let session: DemoSession | null = null;
const tallies: TallyRow[] = [];
const recorder = new TraceRecorder();
let openTap: TapBuffer | null = null;
let sawRealContact = false;

const $ = (id: string) => document.getElementById(id) as HTMLElement;

function nowUs(): number {
  return Math.round(performance.now() * 1000);
}

function flash(pane: "predictive" | "conventional", kind: "single" | "double") {
  const el = $(pane === "predictive" ? "pane-left" : "pane-right");
  const label = el.querySelector(".last-event") as HTMLElement;
  label.textContent = kind === "single" ? "single tap" : "double tap";
  el.classList.remove("flash-single", "flash-double");
  void el.offsetWidth; // restart the animation
  el.classList.add(kind === "single" ? "flash-single" : "flash-double");
}

function handleFired(events: FiredEvent[]) {
  for (const ev of events) {
    flash(ev.pane, ev.kind);
  }
}

function pushTally(row: TallyRow | null) {
  if (!row) return;
  tallies.push(row);
  const counts = cellCounts(tallies);
  $("cell-a").textContent = String(counts.A);
  $("cell-b").textContent = String(counts.B);
  $("cell-c").textContent = String(counts.C);
  $("cell-d").textContent = String(counts.D);
  const saved = tallies.reduce((acc, r) => acc + r.latencySavedUs, 0);
  $("saved-total").textContent = (saved / 1000).toFixed(0) + " ms";
  const log = $("tap-log");
  const line = document.createElement("div");
  line.textContent =
    `#${row.tapId} truth=${row.truth} predicted=${row.predicted} ` +
    `cell=${row.cell} saved=${(row.latencySavedUs / 1000).toFixed(0)}ms`;
  log.prepend(line);
  while (log.childElementCount > 12) log.removeChild(log.lastChild as Node);
}

let timerHandle: number | null = null;

function armTimer() {
  if (!session) return;
  if (timerHandle !== null) window.clearTimeout(timerHandle);
  const deadline = session.nextDeadlineUs();
  if (deadline === null) return;
  const delayMs = Math.max(0, (deadline - nowUs()) / 1000);
  timerHandle = window.setTimeout(() => {
    if (!session) return;
    handleFired(session.advanceTo(nowUs()));
    pushTally(session.takeResolved());
    armTimer();
  }, delayMs + 1);
}

function surfaceSample(evt: PointerEvent): DemoSample {
  const area = $("tap-area");
  const rect = area.getBoundingClientRect();
  const contact = Math.max(evt.width, evt.height) / 2;
  if (contact > 1) sawRealContact = true;
  return {
    tUs: nowUs(),
    x: Math.min(1, Math.max(0, (evt.clientX - rect.left) / rect.width)),
    y: Math.min(1, Math.max(0, (evt.clientY - rect.top) / rect.height)),
    contactSize: contact,
  };
}

function setupTapArea() {
  const area = $("tap-area");
  area.addEventListener("pointerdown", (evt) => {
    if (!session || !model) return;
    evt.preventDefault();
    const s = surfaceSample(evt);
    openTap = { samples: [s], contactSizeAvailable: sawRealContact };
    recorder.begin(s);
    handleFired(session.pointerDown(s.tUs));
    pushTally(session.takeResolved());
    armTimer();
  });
  area.addEventListener("pointermove", (evt) => {
    if (!openTap || evt.buttons === 0) return;
    const s = surfaceSample(evt);
    openTap.samples.push(s);
    recorder.move(s);
  });
  const finish = (evt: PointerEvent) => {
    if (!session || !model || !openTap) return;
    evt.preventDefault();
    const s = surfaceSample(evt);
    openTap.samples.push(s);
    recorder.end(s);
    openTap.contactSizeAvailable = sawRealContact;
    const values = featureValues(model, openTap);
    const score = scoreVector(model, values);
    $("last-score").textContent = score.toFixed(4);
    const { fired, tally } = session.pointerUp(s.tUs, score);
    handleFired(fired);
    pushTally(session.takeResolved());
    pushTally(tally);
    openTap = null;
    armTimer();
  };
  area.addEventListener("pointerup", finish);
  area.addEventListener("pointercancel", () => {
    openTap = null;
  });
}

function activateModel(text: string) {
  try {
    model = parseModelFile(text);
  } catch (e) {
    $("model-status").textContent = `model load failed: ${(e as Error).message}`;
    model = null;
    session = null;
    $("tap-area").classList.add("disabled");
    return;
  }
  const slider = $("pat-slider") as HTMLInputElement;
  slider.value = model.pat.toFixed(2);
  session = new DemoSession(THRESHOLD_US, model.pat);
  tallies.length = 0;
  $("model-status").textContent =
    `model loaded: ${model.profile}, ${model.featureNames.length} features, ` +
    `activation threshold ${model.pat}`;
  $("pat-value").textContent = model.pat.toFixed(2);
  $("tap-area").classList.remove("disabled");
}

function setupControls() {
  const input = $("model-file") as HTMLInputElement;
  input.addEventListener("change", async () => {
    const file = input.files?.[0];
    if (file) activateModel(await file.text());
  });
  const slider = $("pat-slider") as HTMLInputElement;
  slider.addEventListener("input", () => {
    const v = Number(slider.value);
    $("pat-value").textContent = v >= 1.0 ? "1.00 (never fire early)" : v.toFixed(2);
    session?.setPat(v);
  });
  $("download-trace").addEventListener("click", () => {
    const text = recorder.export(model?.profile ?? "smartphone", 60, "webdemo");
    const blob = new Blob([text], { type: "application/jsonl" });
    const a = document.createElement("a");
    a.href = URL.createObjectURL(blob);
    a.download = "webdemo.trace.jsonl";
    a.click();
    URL.revokeObjectURL(a.href);
  });
  $("contact-note").textContent = sawRealContact
    ? "contact size: reported by this device"
    : "contact size: not reported here; using the training mean";
}

async function boot() {
  setupTapArea();
  setupControls();
  try {
    const resp = await fetch("fixtures/model.json");
    if (resp.ok) activateModel(await resp.text());
  } catch {
    $("model-status").textContent = "load a model file to begin";
  }
}

boot();
