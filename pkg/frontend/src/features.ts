// Build the model's raw feature vector from a buffered tap (the pointer
// samples between down and up). Mirrors the trainer's extraction rules:
// completion in seconds, signed displacement, velocity 0 for zero-length
// taps, power flag 0 unless on battery.

import { ModelFile } from "./model.js";

export interface DemoSample {
  tUs: number;
  x: number; // normalized to the tap surface, origin upper-left
  y: number;
  contactSize: number; // 0 when the browser reports nothing useful
}

export interface TapBuffer {
  samples: DemoSample[];
  contactSizeAvailable: boolean;
}

export function featureValues(model: ModelFile, tap: TapBuffer): number[] {
  const first = tap.samples[0];
  const last = tap.samples[tap.samples.length - 1];
  const completionS = (last.tUs - first.tUs) / 1e6;
  let maxContact = 0;
  for (const s of tap.samples) {
    if (s.contactSize > maxContact) maxContact = s.contactSize;
  }
  if (!tap.contactSizeAvailable) {
    // neutral fallback: the training mean standardizes to 0, so an
    // uninformative sensor contributes nothing instead of garbage
    const idx = model.featureNames.indexOf("max_contact_size");
    maxContact = idx >= 0 ? model.means[idx] : 0;
  }
  if (model.profile === "smartphone") {
    return [completionS, maxContact];
  }
  const dx = last.x - first.x;
  const dy = last.y - first.y;
  const vx = completionS > 0 ? dx / completionS : 0;
  const vy = completionS > 0 ? dy / completionS : 0;
  return [
    completionS,
    maxContact,
    vx,
    vy,
    dx,
    dy,
    first.x,
    first.y,
    last.x,
    last.y,
    0, // power flag: browsers do not expose this; AC assumed
  ];
}
