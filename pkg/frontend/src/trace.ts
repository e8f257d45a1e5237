// Trace recording in the trainer's JSON Lines format, so taps collected
// in the demo can round back into the CLI for retraining.

import { DemoSample } from "./features.js";
import { ProfileName } from "./model.js";

export interface RecordedTap {
  samples: DemoSample[];
}

const TRACE_SCHEMA_VERSION = 1;

function encodeNumber(v: number): string {
  // JSON.stringify emits shortest-round-trip doubles, matching the
  // trainer's float rendering
  return JSON.stringify(v);
}

export function buildTraceText(
  profile: ProfileName,
  samplingHz: number,
  surfaceId: string,
  taps: RecordedTap[]
): string {
  const lines: string[] = [
    `{"schema_version":${TRACE_SCHEMA_VERSION},"device_profile":"${profile}",` +
      `"sampling_hz":${encodeNumber(samplingHz)},"surface_id":${JSON.stringify(surfaceId)}}`,
  ];
  let lastT = -1;
  for (const tap of taps) {
    const n = tap.samples.length;
    if (n < 2) continue; // a Down with no Up would be malformed
    for (let i = 0; i < n; i++) {
      const s = tap.samples[i];
      // timestamps must be non-decreasing integers across the whole file
      let t = Math.max(Math.round(s.tUs), lastT);
      lastT = t;
      const phase = i === 0 ? "down" : i === n - 1 ? "up" : "move";
      const x = Math.min(1, Math.max(0, s.x));
      const y = Math.min(1, Math.max(0, s.y));
      const contact = Math.max(0, s.contactSize);
      lines.push(
        `{"t_us":${t},"x":${encodeNumber(x)},"y":${encodeNumber(y)},` +
          `"contact_size":${encodeNumber(contact)},"phase":"${phase}","power":"unknown"}`
      );
    }
  }
  return lines.join("\n") + "\n";
}

export class TraceRecorder {
  private taps: RecordedTap[] = [];
  private open: DemoSample[] | null = null;

  begin(sample: DemoSample): void {
    this.open = [sample];
  }

  move(sample: DemoSample): void {
    if (this.open) this.open.push(sample);
  }

  end(sample: DemoSample): void {
    if (!this.open) return;
    this.open.push(sample);
    if (this.open.length >= 2) {
      this.taps.push({ samples: this.open });
    }
    this.open = null;
  }

  count(): number {
    return this.taps.length;
  }

  export(profile: ProfileName, samplingHz: number, surfaceId: string): string {
    return buildTraceText(profile, samplingHz, surfaceId, this.taps);
  }
}
