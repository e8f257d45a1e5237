import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { featureValues } from "../src/features.js";
import { parseModelFile } from "../src/model.js";

const here = dirname(fileURLToPath(import.meta.url));
const model = parseModelFile(
  readFileSync(join(here, "..", "fixtures", "model.json"), "utf8")
);

describe("feature extraction", () => {
  it("computes completion and max contact for the smartphone profile", () => {
    const values = featureValues(model, {
      samples: [
        { tUs: 0, x: 0.4, y: 0.5, contactSize: 3.0 },
        { tUs: 50_000, x: 0.41, y: 0.5, contactSize: 4.2 },
        { tUs: 120_000, x: 0.41, y: 0.51, contactSize: 3.5 },
      ],
      contactSizeAvailable: true,
    });
    expect(values).toHaveLength(2);
    expect(values[0]).toBeCloseTo(0.12, 12);
    expect(values[1]).toBe(4.2);
  });

  it("falls back to the training mean when contact size is unsupported", () => {
    const values = featureValues(model, {
      samples: [
        { tUs: 0, x: 0.4, y: 0.5, contactSize: 0 },
        { tUs: 100_000, x: 0.4, y: 0.5, contactSize: 0 },
      ],
      contactSizeAvailable: false,
    });
    expect(values[1]).toBe(model.means[1]); // standardizes to exactly 0
  });

  it("zero-duration taps get zero velocity on the laptop profile", () => {
    const laptopModel = { ...model, profile: "laptop" as const };
    const values = featureValues(laptopModel, {
      samples: [
        { tUs: 10, x: 0.2, y: 0.3, contactSize: 1 },
        { tUs: 10, x: 0.25, y: 0.3, contactSize: 1 },
      ],
      contactSizeAvailable: true,
    });
    expect(values).toHaveLength(11);
    expect(values[2]).toBe(0); // velocity x
    expect(values[4]).toBeCloseTo(0.05, 12); // displacement keeps its sign
  });
});
