// Model file loading and scoring. The file format comes from the trainer
// CLI (schema_version 1); scoring must agree with it to 1e-6, which the
// conformance fixture test pins down.

export type ProfileName = "laptop" | "smartphone";

export interface ModelFile {
  schemaVersion: number;
  profile: ProfileName;
  featureNames: string[];
  means: number[];
  stds: number[];
  weights: number[];
  intercept: number;
  pat: number;
  trainMeta: Record<string, unknown>;
}

export class ModelFileError extends Error {}

const MODEL_SCHEMA_VERSION = 1;

export function parseModelFile(text: string): ModelFile {
  let doc: any;
  try {
    doc = JSON.parse(text);
  } catch (e) {
    throw new ModelFileError(`model file is not valid JSON: ${(e as Error).message}`);
  }
  if (typeof doc !== "object" || doc === null) {
    throw new ModelFileError("model file must be a JSON object");
  }
  if (doc.schema_version !== MODEL_SCHEMA_VERSION) {
    throw new ModelFileError(`unsupported model schema_version ${doc.schema_version}`);
  }
  if (doc.profile !== "laptop" && doc.profile !== "smartphone") {
    throw new ModelFileError(`unknown profile ${doc.profile}`);
  }
  const arrays = ["feature_names", "means", "stds", "weights"] as const;
  for (const key of arrays) {
    if (!Array.isArray(doc[key])) {
      throw new ModelFileError(`model file missing array field ${key}`);
    }
  }
  const d = doc.feature_names.length;
  if (doc.means.length !== d || doc.stds.length !== d || doc.weights.length !== d) {
    throw new ModelFileError("weights/means/stds lengths do not match feature_names");
  }
  if (typeof doc.intercept !== "number" || typeof doc.pat !== "number") {
    throw new ModelFileError("intercept and pat must be numbers");
  }
  if (!(doc.pat >= 0.5 && doc.pat < 1.0)) {
    throw new ModelFileError(`pat must lie in [0.5, 1), got ${doc.pat}`);
  }
  return {
    schemaVersion: doc.schema_version,
    profile: doc.profile,
    featureNames: doc.feature_names.map(String),
    means: doc.means.map(Number),
    stds: doc.stds.map(Number),
    weights: doc.weights.map(Number),
    intercept: doc.intercept,
    pat: doc.pat,
    trainMeta: doc.train_meta ?? {},
  };
}

function sigmoid(z: number): number {
  if (z >= 0) {
    return 1.0 / (1.0 + Math.exp(-z));
  }
  const ez = Math.exp(z);
  return ez / (1.0 + ez);
}

// Raw (unstandardized) feature values in the model's feature order.
export function scoreVector(model: ModelFile, values: number[]): number {
  if (values.length !== model.weights.length) {
    throw new ModelFileError(
      `expected ${model.weights.length} feature values, got ${values.length}`
    );
  }
  let logit = model.intercept;
  for (let j = 0; j < values.length; j++) {
    const std = model.stds[j];
    const z = std > 0 ? (values[j] - model.means[j]) / std : 0.0;
    logit += model.weights[j] * z;
  }
  return sigmoid(logit);
}
