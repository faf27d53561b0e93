/**
 * Thin client for the obbkit core, for driving label assignment and
 * evaluation from a TypeScript training or analysis loop.  Nothing is
 * reimplemented here: every call marshals its arrays into the CLI's
 * documented file formats, runs the subcommand, and parses the output, so
 * results are bit-equal to what the CLI writes.
 */

import * as path from "node:path";

import { parseCsvRow, readLines, runCli, withTempDir, writeLines } from "./runner.js";

export const VERSION = "0.1.0";

/** A rotated box: [cx, cy, w, h, theta], theta in radians. */
export type Box5 = [number, number, number, number, number];

export interface TargetBox {
  box: Box5;
  classId: number;
  difficult?: boolean;
}

export interface AssignOptions {
  alpha?: number;
  gamma?: number;
  stage?: "refinement" | "detection";
  /** Overrides the stage's positive threshold (0.4 / 0.6). */
  threshold?: number;
}

export interface AssignResult {
  /** 1 for positive anchors, 0 for negative. */
  labels: number[];
  /** Matched target index per anchor; -1 when there are no targets. */
  matched: number[];
  matchingDegree: number[];
  weights: number[];
}

export interface Detection {
  imageId: string;
  box: Box5;
  classId: number;
  score: number;
}

export interface GroundTruth {
  imageId: string;
  box: Box5;
  classId: number;
  difficult?: boolean;
}

export interface EvaluateOptions {
  /** Match threshold for TP/FP decisions (default 0.5). */
  iouThreshold?: number;
  /** Per image-class NMS threshold; omit to evaluate detections as-is. */
  nmsThreshold?: number;
}

export interface MapResult {
  perClass: Record<number, number>;
  mAP: number;
}

function boxLine(b: Box5): string {
  return b.join(" ");
}

function checkBox(b: Box5, what: string): void {
  if (!Array.isArray(b) || b.length !== 5) {
    throw new Error(`${what} must be [cx, cy, w, h, theta], got length ${(b as number[]).length}`);
  }
}

/**
 * Pairwise rotated IoU between two box lists, as an a.length x b.length
 * matrix.  Empty inputs short-circuit to empty matrices.
 */
export function batchRotatedIou(a: Box5[], b: Box5[]): number[][] {
  a.forEach((x) => checkBox(x, "box in a"));
  b.forEach((x) => checkBox(x, "box in b"));
  if (a.length === 0) {
    return [];
  }
  if (b.length === 0) {
    return a.map(() => []);
  }
  return withTempDir((dir) => {
    const fileA = path.join(dir, "a.txt");
    const fileB = path.join(dir, "b.txt");
    const out = path.join(dir, "iou.csv");
    writeLines(fileA, a.map(boxLine));
    writeLines(fileB, b.map(boxLine));
    runCli(["iou", fileA, fileB, "-o", out]);
    const rows = readLines(out).map(parseCsvRow);
    if (rows.length !== a.length) {
      throw new Error(`expected ${a.length} rows, got ${rows.length}`);
    }
    return rows;
  });
}

/**
 * Matching-degree label assignment for one image's anchors.  regressed[i]
 * must be the decoded prediction for anchors[i].
 */
export function batchAssign(
  anchors: Box5[],
  regressed: Box5[],
  targets: TargetBox[],
  options: AssignOptions = {},
): AssignResult {
  if (anchors.length !== regressed.length) {
    throw new Error(`anchors (${anchors.length}) and regressed (${regressed.length}) differ in length`);
  }
  anchors.forEach((x) => checkBox(x, "anchor"));
  regressed.forEach((x) => checkBox(x, "regressed box"));
  targets.forEach((t) => checkBox(t.box, "target box"));
  return withTempDir((dir) => {
    const dump = path.join(dir, "dump.jsonl");
    const out = path.join(dir, "assign.jsonl");
    writeLines(dump, [
      JSON.stringify({
        schema_version: 1,
        image_id: "batch",
        anchors,
        regressed,
        targets: targets.map((t) => ({
          box: t.box,
          class: t.classId,
          difficult: t.difficult ?? false,
        })),
      }),
    ]);
    const args = ["assign", "--dump", dump, "-o", out];
    if (options.alpha !== undefined) args.push("--alpha", String(options.alpha));
    if (options.gamma !== undefined) args.push("--gamma", String(options.gamma));
    if (options.stage !== undefined) args.push("--stage", options.stage);
    if (options.threshold !== undefined) args.push("--threshold", String(options.threshold));
    runCli(args);
    const record = JSON.parse(readLines(out)[0]);
    return {
      labels: record.labels,
      matched: record.matched,
      matchingDegree: record.matching_degree,
      weights: record.weights,
    };
  });
}

/**
 * Per-class average precision and its mean, over all classes present in
 * the ground truth.  Detections are evaluated as-is unless nmsThreshold
 * is given.
 */
export function evaluateMap(
  detections: Detection[],
  groundTruths: GroundTruth[],
  variant: "voc07" | "voc12",
  options: EvaluateOptions = {},
): MapResult {
  detections.forEach((d) => checkBox(d.box, "detection box"));
  groundTruths.forEach((g) => checkBox(g.box, "ground-truth box"));
  return withTempDir((dir) => {
    const detFile = path.join(dir, "dets.jsonl");
    const annFile = path.join(dir, "ann.jsonl");
    const out = path.join(dir, "ap.csv");

    writeLines(
      detFile,
      detections.map((d) =>
        JSON.stringify({
          schema_version: 1,
          image_id: d.imageId,
          box: d.box,
          class: d.classId,
          score: d.score,
        }),
      ),
    );

    const byImage = new Map<string, GroundTruth[]>();
    for (const g of groundTruths) {
      const group = byImage.get(g.imageId) ?? [];
      group.push(g);
      byImage.set(g.imageId, group);
    }
    writeLines(
      annFile,
      [...byImage.entries()].map(([imageId, group]) =>
        JSON.stringify({
          schema_version: 1,
          image_id: imageId,
          width: 0,
          height: 0,
          objects: group.map((g) => ({
            box: g.box,
            class: g.classId,
            difficult: g.difficult ?? false,
          })),
        }),
      ),
    );

    const args = ["eval", "--detections", detFile, "--annotations", annFile,
                  "--variant", variant, "-o", out];
    if (options.iouThreshold !== undefined) {
      args.push("--iou-threshold", String(options.iouThreshold));
    }
    if (options.nmsThreshold === undefined) {
      args.push("--no-nms");
    } else {
      args.push("--nms-threshold", String(options.nmsThreshold));
    }
    runCli(args);

    const perClass: Record<number, number> = {};
    let mAP = 0;
    for (const line of readLines(out).slice(1)) {
      const [cls, metric, value] = line.split(",");
      if (metric === "AP") {
        perClass[Number(cls)] = Number(value);
      } else if (metric === "mAP") {
        mAP = Number(value);
      }
    }
    return { perClass, mAP };
  });
}
