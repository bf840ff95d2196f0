import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { parseBundleText, parseReportText } from "../src/bundle.js";
import type { Bundle, Report } from "../src/types.js";

const here = dirname(fileURLToPath(import.meta.url));

export function fixtureText(name: string): string {
  return readFileSync(join(here, "fixtures", name), "utf8");
}

export function fixtureBytes(name: string): Uint8Array {
  return new Uint8Array(readFileSync(join(here, "fixtures", name)));
}

export function demoBundle(): Bundle {
  return parseBundleText(fixtureText("demo.bundle.json"));
}

export function demoReport(): Report {
  return parseReportText(fixtureText("demo.report.json"));
}

export function demoReportAtDelta(): Report {
  return parseReportText(fixtureText("demo.report.d42.json"));
}

/** A tiny hand-checkable bundle: 2 observations, 3 grid points, 1 angle. */
export function miniBundle(): Bundle {
  return parseBundleText(
    JSON.stringify({
      ids: ["a", "b"],
      delta_grid: [0.25, 0.5, 1.0],
      angles: [
        {
          alpha: 0.7853981633974483,
          q_bar: [
            [0.1, 0.2, 0.4],
            [0.2, 0.3, 0.5],
          ],
          q_tilde: [
            [0.25, 0.5, 1.0],
            [0.4, null, 1.0],
          ],
          dq: [
            [0.4, 0.4, 0.4],
            [0.4, 0.4, 0.4],
          ],
          zero_interval_mean: [0.0, 0.1],
        },
      ],
      config: {},
      flags: {},
    }),
  );
}
