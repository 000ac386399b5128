import { spawnSync } from "child_process";
import * as fs from "fs";
import * as os from "os";
import * as path from "path";

export function cli(args: string[]): { status: number | null; stdout: string; stderr: string } {
  const res = spawnSync(process.env.PROJPOOL_BIN ?? "projpool", args, {
    encoding: "utf8",
  });
  if (res.error) throw res.error;
  return { status: res.status, stdout: res.stdout, stderr: res.stderr };
}

export function tempDir(): string {
  return fs.mkdtempSync(path.join(os.tmpdir(), "projpool-test-"));
}

export interface Fixture {
  dir: string;
  scenePath: string;
  sceneText: string;
  cameras: { stripe_width: number }[];
}

/** Deterministic scene fixture generated by the engine itself. */
export function makeFixture(seed: number, extra: string[] = []): Fixture {
  const dir = tempDir();
  const scenePath = path.join(dir, "scene.json");
  const res = cli([
    "synth", "--seed", String(seed), "--vertices", "10", "--cameras", "2",
    "--out", scenePath, ...extra,
  ]);
  if (res.status !== 0) throw new Error(`synth failed: ${res.stderr}`);
  const sceneText = fs.readFileSync(scenePath, "utf8");
  return { dir, scenePath, sceneText, cameras: JSON.parse(sceneText).cameras };
}

/** Exactly representable stripe values so float comparisons can be ===. */
export function patternStripe(width: number, depth: number, phase: number): Float32Array {
  const data = new Float32Array(width * depth);
  for (let x = 0; x < width; x++) {
    for (let c = 0; c < depth; c++) {
      data[x * depth + c] = ((x + phase) % 7) - 2 + c * 0.5;
    }
  }
  return data;
}
