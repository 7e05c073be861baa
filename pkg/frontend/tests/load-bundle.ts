// Shared helper: evaluate the built ES5 bundle in a bare context and return
// the Zombitron global, so tests exercise the exact artifact we ship.
import { readFileSync } from "node:fs";
import { join, dirname } from "node:path";
import { fileURLToPath } from "node:url";
import vm from "node:vm";

export const BUNDLE_PATH = join(
  dirname(fileURLToPath(import.meta.url)), "..", "dist", "zombitron.js");

export function loadBundle(globals: Record<string, unknown> = {}): any {
  const source = readFileSync(BUNDLE_PATH, "utf8");
  const sandbox: any = { ...globals };
  vm.createContext(sandbox);
  vm.runInContext(source, sandbox, { filename: "zombitron.js" });
  return sandbox.Zombitron;
}
