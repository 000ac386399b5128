/** Errors carry the engine's own error names, so callers can switch on
 * `err.name` exactly as Python callers switch on the exception class. */

export class ProjpoolError extends Error {
  constructor(name: string, message: string) {
    super(message);
    this.name = name;
  }
}

/** Names raised by the engine; anything else maps to the generic name. */
export const ENGINE_ERROR_NAMES = new Set([
  "TooFewVertices",
  "SelfIntersecting",
  "DegenerateArea",
  "CoincidentPoint",
  "CameraInsidePolygon",
  "IntersectingPolygons",
  "EmptyResult",
  "InvalidThickness",
  "DegenerateRange",
  "MissingStripe",
  "DepthMismatch",
  "WidthMismatch",
  "ShapeMismatch",
  "IndivisibleHeight",
  "WrongRank",
  "ParseError",
  "ValidationError",
  "BadMagic",
  "UnsupportedVersion",
  "TruncatedPayload",
  "PolarLatitude",
  "GenerationError",
]);

/** CLI failures print `error: <Name>: <message>` on stderr. */
export function errorFromCli(stderr: string, exitCode: number | null): ProjpoolError {
  const m = stderr.match(/error:\s*([A-Za-z_][A-Za-z0-9_]*):\s*([\s\S]*)/);
  if (m && ENGINE_ERROR_NAMES.has(m[1])) {
    return new ProjpoolError(m[1], m[2].trim());
  }
  if (m) {
    return new ProjpoolError(m[1], m[2].trim());
  }
  return new ProjpoolError(
    "ProjpoolError",
    `projpool exited with code ${exitCode}: ${stderr.trim()}`,
  );
}
