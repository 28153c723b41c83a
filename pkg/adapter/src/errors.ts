/** Domain error with a stable kind tag so the CLI can report uniformly. */
export class AdapterError extends Error {
  kind: string;

  constructor(kind: string, message: string) {
    super(message);
    this.name = "AdapterError";
    this.kind = kind;
  }
}

export function formatError(message: string, offset?: number): AdapterError {
  const suffix = offset === undefined ? "" : ` (byte offset ${offset})`;
  return new AdapterError("format", message + suffix);
}

export function validationError(message: string): AdapterError {
  return new AdapterError("validation", message);
}

export function assetError(message: string): AdapterError {
  return new AdapterError("asset", message);
}
