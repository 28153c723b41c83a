#!/usr/bin/env node
/**
 * Command-line entry: `embed` turns an image directory into an FVEC
 * feature file, `convert` turns external prediction masks into toolkit
 * mask PNGs. Errors print one `error: <kind>: <message>` line and exit
 * 1; usage problems exit 2.
 */
import { parseArgs } from "node:util";

import { convertPredictions, ConversionSpec, DEFAULT_PALETTE, loadPaletteFile } from "./convert.js";
import { AdapterError } from "./errors.js";
import { extractEmbeddings } from "./embed.js";

const USAGE = `usage: mapforge-adapter <command> [options]

commands:
  embed    --dir <images> --out <file.fvec> [--batch <n>]
  convert  --src <masks> --out <dir> [--palette <file.json> | --index]

embed writes 2048-wide embeddings for every readable .png in --dir,
plus a .notes.json sidecar describing the backend and preprocessing.
convert defaults to palette mode with the built-in inspection palette;
--index instead validates and copies index masks unchanged.`;

class UsageError extends Error {}

function usageError(message: string): never {
  throw new UsageError(message);
}

async function runEmbed(argv: string[]): Promise<void> {
  const { values } = parseArgs({
    args: argv,
    options: {
      dir: { type: "string" },
      out: { type: "string" },
      batch: { type: "string", default: "16" },
    },
  });
  if (!values.dir || !values.out) {
    usageError("embed needs --dir and --out");
  }
  const batch = Number(values.batch);
  if (!Number.isInteger(batch) || batch < 1) {
    usageError(`--batch must be a positive integer, got ${values.batch}`);
  }
  const result = await extractEmbeddings({
    imageDir: values.dir,
    outPath: values.out,
    batchSize: batch,
  });
  for (const name of result.skipped) {
    console.error(`skipped unreadable image: ${name}`);
  }
  console.error(`wrote ${result.written} embeddings -> ${result.outPath}`);
}

function runConvert(argv: string[]): void {
  const { values } = parseArgs({
    args: argv,
    options: {
      src: { type: "string" },
      out: { type: "string" },
      palette: { type: "string" },
      index: { type: "boolean", default: false },
    },
  });
  if (!values.src || !values.out) {
    usageError("convert needs --src and --out");
  }
  if (values.index && values.palette) {
    usageError("--index and --palette are mutually exclusive");
  }
  let spec: ConversionSpec;
  if (values.index) {
    spec = { kind: "index" };
  } else if (values.palette) {
    spec = { kind: "palette", palette: loadPaletteFile(values.palette) };
  } else {
    spec = { kind: "palette", palette: DEFAULT_PALETTE };
  }
  const result = convertPredictions(values.src, values.out, spec);
  console.error(`converted ${result.converted} masks -> ${result.outDir}`);
}

export async function main(argv: string[]): Promise<number> {
  const [command, ...rest] = argv;
  try {
    if (command === "embed") {
      await runEmbed(rest);
    } else if (command === "convert") {
      runConvert(rest);
    } else if (command === "--help" || command === "-h") {
      console.log(USAGE);
    } else {
      usageError(command ? `unknown command ${command}` : "missing command");
    }
  } catch (err) {
    if (err instanceof UsageError) {
      console.error(`error: usage: ${err.message}`);
      console.error(USAGE);
      return 2;
    }
    if (err instanceof AdapterError) {
      console.error(`error: ${err.kind}: ${err.message}`);
      return 1;
    }
    // parseArgs throws plain errors for unknown flags
    if ((err as NodeJS.ErrnoException).code?.startsWith("ERR_PARSE_ARGS")) {
      console.error(`error: usage: ${(err as Error).message}`);
      console.error(USAGE);
      return 2;
    }
    throw err;
  }
  return 0;
}

const isDirectRun = process.argv[1]?.endsWith("cli.js") || process.argv[1]?.endsWith("mapforge-adapter");
if (isDirectRun) {
  main(process.argv.slice(2)).then(
    (code) => process.exit(code),
    (err) => {
      console.error(`error: internal: ${(err as Error).message}`);
      process.exit(1);
    },
  );
}
