#!/usr/bin/env node
/**
 * fintopics-encode encode --model <id> --input <jsonl> --output <ftsvec>
 *                        [--batch-size N] [--no-normalize] [--device <hint>]
 */

import { EmptyInput, encodeFile } from "./encode.js";
import { ModelLoadError } from "./encoders.js";

function usage(): never {
  console.error(
    "usage: fintopics-encode encode --model <id> --input <jsonl> --output <ftsvec>\n" +
      "                               [--batch-size N] [--no-normalize] [--device <hint>]\n" +
      '  model ids: "hash:<dim>" for the built-in deterministic encoder,\n' +
      "  or a sentence-transformer identifier served via transformers.js",
  );
  process.exit(2);
}

function parseArgs(argv: string[]) {
  if (argv[0] !== "encode") usage();
  const opts: Record<string, string | boolean> = {};
  for (let i = 1; i < argv.length; i++) {
    const arg = argv[i];
    if (arg === "--no-normalize") {
      opts.noNormalize = true;
    } else if (arg.startsWith("--")) {
      const value = argv[++i];
      if (value === undefined) usage();
      opts[arg.slice(2)] = value;
    } else {
      usage();
    }
  }
  if (!opts.model || !opts.input || !opts.output) usage();
  return {
    model: String(opts.model),
    input: String(opts.input),
    output: String(opts.output),
    batchSize: opts["batch-size"] ? Number(opts["batch-size"]) : undefined,
    normalize: !opts.noNormalize,
    device: opts.device ? String(opts.device) : undefined,
  };
}

async function main() {
  const config = parseArgs(process.argv.slice(2));
  try {
    const { rows, dim } = await encodeFile(config);
    console.log(`wrote ${rows} rows (dim ${dim}) to ${config.output}`);
  } catch (err) {
    if (err instanceof EmptyInput || err instanceof ModelLoadError) {
      console.error(`error: ${(err as Error).message}`);
      process.exit(1);
    }
    throw err;
  }
}

main();
