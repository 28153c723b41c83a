export { AdapterError } from "./errors.js";
export { FVEC_MAGIC, FeatureSet, encodeFvec, decodeFvec, readFvec, writeFvec } from "./fvec.js";
export { DecodedImage, readPng, writeGrayPng, writeRgbPng } from "./png.js";
export {
  EMBEDDING_DIM,
  EmbeddingBackend,
  EmbeddingJob,
  EmbeddingResult,
  extractEmbeddings,
  histogramBackend,
  resizeRgb,
} from "./embed.js";
export {
  CLASS_COUNT,
  ConversionSpec,
  ConversionResult,
  DEFAULT_PALETTE,
  colorizeMask,
  convertPredictions,
  loadPaletteFile,
} from "./convert.js";
export { main } from "./cli.js";
