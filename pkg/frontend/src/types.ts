// Wire types of the design-search API.

export interface OcrDistribution {
  length: number;
  positions: Record<string, number>[];
}

export interface CellDocument {
  id: string;
  bbox: [number, number, number, number];
  text: string | null;
  ocr?: OcrDistribution | null;
}

export interface LabelEntry {
  cell: string;
  index: number | null;
}

export interface DrawingDocument {
  id: string;
  cells: CellDocument[];
  labels: Record<string, LabelEntry[]>;
  visual_features: number[] | null;
}

export interface QueryRequest {
  document: DrawingDocument;
  alpha: number;
  k: number;
}

export interface RankEntry {
  id: string;
  sim_tabular: number;
  sim_visual: number | null;
  combined: number;
  rank: number;
}

export type PatternStatus = "true" | "false" | "unknown";

export interface ProvenanceEntry {
  pattern: string;
  status: PatternStatus;
}

export interface QueryResponse {
  results: RankEntry[];
  provenance: ProvenanceEntry[];
}

export interface HealthResponse {
  status: string;
  designs: number;
  patterns: number;
}

export interface ApiError {
  code: string;
  message: string;
}
