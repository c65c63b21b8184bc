/** Wire types of the review service JSON API. Field names mirror the
 * server payloads exactly; the UI never reshapes values, only displays
 * them. */

export const MULTICLASS_TAGS = ["IRONÍA", "NEGATIVO", "NEUTRO", "POSITIVO"] as const;
export type Tag = (typeof MULTICLASS_TAGS)[number];

export type Decision = "accept" | "override" | "unreadable";

export interface EntryPayload {
  id: string;
  text: string;
  label: string | null;
  category_encoded: number | null;
  provenance: string;
  version_tag: string;
}

export interface AnnotationPayload {
  entry_id: string;
  tag: string;
  explanation: string;
  raw_response: string;
  model_id: string;
  created_at: number;
}

export interface ReviewItemPayload {
  entry: EntryPayload;
  annotation: AnnotationPayload;
  status: string;
  assigned_to: string | null;
  lease_expiry: number | null;
  verdict: unknown | null;
  final_tag: string | null;
}

export interface NextResponse {
  item: ReviewItemPayload;
  server_now: number;
  /** items still waiting behind this one */
  pending: number;
}

export interface VerdictSubmission {
  entry_id: string;
  decision: Decision;
  override_tag?: string;
  reviewer_id: string;
}

export interface AgreementPayload {
  machine_counts: Record<string, number>;
  human_counts: Record<string, number>;
  unreadable_count: number;
  total: number;
  machine_pct: Record<string, number>;
  human_pct: Record<string, number>;
  unreadable_pct: number;
}

export interface DistributionPayload {
  counts: Record<string, number>;
  percentages: Record<string, number>;
  total: number;
}

export interface ProgressPayload {
  pending: number;
  assigned: number;
  resolved: number;
  total: number;
}

export interface StatsPayload {
  agreement: AgreementPayload;
  distribution: DistributionPayload | null;
  progress: ProgressPayload;
}

/** What the reviewer sees for one queue item. The explanation and the OCR
 * text are displayed verbatim, never truncated. */
export interface ReviewItemView {
  entryId: string;
  text: string;
  machineTag: string;
  explanation: string;
  /** items still waiting in the queue behind this one */
  queueRemaining: number;
  /** seconds of lease remaining at fetch time, by server clock */
  leaseSeconds: number | null;
  /** local timestamp (ms) when the item was received */
  receivedAt: number;
}
