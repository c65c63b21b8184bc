import type { StatsPayload } from "./types.js";

export interface AgreementRow {
  tag: string;
  machinePct: number;
  humanPct: number;
}

export interface DistributionRow {
  label: string;
  count: number;
  percentage: number;
}

/** View model for the live dashboard.
 *
 * Every number here is a value from the /api/stats payload, verbatim; the
 * model only arranges rows. Unreadable has no machine-side share, so it is
 * a separate human-only field rather than an AgreementRow.
 */
export interface DashboardView {
  agreementRows: AgreementRow[];
  unreadableHumanPct: number;
  distributionRows: DistributionRow[];
  progress: { pending: number; assigned: number; resolved: number; total: number };
}

export function dashboardView(stats: StatsPayload): DashboardView {
  const { agreement, distribution, progress } = stats;
  const agreementRows = Object.keys(agreement.machine_pct).map((tag) => ({
    tag,
    machinePct: agreement.machine_pct[tag]!,
    humanPct: agreement.human_pct[tag] ?? 0,
  }));
  const distributionRows = distribution
    ? Object.keys(distribution.counts).map((label) => ({
        label,
        count: distribution.counts[label]!,
        percentage: distribution.percentages[label]!,
      }))
    : [];
  return {
    agreementRows,
    unreadableHumanPct: agreement.unreadable_pct,
    distributionRows,
    progress: { ...progress },
  };
}
