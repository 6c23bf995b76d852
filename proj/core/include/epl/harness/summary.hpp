#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "epl/harness/montecarlo.hpp"

namespace epl::harness {

/// log10 differences are floored here; an exact match prints as "< -15".
inline constexpr double kLogDiffFloor = -15.0;

struct SummaryCell {
    std::string method;
    int k = kInfinity;
    std::string stat;
    double value = 0.0;
};

struct Summary {
    std::vector<SummaryCell> cells;

    /// NaN when the cell does not exist.
    double get(const std::string& method, int k, const std::string& stat) const;
};

/// Mode-comparison statistics per (method, k) against the epl-anal baseline:
///   diff_mean, diff_max        log10 ||theta - theta_anal||_inf over paired reps
///   iter_median, iter_max, nonconv_pct (k = inf only)
///   time_total, time_mean, time_median, time_med_per_iter
/// EPL-vs-NFXP statistics when nfxp-jf is present (cells under method "epl-jf-vs-nfxp-jf"
/// for the diff, plus time_mean / time_std for epl-jf and nfxp-jf at k = inf).
/// Throws InvalidInput if a diff needs a baseline that is missing.
Summary summarize(const std::vector<ReplicationRecord>& records);

std::string format_summary_text(const Summary& summary);
void write_summary_csv(const Summary& summary, std::ostream& out);

/// log10 of the inf-norm difference, floored at kLogDiffFloor.
double log10_difference(const Vector& a, const Vector& b);

} // namespace epl::harness
