#include "epl/harness/summary.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "epl/error.hpp"

namespace epl::harness {

namespace {

constexpr const char* kBaseline = "epl-anal";
constexpr const char* kPairLabel = "epl-jf-vs-nfxp-jf";

const std::vector<std::string>& method_order() {
    static const std::vector<std::string> order{"epl-anal", "epl-krylov", "epl-jf", "nfxp-jf"};
    return order;
}

int method_rank(const std::string& m) {
    const auto& order = method_order();
    const auto it = std::find(order.begin(), order.end(), m);
    return it == order.end() ? static_cast<int>(order.size()) : static_cast<int>(it - order.begin());
}

// Finite k first in increasing order, "inf" last.
int k_rank(int k) { return k == kInfinity ? std::numeric_limits<int>::max() : k; }

double median(std::vector<double> xs) {
    if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

double mean(const std::vector<double>& xs) {
    if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double sample_std(const std::vector<double>& xs) {
    if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    const double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

bool usable(const ReplicationRecord& r) { return r.theta.size() > 0 && r.theta.allFinite(); }

using Key = std::pair<std::string, int>;
using Group = std::map<int, const ReplicationRecord*>;  // rep -> record

// log10 differences for reps present and usable in both groups.
std::vector<double> paired_diffs(const Group& a, const Group& b) {
    std::vector<double> out;
    for (const auto& [rep, ra] : a) {
        const auto it = b.find(rep);
        if (it == b.end() || !usable(*ra) || !usable(*it->second)) continue;
        out.push_back(log10_difference(ra->theta, it->second->theta));
    }
    return out;
}

std::string k_label(int k) { return k == kInfinity ? "inf" : std::to_string(k); }

} // namespace

double Summary::get(const std::string& method, int k, const std::string& stat) const {
    for (const auto& c : cells) {
        if (c.method == method && c.k == k && c.stat == stat) return c.value;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

double log10_difference(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw InvalidInput("log10_difference: size mismatch");
    const double d = (a - b).lpNorm<Eigen::Infinity>();
    if (!(d > 0.0)) return kLogDiffFloor;
    return std::max(std::log10(d), kLogDiffFloor);
}

Summary summarize(const std::vector<ReplicationRecord>& records) {
    if (records.empty()) throw InvalidInput("summarize: no records");
    std::map<Key, Group> groups;
    for (const auto& r : records) {
        auto& g = groups[{r.method, r.k}];
        if (g.count(r.rep)) {
            throw InvalidInput("summarize: duplicate record for rep " + std::to_string(r.rep) + ", method " + r.method +
                               ", k " + k_label(r.k));
        }
        g[r.rep] = &r;
    }

    std::vector<Key> keys;
    for (const auto& [key, g] : groups) keys.push_back(key);
    std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
        if (k_rank(a.second) != k_rank(b.second)) return k_rank(a.second) < k_rank(b.second);
        if (method_rank(a.first) != method_rank(b.first)) return method_rank(a.first) < method_rank(b.first);
        return a.first < b.first;
    });

    bool any_baseline = false;
    bool any_nfxp = false;
    for (const auto& [m, k] : keys) {
        any_baseline |= m == kBaseline;
        any_nfxp |= m == "nfxp-jf";
    }

    Summary out;
    const auto add = [&](const std::string& m, int k, const std::string& stat, double v) {
        out.cells.push_back(SummaryCell{m, k, stat, v});
    };

    for (const auto& key : keys) {
        const auto& [m, k] = key;
        const Group& g = groups.at(key);
        const bool epl_method = m.rfind("epl-", 0) == 0;

        if (epl_method && m != kBaseline) {
            const auto base = groups.find({kBaseline, k});
            if (base == groups.end()) {
                // Comparison-only runs (with nfxp-jf) carry no analytic baseline by design.
                if (!any_nfxp || any_baseline) {
                    throw InvalidInput("summarize: diff column for " + m + " at k = " + k_label(k) +
                                       " needs baseline method " + kBaseline);
                }
            } else {
                const auto diffs = paired_diffs(g, base->second);
                if (!diffs.empty()) {
                    add(m, k, "diff_mean", mean(diffs));
                    add(m, k, "diff_max", *std::max_element(diffs.begin(), diffs.end()));
                }
            }
        }

        std::vector<double> iters;
        std::vector<double> times;
        int nonconv = 0;
        for (const auto& [rep, r] : g) {
            iters.push_back(r->iterations);
            times.push_back(r->time_total_sec);
            if (!r->converged) ++nonconv;
        }
        double total = 0.0;
        for (double t : times) total += t;

        if (k == kInfinity) {
            add(m, k, "iter_median", median(iters));
            add(m, k, "iter_max", *std::max_element(iters.begin(), iters.end()));
            add(m, k, "nonconv_pct", 100.0 * nonconv / static_cast<double>(g.size()));
        }
        add(m, k, "time_total", total);
        add(m, k, "time_mean", mean(times));
        add(m, k, "time_median", median(times));
        const double per = k == kInfinity ? median(iters) : static_cast<double>(k);
        add(m, k, "time_med_per_iter", per > 0 ? median(times) / per : std::numeric_limits<double>::quiet_NaN());
        if (k == kInfinity && (m == "epl-jf" || m == "nfxp-jf") && any_nfxp) add(m, k, "time_std", sample_std(times));
    }

    if (any_nfxp) {
        const auto jf = groups.find({"epl-jf", kInfinity});
        const auto nf = groups.find({"nfxp-jf", kInfinity});
        if (jf == groups.end()) throw InvalidInput("summarize: nfxp-jf comparison needs epl-jf at k = inf");
        if (nf != groups.end()) {
            const auto diffs = paired_diffs(jf->second, nf->second);
            if (!diffs.empty()) {
                add(kPairLabel, kInfinity, "diff_mean", mean(diffs));
                add(kPairLabel, kInfinity, "diff_max", *std::max_element(diffs.begin(), diffs.end()));
            }
        }
    }
    return out;
}

namespace {

std::string format_value(const std::string& stat, double v) {
    if (std::isnan(v)) return "-";
    std::ostringstream os;
    if (stat.rfind("diff_", 0) == 0) {
        if (v <= kLogDiffFloor) return "< -15";
        os << std::fixed << std::setprecision(1) << v;
    } else if (stat == "iter_median" || stat == "iter_max") {
        os << std::fixed << std::setprecision(v == std::floor(v) ? 0 : 1) << v;
    } else if (stat == "nonconv_pct") {
        os << std::fixed << std::setprecision(0) << v << '%';
    } else {
        os << std::setprecision(3) << v;
    }
    return os.str();
}

} // namespace

std::string format_summary_text(const Summary& summary) {
    std::vector<Key> columns;
    for (const auto& c : summary.cells) {
        if (c.method == kPairLabel) continue;
        const Key key{c.method, c.k};
        if (std::find(columns.begin(), columns.end(), key) == columns.end()) columns.push_back(key);
    }

    const std::vector<std::pair<std::string, std::string>> rows{
        {"log10(Diff) Mean", "diff_mean"}, {"log10(Diff) Max", "diff_max"},   {"Iterations Median", "iter_median"},
        {"Iterations Max", "iter_max"},     {"Non-Conv.", "nonconv_pct"},     {"Time Total", "time_total"},
        {"Time Mean", "time_mean"},         {"Time Median", "time_median"},   {"Time Med/Iter", "time_med_per_iter"},
    };

    std::ostringstream os;
    constexpr int label_w = 20;
    constexpr int col_w = 13;
    os << std::left << std::setw(label_w) << "k";
    for (const auto& [m, k] : columns) os << std::right << std::setw(col_w) << k_label(k);
    os << '\n' << std::left << std::setw(label_w) << "method";
    for (const auto& [m, k] : columns) os << std::right << std::setw(col_w) << m;
    os << '\n';
    for (const auto& [label, stat] : rows) {
        os << std::left << std::setw(label_w) << label;
        for (const auto& [m, k] : columns) os << std::right << std::setw(col_w) << format_value(stat, summary.get(m, k, stat));
        os << '\n';
    }

    const double pair_mean = summary.get(kPairLabel, kInfinity, "diff_mean");
    if (!std::isnan(pair_mean)) {
        os << '\n' << "EPL-JF vs NFXP-JF\n";
        os << std::left << std::setw(label_w) << "log10(Diff) Mean" << format_value("diff_mean", pair_mean) << '\n';
        os << std::left << std::setw(label_w) << "log10(Diff) Max"
           << format_value("diff_max", summary.get(kPairLabel, kInfinity, "diff_max")) << '\n';
        for (const char* m : {"epl-jf", "nfxp-jf"}) {
            os << std::left << std::setw(label_w) << (std::string(m) + " time")
               << format_value("time_mean", summary.get(m, kInfinity, "time_mean")) << " ("
               << format_value("time_std", summary.get(m, kInfinity, "time_std")) << ")\n";
        }
    }
    return os.str();
}

void write_summary_csv(const Summary& summary, std::ostream& out) {
    out << "method,k,stat,value\n" << std::setprecision(17);
    for (const auto& c : summary.cells) out << c.method << ',' << k_label(c.k) << ',' << c.stat << ',' << c.value << '\n';
}

} // namespace epl::harness
