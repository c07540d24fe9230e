#pragma once

#include "lipshare/dataset.hpp"
#include "lipshare/modes.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace lipshare {

// Scope of a quotient report: all samples, or one mode's restriction.
inline constexpr int kScopeGlobal = -1;
inline constexpr int kScopePooled = -2;

struct QuotientEntry {
  std::int64_t sample_index = 0;
  double q = 0.0;  // worst-case |du|/|do| against any partner; may be +inf
  std::int64_t witness = -1;  // partner achieving the maximum; -1 when degenerate
  bool degenerate = false;    // every partner was a duplicate (or singleton mode)
};

struct QuotientReport {
  std::vector<QuotientEntry> entries;
  int scope = kScopeGlobal;  // kScopeGlobal, kScopePooled, or mode id
  double epsilon_dup = 1e-9;
  double delta_dup = 1e-9;

  std::vector<double> finite_quotients() const;
};

struct QuotientOptions {
  // Pairs closer than epsilon_dup in observation space are either duplicates
  // (action gap below delta_dup, skipped) or contradictions (q = +inf).
  double epsilon_dup = 1e-9;
  double delta_dup = 1e-9;
  int threads = 0;  // 0 = hardware concurrency
};

struct Threshold {
  double K = 0.0;
  double percentile = 100.0;
};

// Worst-case quotient per sample over all other samples (Euclidean metric,
// lowest witness index on ties). Deterministic for any worker count.
QuotientReport pointwise_quotients(const SampleSet& ss, const QuotientOptions& opts = {});

// Quotients restricted to samples sharing a mode label; one report per mode,
// ordered by mode id. Singleton modes yield a degenerate q = 0 entry.
std::vector<QuotientReport> mode_quotients(const SampleSet& ss, const ModeAssignment& modes,
                                           const QuotientOptions& opts = {});

// Concatenates per-mode reports into one pooled report sorted by sample index.
QuotientReport merge_reports(const std::vector<QuotientReport>& reports);

// Nearest-rank percentile of the finite quotients. Infinite quotients never
// satisfy the condition and are excluded from the rank computation.
Threshold select_threshold(const QuotientReport& report, double percentile);

struct Histogram {
  std::vector<double> edges;          // bins + 1 edges over [0, max finite q]
  std::vector<std::size_t> counts;    // finite entries per bin
  std::size_t overflow = 0;           // +inf entries
  std::vector<double> cumulative_percent;  // of all entries, including overflow
};

Histogram quotient_histogram(const QuotientReport& report, int bins);

// CSV with header index,q,witness,scope ("inf" literal for unbounded q).
void save_reports_csv(const std::vector<QuotientReport>& reports, const std::string& path);
std::vector<QuotientReport> load_reports_csv(const std::string& path);

void save_histogram_csv(const Histogram& hist, const std::string& path);

}  // namespace lipshare
