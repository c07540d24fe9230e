#include "lipshare/lipschitz.hpp"

#include "lipshare/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

namespace lipshare {

namespace {

// Index-ordered accumulation. The acceptance oracle recomputes this loop
// verbatim; any change here must keep the rounding sequence identical.
inline double sq_dist(const double* a, const double* b, Eigen::Index n) {
  double acc = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double diff = a[k] - b[k];
    acc += diff * diff;
  }
  return acc;
}

// Worst-case quotient of each row against all other rows. Row blocks go to
// workers; each row's maximum is a serial scan over ascending j, so the
// result does not depend on the worker count. Ties keep the lowest witness.
std::vector<QuotientEntry> quotients_impl(const RowMat& O, const RowMat& U,
                                          const QuotientOptions& opts) {
  const Eigen::Index n = O.rows();
  const Eigen::Index d = O.cols();
  const Eigen::Index l = U.cols();
  const double eps = opts.epsilon_dup;
  const double delta = opts.delta_dup;
  const double inf = std::numeric_limits<double>::infinity();

  std::vector<QuotientEntry> entries(static_cast<std::size_t>(n));
  parallel_blocks(static_cast<std::size_t>(n), opts.threads,
                  [&](std::size_t begin, std::size_t end) {
                    for (std::size_t ii = begin; ii < end; ++ii) {
                      const auto i = static_cast<Eigen::Index>(ii);
                      const double* oi = O.row(i).data();
                      const double* ui = U.row(i).data();
                      double best = -1.0;
                      std::int64_t witness = -1;
                      for (Eigen::Index j = 0; j < n; ++j) {
                        if (j == i) continue;
                        const double do2 = sq_dist(oi, O.row(j).data(), d);
                        const double du2 = sq_dist(ui, U.row(j).data(), l);
                        double q;
                        if (std::sqrt(do2) < eps) {
                          if (std::sqrt(du2) < delta) continue;  // duplicate pair
                          q = inf;  // contradiction: same observation, different action
                        } else {
                          q = std::sqrt(du2) / std::sqrt(do2);
                        }
                        if (q > best) {
                          best = q;
                          witness = j;
                        }
                      }
                      QuotientEntry& e = entries[ii];
                      e.sample_index = i;
                      if (witness < 0) {
                        e.q = 0.0;
                        e.witness = -1;
                        e.degenerate = true;
                      } else {
                        e.q = best;
                        e.witness = witness;
                        e.degenerate = false;
                      }
                    }
                  });
  return entries;
}

}  // namespace

std::vector<double> QuotientReport::finite_quotients() const {
  std::vector<double> out;
  out.reserve(entries.size());
  for (const auto& e : entries) {
    if (!e.degenerate && std::isfinite(e.q)) out.push_back(e.q);
  }
  return out;
}

QuotientReport pointwise_quotients(const SampleSet& ss, const QuotientOptions& opts) {
  if (ss.size() < 2) {
    throw Error(ErrorKind::EmptyInput, "pointwise quotients need at least 2 samples");
  }
  QuotientReport report;
  report.scope = kScopeGlobal;
  report.epsilon_dup = opts.epsilon_dup;
  report.delta_dup = opts.delta_dup;
  report.entries = quotients_impl(ss.obs, ss.act, opts);
  return report;
}

std::vector<QuotientReport> mode_quotients(const SampleSet& ss, const ModeAssignment& modes,
                                           const QuotientOptions& opts) {
  if (static_cast<Eigen::Index>(modes.size()) != ss.size()) {
    throw Error(ErrorKind::DimensionMismatch,
                "mode assignment covers " + std::to_string(modes.size()) + " samples, set has " +
                    std::to_string(ss.size()));
  }
  std::map<int, std::vector<Eigen::Index>> by_mode;
  for (Eigen::Index i = 0; i < ss.size(); ++i) {
    int s = modes.states[static_cast<std::size_t>(i)];
    if (s < 0) throw Error(ErrorKind::InvalidValue, "negative mode label");
    by_mode[s].push_back(i);
  }

  std::vector<QuotientReport> reports;
  reports.reserve(by_mode.size());
  for (const auto& [mode, idx] : by_mode) {
    QuotientReport report;
    report.scope = mode;
    report.epsilon_dup = opts.epsilon_dup;
    report.delta_dup = opts.delta_dup;
    const auto m = static_cast<Eigen::Index>(idx.size());
    if (m == 1) {
      QuotientEntry e;
      e.sample_index = idx[0];
      e.q = 0.0;
      e.witness = -1;
      e.degenerate = true;  // singleton mode: no partner exists
      report.entries.push_back(e);
      reports.push_back(std::move(report));
      continue;
    }
    RowMat O(m, ss.obs.cols());
    RowMat U(m, ss.act.cols());
    for (Eigen::Index r = 0; r < m; ++r) {
      O.row(r) = ss.obs.row(idx[static_cast<std::size_t>(r)]);
      U.row(r) = ss.act.row(idx[static_cast<std::size_t>(r)]);
    }
    report.entries = quotients_impl(O, U, opts);
    for (auto& e : report.entries) {
      e.sample_index = idx[static_cast<std::size_t>(e.sample_index)];
      if (e.witness >= 0) e.witness = idx[static_cast<std::size_t>(e.witness)];
    }
    reports.push_back(std::move(report));
  }
  return reports;
}

QuotientReport merge_reports(const std::vector<QuotientReport>& reports) {
  if (reports.empty()) throw Error(ErrorKind::EmptyInput, "no reports to merge");
  QuotientReport merged;
  merged.scope = kScopePooled;
  merged.epsilon_dup = reports.front().epsilon_dup;
  merged.delta_dup = reports.front().delta_dup;
  for (const auto& r : reports) {
    merged.entries.insert(merged.entries.end(), r.entries.begin(), r.entries.end());
  }
  std::sort(merged.entries.begin(), merged.entries.end(),
            [](const QuotientEntry& a, const QuotientEntry& b) {
              return a.sample_index < b.sample_index;
            });
  return merged;
}

Threshold select_threshold(const QuotientReport& report, double percentile) {
  if (!(percentile > 0.0 && percentile <= 100.0)) {
    throw Error(ErrorKind::InvalidArgument, "percentile must lie in (0, 100]");
  }
  std::vector<double> finite = report.finite_quotients();
  if (finite.empty()) throw Error(ErrorKind::EmptyInput, "no finite quotients");
  Threshold th;
  th.percentile = percentile;
  th.K = nearest_rank_percentile(std::move(finite), percentile);
  return th;
}

Histogram quotient_histogram(const QuotientReport& report, int bins) {
  if (bins < 1) throw Error(ErrorKind::InvalidArgument, "need at least one bin");
  if (report.entries.empty()) throw Error(ErrorKind::EmptyInput, "empty quotient report");

  double max_finite = 0.0;
  for (const auto& e : report.entries) {
    if (std::isfinite(e.q)) max_finite = std::max(max_finite, e.q);
  }
  const double hi = max_finite > 0.0 ? max_finite : 1.0;

  Histogram h;
  h.edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int b = 0; b <= bins; ++b) {
    h.edges[static_cast<std::size_t>(b)] = hi * double(b) / double(bins);
  }
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (const auto& e : report.entries) {
    if (!std::isfinite(e.q)) {
      ++h.overflow;
      continue;
    }
    auto b = static_cast<std::size_t>(e.q / hi * bins);
    if (b >= static_cast<std::size_t>(bins)) b = static_cast<std::size_t>(bins) - 1;
    ++h.counts[b];
  }
  const double total = double(report.entries.size());
  h.cumulative_percent.resize(h.counts.size());
  std::size_t running = 0;
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    running += h.counts[b];
    h.cumulative_percent[b] = 100.0 * double(running) / total;
  }
  return h;
}

namespace {

std::string scope_label(int scope) {
  if (scope == kScopeGlobal) return "global";
  if (scope == kScopePooled) return "pooled";
  return std::to_string(scope);
}

int parse_scope(const std::string& s) {
  if (s == "global") return kScopeGlobal;
  if (s == "pooled") return kScopePooled;
  return static_cast<int>(parse_double(s, "scope column"));
}

}  // namespace

void save_reports_csv(const std::vector<QuotientReport>& reports, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
  out << "index,q,witness,scope\n";
  for (const auto& r : reports) {
    const std::string scope = scope_label(r.scope);
    for (const auto& e : r.entries) {
      out << e.sample_index << ',' << format_double(e.q) << ',' << e.witness << ',' << scope
          << "\n";
    }
  }
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path + "'");
}

std::vector<QuotientReport> load_reports_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::EmptyInput, "'" + path + "' is empty");

  std::map<int, QuotientReport> by_scope;
  std::vector<int> scope_order;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t p1 = line.find(',');
    std::size_t p2 = line.find(',', p1 + 1);
    std::size_t p3 = line.find(',', p2 + 1);
    if (p1 == std::string::npos || p2 == std::string::npos || p3 == std::string::npos) {
      throw Error(ErrorKind::InvalidValue, "ragged row " + std::to_string(row) + " in '" + path + "'");
    }
    QuotientEntry e;
    e.sample_index = static_cast<std::int64_t>(parse_double(line.substr(0, p1), "index column"));
    e.q = parse_double(line.substr(p1 + 1, p2 - p1 - 1), "q column");
    e.witness = static_cast<std::int64_t>(parse_double(line.substr(p2 + 1, p3 - p2 - 1), "witness column"));
    e.degenerate = e.witness < 0;
    int scope = parse_scope(line.substr(p3 + 1));
    auto [it, inserted] = by_scope.try_emplace(scope);
    if (inserted) {
      it->second.scope = scope;
      scope_order.push_back(scope);
    }
    it->second.entries.push_back(e);
  }
  std::vector<QuotientReport> reports;
  reports.reserve(scope_order.size());
  for (int scope : scope_order) reports.push_back(std::move(by_scope.at(scope)));
  return reports;
}

void save_histogram_csv(const Histogram& hist, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
  out << "bin_lo,bin_hi,count,cumulative_percent\n";
  for (std::size_t b = 0; b < hist.counts.size(); ++b) {
    out << format_double(hist.edges[b]) << ',' << format_double(hist.edges[b + 1]) << ','
        << hist.counts[b] << ',' << format_double(hist.cumulative_percent[b]) << "\n";
  }
  out << "inf,inf," << hist.overflow << ",100\n";
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path + "'");
}

}  // namespace lipshare
