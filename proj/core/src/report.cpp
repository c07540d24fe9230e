#include "lipshare/report.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

namespace lipshare {

void PipelineConfig::apply_threads() { quotient.threads = threads; }

OfflineArtifacts run_offline(const DemoSet& raw, const PipelineConfig& cfg) {
  OfflineArtifacts art;
  art.stats = fit_standardizer(raw);
  art.standardized = apply_standardizer(raw, art.stats);
  art.samples = make_windows(art.standardized, cfg.W);

  FitResult fit = fit_baum_welch(emission_sequences(art.standardized), cfg.n_states, cfg.hmm);
  art.model = std::move(fit.model);
  art.loglik_history = std::move(fit.loglik_history);
  art.frame_states = decode_demoset(art.model, art.standardized);
  art.sample_states = window_states(art.frame_states, art.standardized, cfg.W);
  art.mode_reports = mode_quotients(art.samples, art.sample_states, cfg.quotient);
  art.pooled = merge_reports(art.mode_reports);
  return art;
}

std::vector<TradeoffRow> tradeoff_sweep(const DemoSet& raw, const std::vector<double>& percentiles,
                                        const PipelineConfig& cfg) {
  OfflineArtifacts art = run_offline(raw, cfg);

  std::vector<TradeoffRow> rows;
  rows.reserve(percentiles.size());
  for (double p : percentiles) {
    const Threshold K = select_threshold(art.pooled, p);
    const SegmentationResult seg = split_rv(art.mode_reports, K);
    const GateLabels labels = make_gate_labels(seg);
    const GateClassifier gate = train_gate(art.samples, labels, cfg.gate);
    const ReactivePolicy policy = train_policy(seg, art.samples, cfg.policy);
    const ArbitrationTrace trace = replay(raw, art.model, gate, policy, art.stats, cfg.W, cfg.blend);

    TradeoffRow row;
    row.percentile = p;
    row.K = K.K;
    row.reactive_rmse = trace.summary.reactive_rmse;
    row.voluntary_ratio = trace.summary.voluntary_ratio;
    row.voluntary_effort = trace.summary.voluntary_effort;
    rows.push_back(row);
  }
  return rows;
}

SegmentationComparison compare_segmentations(const SampleSet& ss, const ModeAssignment& modes_a,
                                             const ModeAssignment& modes_b, double K,
                                             const QuotientOptions& opts) {
  const auto reports_a = mode_quotients(ss, modes_a, opts);
  const auto reports_b = mode_quotients(ss, modes_b, opts);

  auto collect = [](const std::vector<QuotientReport>& reports) {
    std::vector<double> finite;
    std::size_t voluntary = 0;
    std::size_t total = 0;
    for (const auto& r : reports) {
      for (const auto& e : r.entries) {
        ++total;
        if (!std::isfinite(e.q)) {
          ++voluntary;  // unbounded quotients never satisfy the condition
          continue;
        }
        if (!e.degenerate) {
          finite.push_back(e.q);
        }
      }
    }
    return std::tuple<std::vector<double>, std::size_t, std::size_t>(std::move(finite), voluntary,
                                                                     total);
  };

  auto [fin_a, inf_a, total_a] = collect(reports_a);
  auto [fin_b, inf_b, total_b] = collect(reports_b);

  SegmentationComparison cmp;
  cmp.K = K;
  cmp.ttest = welch_t_test(fin_a, fin_b);
  auto mean_of = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / double(v.size());
  };
  cmp.mean_a = mean_of(fin_a);
  cmp.mean_b = mean_of(fin_b);
  auto ratio_at = [K](const std::vector<double>& finite, std::size_t inf_count, std::size_t total) {
    std::size_t vol = inf_count;
    for (double q : finite) {
      if (q > K) ++vol;
    }
    return total == 0 ? 0.0 : double(vol) / double(total);
  };
  cmp.voluntary_ratio_a = ratio_at(fin_a, inf_a, total_a);
  cmp.voluntary_ratio_b = ratio_at(fin_b, inf_b, total_b);
  return cmp;
}

void save_tradeoff_csv(const std::vector<TradeoffRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
  out << "percentile,K,reactive_rmse,voluntary_ratio,voluntary_effort\n";
  for (const auto& r : rows) {
    out << format_double(r.percentile) << ',' << format_double(r.K) << ','
        << format_double(r.reactive_rmse) << ',' << format_double(r.voluntary_ratio) << ','
        << format_double(r.voluntary_effort) << "\n";
  }
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path + "'");
}

std::vector<TradeoffRow> load_tradeoff_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::EmptyInput, "'" + path + "' is empty");
  std::vector<TradeoffRow> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> f;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      f.push_back(parse_double(line.substr(start, comma - start), "tradeoff row"));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (f.size() != 5) throw Error(ErrorKind::InvalidValue, "ragged tradeoff row");
    rows.push_back(TradeoffRow{f[0], f[1], f[2], f[3], f[4]});
  }
  return rows;
}

namespace {

// Voluntary ratio/effort recovered from a trace CSV's h, beta and u_v columns.
// The recorded reference action is not part of the format, so the RMSE is not
// recoverable here.
std::pair<double, double> trace_csv_summary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  std::string header;
  if (!std::getline(in, header)) throw Error(ErrorKind::EmptyInput, "'" + path + "' is empty");
  std::size_t cols = 1;
  std::size_t first_uv = 0;
  {
    std::size_t idx = 0;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = header.find(',', start);
      const std::string name = header.substr(start, comma - start);
      if (name == "u_v_1") first_uv = idx;
      ++idx;
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    cols = idx;
  }
  if (first_uv == 0) throw Error(ErrorKind::InvalidValue, "no u_v columns in '" + path + "'");
  const std::size_t l = (cols - 5) / 3;

  std::string line;
  std::size_t steps = 0;
  std::size_t voluntary = 0;
  double effort = 0.0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != cols) throw Error(ErrorKind::InvalidValue, "ragged trace row");
    ++steps;
    if (fields[2] == "0") ++voluntary;
    const double beta = parse_double(fields[4], "beta column");
    double norm2 = 0.0;
    for (std::size_t c = 0; c < l; ++c) {
      const double v = parse_double(fields[first_uv + c], "u_v column");
      norm2 += v * v;
    }
    effort += beta * std::sqrt(norm2);
  }
  if (steps == 0) return {0.0, 0.0};
  return {double(voluntary) / double(steps), effort / double(steps)};
}

nlohmann::json summary_json(const ReportArtifacts& art) {
  nlohmann::json s;
  if (!art.reports.empty()) {
    std::size_t entries = 0;
    std::size_t infinite = 0;
    std::size_t degenerate = 0;
    double max_finite = 0.0;
    double sum = 0.0;
    std::size_t finite = 0;
    for (const auto& r : art.reports) {
      for (const auto& e : r.entries) {
        ++entries;
        if (e.degenerate) {
          ++degenerate;
        } else if (!std::isfinite(e.q)) {
          ++infinite;
        } else {
          ++finite;
          sum += e.q;
          max_finite = std::max(max_finite, e.q);
        }
      }
    }
    s["quotients"] = {
        {"entries", entries},
        {"finite", finite},
        {"infinite", infinite},
        {"degenerate", degenerate},
        {"mean_finite", finite ? sum / double(finite) : 0.0},
        {"max_finite", max_finite},
    };
  }
  if (art.segmentation) {
    s["segmentation"] = {
        {"K", art.segmentation->threshold.K},
        {"percentile", art.segmentation->threshold.percentile},
        {"total_samples", art.segmentation->total_samples},
        {"voluntary_ratio", art.segmentation->voluntary_ratio},
    };
  }
  if (art.trace) {
    s["trace"] = {
        {"total_steps", art.trace->summary.total_steps},
        {"reactive_steps", art.trace->summary.reactive_steps},
        {"voluntary_ratio", art.trace->summary.voluntary_ratio},
        {"voluntary_effort", art.trace->summary.voluntary_effort},
        {"reactive_rmse", art.trace->summary.reactive_rmse},
    };
  } else if (!art.trace_csv_path.empty()) {
    const auto [ratio, effort] = trace_csv_summary(art.trace_csv_path);
    s["trace"] = {
        {"voluntary_ratio", ratio},
        {"voluntary_effort", effort},
    };
  }
  if (art.comparison) {
    s["comparison"] = {
        {"t", art.comparison->ttest.t},
        {"dof", art.comparison->ttest.dof},
        {"p", art.comparison->ttest.p},
        {"mean_conditioned", art.comparison->mean_a},
        {"mean_control", art.comparison->mean_b},
        {"K", art.comparison->K},
        {"voluntary_ratio_conditioned", art.comparison->voluntary_ratio_a},
        {"voluntary_ratio_control", art.comparison->voluntary_ratio_b},
    };
  }
  if (!art.sweep.empty()) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : art.sweep) {
      rows.push_back({{"percentile", r.percentile},
                      {"K", r.K},
                      {"reactive_rmse", r.reactive_rmse},
                      {"voluntary_ratio", r.voluntary_ratio},
                      {"voluntary_effort", r.voluntary_effort}});
    }
    s["tradeoff"] = std::move(rows);
  }
  return s;
}

}  // namespace

void emit_report(const ReportArtifacts& artifacts, const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create '" + out_dir + "': " + ec.message());
  const std::filesystem::path dir(out_dir);

  std::vector<std::string> files;
  if (!artifacts.reports.empty()) {
    save_reports_csv(artifacts.reports, (dir / "quotients.csv").string());
    files.push_back("quotients.csv");
    const QuotientReport merged =
        artifacts.reports.size() == 1 ? artifacts.reports.front() : merge_reports(artifacts.reports);
    if (artifacts.reports.size() > 1) {
      // Sample-indexed view of the per-mode reports, the per-point trace.
      save_reports_csv({merged}, (dir / "quotient_trace.csv").string());
      files.push_back("quotient_trace.csv");
    }
    save_histogram_csv(quotient_histogram(merged, artifacts.histogram_bins),
                       (dir / "histogram.csv").string());
    files.push_back("histogram.csv");
  }
  if (artifacts.comparison) {
    nlohmann::json cj;
    cj["t"] = artifacts.comparison->ttest.t;
    cj["dof"] = artifacts.comparison->ttest.dof;
    cj["p"] = artifacts.comparison->ttest.p;
    cj["mean_conditioned"] = artifacts.comparison->mean_a;
    cj["mean_control"] = artifacts.comparison->mean_b;
    cj["K"] = artifacts.comparison->K;
    cj["voluntary_ratio_conditioned"] = artifacts.comparison->voluntary_ratio_a;
    cj["voluntary_ratio_control"] = artifacts.comparison->voluntary_ratio_b;
    std::ofstream out(dir / "segmentation_compare.json");
    out << cj.dump(2) << "\n";
    files.push_back("segmentation_compare.json");
  }
  if (artifacts.segmentation) {
    save_segmentation_csv(*artifacts.segmentation, (dir / "segmentation.csv").string());
    files.push_back("segmentation.csv");
  }
  if (artifacts.trace) {
    save_trace_csv(*artifacts.trace, (dir / "trace.csv").string());
    files.push_back("trace.csv");
  } else if (!artifacts.trace_csv_path.empty()) {
    std::filesystem::copy_file(artifacts.trace_csv_path, dir / "trace.csv",
                               std::filesystem::copy_options::overwrite_existing);
    files.push_back("trace.csv");
  }
  if (!artifacts.sweep.empty()) {
    save_tradeoff_csv(artifacts.sweep, (dir / "tradeoff.csv").string());
    files.push_back("tradeoff.csv");
  }

  nlohmann::json summary = summary_json(artifacts);
  if (!summary.empty()) {
    std::ofstream out(dir / "summary.json");
    out << summary.dump(2) << "\n";
    files.push_back("summary.json");
  }

  nlohmann::json manifest;
  manifest["version"] = kVersion;
  manifest["seed"] = artifacts.seed;
  if (!artifacts.config_json.empty()) {
    manifest["config"] = nlohmann::json::parse(artifacts.config_json, nullptr, false);
    if (manifest["config"].is_discarded()) manifest["config"] = artifacts.config_json;
  }
  manifest["files"] = files;
  std::ofstream mout(dir / "manifest.json");
  if (!mout) throw Error(ErrorKind::Io, "cannot write manifest");
  mout << manifest.dump(2) << "\n";
}

}  // namespace lipshare
