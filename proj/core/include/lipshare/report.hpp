#pragma once

#include "lipshare/arbitration.hpp"
#include "lipshare/gate.hpp"
#include "lipshare/hmm.hpp"
#include "lipshare/lipschitz.hpp"
#include "lipshare/policy.hpp"
#include "lipshare/segmentation.hpp"
#include "lipshare/stats.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lipshare {

// Everything the offline path needs in one bundle: preprocessing, the mode
// model, and the quotient engine settings.
struct PipelineConfig {
  int W = 10;
  int n_states = 4;
  FitConfig hmm;
  QuotientOptions quotient;
  GateConfig gate;
  PolicyConfig policy;
  BlendConfig blend;
  int threads = 0;

  void apply_threads();  // pushes `threads` into the quotient options
};

// Offline artifacts shared by the sweep, the comparison and the CLI.
struct OfflineArtifacts {
  StandardizationStats stats;
  DemoSet standardized;
  SampleSet samples;
  GaussianHmm model;
  std::vector<double> loglik_history;
  ModeAssignment frame_states;   // per-frame Viterbi states
  ModeAssignment sample_states;  // window-aligned states
  std::vector<QuotientReport> mode_reports;
  QuotientReport pooled;  // mode reports merged, for threshold selection
};

OfflineArtifacts run_offline(const DemoSet& raw, const PipelineConfig& cfg);

struct TradeoffRow {
  double percentile = 0.0;
  double K = 0.0;
  double reactive_rmse = 0.0;
  double voluntary_ratio = 0.0;
  double voluntary_effort = 0.0;
};

// One offline pass, then per percentile: threshold, split, train gate and
// policy, replay, and score.
std::vector<TradeoffRow> tradeoff_sweep(const DemoSet& raw, const std::vector<double>& percentiles,
                                        const PipelineConfig& cfg);

struct SegmentationComparison {
  TTestResult ttest;       // HMM-conditioned vs control-conditioned finite quotients
  double mean_a = 0.0;     // HMM-conditioned mean
  double mean_b = 0.0;     // control mean
  double K = 0.0;
  double voluntary_ratio_a = 0.0;  // at K
  double voluntary_ratio_b = 0.0;
};

SegmentationComparison compare_segmentations(const SampleSet& ss, const ModeAssignment& modes_a,
                                             const ModeAssignment& modes_b, double K,
                                             const QuotientOptions& opts = {});

// Inputs for the report bundle; every section is optional except the manifest.
struct ReportArtifacts {
  std::uint64_t seed = 0;
  std::string config_json;  // pretty-printed configuration echo, may be empty
  std::vector<QuotientReport> reports;
  int histogram_bins = 50;
  std::optional<SegmentationResult> segmentation;
  std::optional<ArbitrationTrace> trace;
  std::string trace_csv_path;  // alternative to `trace`: copy an existing trace CSV
  std::vector<TradeoffRow> sweep;
  std::optional<SegmentationComparison> comparison;
};

// Writes manifest.json plus one file per present artifact into out_dir:
// quotient_trace.csv, histogram.csv, segmentation.csv, trace.csv,
// tradeoff.csv, segmentation_compare.json, summary.json.
// Output is byte-identical across runs for identical inputs.
void emit_report(const ReportArtifacts& artifacts, const std::string& out_dir);

void save_tradeoff_csv(const std::vector<TradeoffRow>& rows, const std::string& path);
std::vector<TradeoffRow> load_tradeoff_csv(const std::string& path);

}  // namespace lipshare
