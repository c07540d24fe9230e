#pragma once

#include "lipshare/lipschitz.hpp"
#include "lipshare/modes.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lipshare {

// Reactive/voluntary split of every mode's samples at a threshold K:
// q <= K is reactive, q > K (including +inf) is voluntary.
struct SegmentationResult {
  struct ModeSplit {
    int mode = 0;
    std::vector<std::int64_t> reactive;
    std::vector<std::int64_t> voluntary;
  };

  std::vector<ModeSplit> modes;
  Threshold threshold;
  std::size_t total_samples = 0;
  double voluntary_ratio = 0.0;

  // Flat per-sample view, indexed by sample index.
  std::vector<int> sample_mode;
  std::vector<double> sample_q;
};

// Binary predictability labels: z[i] = 1 iff sample i is reactive in its mode.
struct GateLabels {
  std::vector<int> z;
  std::vector<int> mode;

  std::size_t size() const { return z.size(); }
};

SegmentationResult split_rv(const std::vector<QuotientReport>& mode_reports, const Threshold& K);

GateLabels make_gate_labels(const SegmentationResult& seg);

// I.i.d. mode assignment with the given proportions (uniform when empty);
// deterministic per seed. The control condition for segmentation comparisons.
ModeAssignment random_segmentation(const SampleSet& ss, int N, std::uint64_t seed,
                                   const std::vector<double>& proportions = {});

// Empirical mode fractions of an assignment over modes 0..max.
std::vector<double> empirical_proportions(const ModeAssignment& modes);

// CSV with header index,mode,q,label.
void save_segmentation_csv(const SegmentationResult& seg, const std::string& path);
SegmentationResult load_segmentation_csv(const std::string& path);

}  // namespace lipshare
