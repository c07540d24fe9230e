#pragma once

#include "lipshare/common.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lipshare {

// One recorded demonstration: rows of (t, observation, action) at a uniform
// sampling period, optionally with a ground-truth mode column (synthetic data).
struct Demonstration {
  std::string id;
  double dt = 0.0;
  std::vector<double> t;
  RowMat obs;  // T x d_raw
  RowMat act;  // T x l
  std::vector<int> mode_truth;  // empty when the dataset has no mode column

  Eigen::Index size() const { return obs.rows(); }
  bool has_mode_truth() const { return !mode_truth.empty(); }
};

struct DemoSet {
  std::vector<Demonstration> demos;
  int d_raw = 0;
  int l = 0;

  bool has_mode_truth() const;
  std::size_t total_records() const;
  double dt() const;  // shared sampling period; throws on an empty set
};

// Per-channel mean/std over observation channels followed by action channels.
struct StandardizationStats {
  Vec mean;  // length d_raw + l
  Vec std;   // strictly positive (constant channels are pinned to 1)
};

// Windowed samples: o is the concatenation of the W most recent standardized
// observation frames, oldest first; u is the action at the window's last step.
struct SampleSet {
  RowMat obs;  // n x (d_raw * W)
  RowMat act;  // n x l
  std::vector<int> demo_index;
  std::vector<int> t_index;
  std::vector<int> mode_truth;  // empty when unavailable
  int W = 1;
  int d_raw = 0;

  Eigen::Index size() const { return obs.rows(); }
  int d() const { return static_cast<int>(obs.cols()); }
  int l() const { return static_cast<int>(act.cols()); }
  bool has_mode_truth() const { return !mode_truth.empty(); }
};

// CSV with header demo,t,o_1..o_d,u_1..u_l[,mode]; row order is time order
// within each demo and demo blocks are contiguous.
DemoSet load_demoset(const std::string& path);
void save_demoset(const DemoSet& ds, const std::string& path);

// Integer decimation to a larger sampling period (nearest-timestamp pick).
DemoSet resample(const DemoSet& ds, double period);

StandardizationStats fit_standardizer(const DemoSet& ds);
DemoSet apply_standardizer(const DemoSet& ds, const StandardizationStats& stats);
DemoSet invert_standardizer(const DemoSet& ds, const StandardizationStats& stats);

void save_stats(const StandardizationStats& stats, const std::string& path);
StandardizationStats load_stats(const std::string& path);

SampleSet make_windows(const DemoSet& ds, int W);

}  // namespace lipshare
