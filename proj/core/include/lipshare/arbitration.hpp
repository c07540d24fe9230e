#pragma once

#include "lipshare/dataset.hpp"
#include "lipshare/gate.hpp"
#include "lipshare/hmm.hpp"
#include "lipshare/policy.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lipshare {

enum class VoluntarySource { recorded, zero, noise };

struct BlendConfig {
  double beta_adjust = 0.3;  // human adjustment weight while predictable
  VoluntarySource source = VoluntarySource::recorded;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

struct BlendResult {
  Vec u_hat;
  double alpha = 0.0;
  double beta = 0.0;
};

// u_hat = alpha * u_r + beta * u_v with (alpha, beta) switched by the gate:
// predictable keeps the robot in charge with a human adjustment weight,
// unpredictable hands through the voluntary command unchanged.
BlendResult blend(const Eigen::Ref<const Vec>& u_r, const Eigen::Ref<const Vec>& u_v, int h,
                  const BlendConfig& cfg);

struct ArbitrationStep {
  int demo_index = 0;
  int t_index = 0;
  int mode = 0;
  int h = 0;
  double alpha = 0.0;
  double beta = 0.0;
  Vec u_reactive;
  Vec u_voluntary;
  Vec u_hat;
  Vec u_ref;  // recorded action (standardized), for scoring
};

struct TraceSummary {
  double voluntary_ratio = 0.0;   // fraction of steps with h = 0
  double voluntary_effort = 0.0;  // mean over steps of beta * |u_v|
  double reactive_rmse = 0.0;     // prediction error over h = 1 steps
  std::size_t reactive_steps = 0;
  std::size_t total_steps = 0;
};

struct ArbitrationTrace {
  std::vector<ArbitrationStep> steps;
  TraceSummary summary;
};

// Strictly causal loop per frame: standardize, slide the window, filter the
// mode posterior, gate, predict, blend. Each demonstration restarts the
// window and filter state.
ArbitrationTrace replay(const DemoSet& raw, const GaussianHmm& hmm, const GateClassifier& gates,
                        const ReactivePolicy& policy, const StandardizationStats& stats, int W,
                        const BlendConfig& cfg = {});

double voluntary_effort(const ArbitrationTrace& trace);
double voluntary_ratio(const ArbitrationTrace& trace);

TraceSummary summarize(const std::vector<ArbitrationStep>& steps);

// CSV with header t,mode,h,alpha,beta,u_r_1..,u_v_1..,u_hat_1..
void save_trace_csv(const ArbitrationTrace& trace, const std::string& path);

}  // namespace lipshare
