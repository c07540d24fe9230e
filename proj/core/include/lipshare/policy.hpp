#pragma once

#include "lipshare/dataset.hpp"
#include "lipshare/modes.hpp"
#include "lipshare/segmentation.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace lipshare {

enum class PolicyKind { ridge, knn };

struct PolicyConfig {
  PolicyKind kind = PolicyKind::ridge;
  double lambda = 1e-6;  // ridge regularizer
  int k = 5;             // k-NN regressor neighbors
  int min_mode_samples = 20;  // below this a mode routes to the fallback
  bool per_mode = true;       // false pools every reactive sample into one model
};

// Reactive controller: one regressor per mode trained on that mode's reactive
// subset, plus a fallback trained on the union of all reactive samples.
struct ReactivePolicy {
  struct Regressor {
    PolicyKind kind = PolicyKind::ridge;
    Mat W;  // l x (d+1), last column is the intercept
    RowMat ref_obs;
    RowMat ref_act;
    int k = 5;
    std::size_t train_count = 0;
  };

  std::map<int, Regressor> modes;  // only modes with their own regressor
  Regressor fallback;
  std::vector<int> fallback_modes;  // modes routed to the fallback
  int d = 0;
  int l = 0;
  int W_window = 1;  // replay metadata
};

ReactivePolicy train_policy(const SegmentationResult& seg, const SampleSet& ss,
                            const PolicyConfig& cfg = {});

Vec policy_predict(const ReactivePolicy& policy, int mode, const Eigen::Ref<const Vec>& o);

// RMSE of per-mode predictions against recorded actions (standardized units).
double eval_rmse(const ReactivePolicy& policy, const SampleSet& ss, const ModeAssignment& modes);
double eval_rmse_subset(const ReactivePolicy& policy, const SampleSet& ss,
                        const ModeAssignment& modes, const std::vector<std::int64_t>& indices);

void save_policy_json(const ReactivePolicy& policy, const std::string& path);
ReactivePolicy load_policy_json(const std::string& path);

}  // namespace lipshare
