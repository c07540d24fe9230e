#pragma once

#include "lipshare/dataset.hpp"
#include "lipshare/segmentation.hpp"

#include <map>
#include <string>

namespace lipshare {

enum class GateKind { knn, linear };

struct GateConfig {
  GateKind kind = GateKind::knn;
  int k = 5;  // truncated to the mode's sample count
  // linear-margin training (regularized logistic gradient descent)
  double l2 = 1e-4;
  double learning_rate = 0.5;
  int max_iters = 2000;
  double tol = 1e-6;
};

// Per-mode binary predictability classifier. Predicts 1 (reactive) when the
// observation looks like the mode's reactive training region; k-NN vote ties
// fail safe to 0 (voluntary).
struct GateClassifier {
  struct ModeGate {
    GateKind kind = GateKind::knn;
    int constant_label = -1;  // >= 0 when the mode had a single class
    // knn
    int k = 5;
    RowMat refs;
    std::vector<int> labels;
    // linear
    Vec w;
    double bias = 0.0;

    double train_accuracy = 1.0;
  };

  std::map<int, ModeGate> modes;
  int d = 0;
  int W = 1;  // window length the gate was trained with (replay metadata)
};

GateClassifier train_gate(const SampleSet& ss, const GateLabels& labels,
                          const GateConfig& cfg = {});

int gate_predict(const GateClassifier& gate, int mode, const Eigen::Ref<const Vec>& o);

void save_gate_json(const GateClassifier& gate, const std::string& path);
GateClassifier load_gate_json(const std::string& path);

}  // namespace lipshare
