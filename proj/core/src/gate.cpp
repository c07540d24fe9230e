#include "lipshare/gate.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

namespace lipshare {

namespace {

// k nearest labels by (squared distance, index); vote ties go to 0.
int knn_vote(const RowMat& refs, const std::vector<int>& labels, int k,
             const Eigen::Ref<const Vec>& o) {
  const Eigen::Index n = refs.rows();
  std::vector<std::pair<double, Eigen::Index>> dist;
  dist.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    dist.emplace_back((refs.row(i).transpose() - o).squaredNorm(), i);
  }
  const auto kk = std::min<std::size_t>(static_cast<std::size_t>(k), dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end());
  int ones = 0;
  for (std::size_t i = 0; i < kk; ++i) {
    ones += labels[static_cast<std::size_t>(dist[i].second)];
  }
  return 2 * ones > static_cast<int>(kk) ? 1 : 0;  // tie fails safe to voluntary
}

int linear_predict(const Vec& w, double bias, const Eigen::Ref<const Vec>& o) {
  return w.dot(o) + bias > 0.0 ? 1 : 0;
}

GateClassifier::ModeGate train_mode_gate(const RowMat& obs, const std::vector<int>& z,
                                         const GateConfig& cfg) {
  GateClassifier::ModeGate g;
  g.kind = cfg.kind;
  g.k = std::min<int>(cfg.k, static_cast<int>(obs.rows()));

  const bool all_one = std::all_of(z.begin(), z.end(), [](int v) { return v == 1; });
  const bool all_zero = std::all_of(z.begin(), z.end(), [](int v) { return v == 0; });
  if (all_one || all_zero) {
    g.constant_label = all_one ? 1 : 0;
    g.train_accuracy = 1.0;
    return g;
  }

  if (cfg.kind == GateKind::knn) {
    g.refs = obs;
    g.labels = z;
  } else {
    // Regularized logistic fit by plain gradient descent.
    const Eigen::Index n = obs.rows();
    const Eigen::Index d = obs.cols();
    Vec w = Vec::Zero(d);
    double bias = 0.0;
    Vec y(n);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = z[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
    for (int iter = 0; iter < cfg.max_iters; ++iter) {
      Vec margin = obs * w + Vec::Constant(n, bias);
      Vec prob = (1.0 + (-margin.array()).exp()).inverse();
      Vec err = prob - y;
      Vec grad_w = obs.transpose() * err / double(n) + cfg.l2 * w;
      double grad_b = err.sum() / double(n);
      w -= cfg.learning_rate * grad_w;
      bias -= cfg.learning_rate * grad_b;
      if (grad_w.lpNorm<Eigen::Infinity>() < cfg.tol && std::abs(grad_b) < cfg.tol) break;
    }
    g.w = w;
    g.bias = bias;
  }

  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < obs.rows(); ++i) {
    const Vec o = obs.row(i).transpose();
    const int pred = cfg.kind == GateKind::knn ? knn_vote(g.refs, g.labels, g.k, o)
                                               : linear_predict(g.w, g.bias, o);
    if (pred == z[static_cast<std::size_t>(i)]) ++correct;
  }
  g.train_accuracy = double(correct) / double(obs.rows());
  return g;
}

}  // namespace

GateClassifier train_gate(const SampleSet& ss, const GateLabels& labels, const GateConfig& cfg) {
  if (labels.size() != static_cast<std::size_t>(ss.size())) {
    throw Error(ErrorKind::DimensionMismatch, "labels do not cover the sample set");
  }
  if (ss.size() == 0) throw Error(ErrorKind::EmptyInput, "no samples to train on");

  std::map<int, std::vector<Eigen::Index>> by_mode;
  for (Eigen::Index i = 0; i < ss.size(); ++i) {
    by_mode[labels.mode[static_cast<std::size_t>(i)]].push_back(i);
  }

  GateClassifier gate;
  gate.d = ss.d();
  gate.W = ss.W;
  for (const auto& [mode, idx] : by_mode) {
    RowMat obs(static_cast<Eigen::Index>(idx.size()), ss.d());
    std::vector<int> z(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
      obs.row(static_cast<Eigen::Index>(r)) = ss.obs.row(idx[r]);
      z[r] = labels.z[static_cast<std::size_t>(idx[r])];
    }
    gate.modes.emplace(mode, train_mode_gate(obs, z, cfg));
  }
  return gate;
}

int gate_predict(const GateClassifier& gate, int mode, const Eigen::Ref<const Vec>& o) {
  auto it = gate.modes.find(mode);
  if (it == gate.modes.end()) {
    throw Error(ErrorKind::UnknownMode, "no gate for mode " + std::to_string(mode));
  }
  if (o.size() != gate.d) {
    throw Error(ErrorKind::DimensionMismatch, "observation dimension does not match the gate");
  }
  const auto& g = it->second;
  if (g.constant_label >= 0) return g.constant_label;
  if (g.kind == GateKind::knn) return knn_vote(g.refs, g.labels, g.k, o);
  return linear_predict(g.w, g.bias, o);
}

void save_gate_json(const GateClassifier& gate, const std::string& path) {
  nlohmann::json j;
  j["d"] = gate.d;
  j["W"] = gate.W;
  nlohmann::json modes = nlohmann::json::object();
  for (const auto& [mode, g] : gate.modes) {
    nlohmann::json m;
    m["kind"] = g.kind == GateKind::knn ? "knn" : "linear";
    m["train_accuracy"] = g.train_accuracy;
    m["constant_label"] = g.constant_label;
    if (g.constant_label < 0) {
      if (g.kind == GateKind::knn) {
        m["k"] = g.k;
        std::vector<std::vector<double>> refs;
        for (Eigen::Index i = 0; i < g.refs.rows(); ++i) {
          refs.emplace_back(g.refs.row(i).begin(), g.refs.row(i).end());
        }
        m["refs"] = refs;
        m["labels"] = g.labels;
      } else {
        m["w"] = std::vector<double>(g.w.begin(), g.w.end());
        m["bias"] = g.bias;
      }
    }
    modes[std::to_string(mode)] = std::move(m);
  }
  j["modes"] = std::move(modes);
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
  out << j.dump() << "\n";
}

GateClassifier load_gate_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  nlohmann::json j;
  in >> j;
  GateClassifier gate;
  gate.d = j.at("d").get<int>();
  gate.W = j.at("W").get<int>();
  for (const auto& [key, m] : j.at("modes").items()) {
    GateClassifier::ModeGate g;
    g.kind = m.at("kind").get<std::string>() == "knn" ? GateKind::knn : GateKind::linear;
    g.train_accuracy = m.at("train_accuracy").get<double>();
    g.constant_label = m.at("constant_label").get<int>();
    if (g.constant_label < 0) {
      if (g.kind == GateKind::knn) {
        g.k = m.at("k").get<int>();
        const auto& refs = m.at("refs");
        const auto n = refs.size();
        const auto d = n == 0 ? 0 : refs[0].size();
        g.refs.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t c = 0; c < d; ++c) {
            g.refs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = refs[i][c].get<double>();
          }
        }
        g.labels = m.at("labels").get<std::vector<int>>();
      } else {
        auto w = m.at("w").get<std::vector<double>>();
        g.w = Eigen::Map<const Vec>(w.data(), static_cast<Eigen::Index>(w.size()));
        g.bias = m.at("bias").get<double>();
      }
    }
    gate.modes.emplace(std::stoi(key), std::move(g));
  }
  return gate;
}

}  // namespace lipshare
