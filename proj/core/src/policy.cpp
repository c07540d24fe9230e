#include "lipshare/policy.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>

namespace lipshare {

namespace {

// Ridge normal equations on [o; 1] with the intercept column regularized too.
Mat fit_ridge(const RowMat& obs, const RowMat& act, double lambda) {
  const Eigen::Index n = obs.rows();
  const Eigen::Index d = obs.cols();
  Mat X(n, d + 1);
  X.leftCols(d) = obs;
  X.col(d).setOnes();
  Mat gram = X.transpose() * X;
  gram.diagonal().array() += lambda;
  const Mat rhs = X.transpose() * act;
  const Mat B = Eigen::LDLT<Mat>(gram).solve(rhs);  // (d+1) x l
  return B.transpose();
}

ReactivePolicy::Regressor train_regressor(const RowMat& obs, const RowMat& act,
                                          const PolicyConfig& cfg) {
  ReactivePolicy::Regressor r;
  r.kind = cfg.kind;
  r.train_count = static_cast<std::size_t>(obs.rows());
  if (cfg.kind == PolicyKind::ridge) {
    r.W = fit_ridge(obs, act, cfg.lambda);
  } else {
    r.ref_obs = obs;
    r.ref_act = act;
    r.k = std::min<int>(cfg.k, static_cast<int>(obs.rows()));
  }
  return r;
}

Vec regressor_predict(const ReactivePolicy::Regressor& r, const Eigen::Ref<const Vec>& o) {
  if (r.kind == PolicyKind::ridge) {
    const Eigen::Index d = r.W.cols() - 1;
    return r.W.leftCols(d) * o + r.W.col(d);
  }
  // Mean action of the k nearest references (ties by lowest index).
  const Eigen::Index n = r.ref_obs.rows();
  std::vector<std::pair<double, Eigen::Index>> dist;
  dist.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    dist.emplace_back((r.ref_obs.row(i).transpose() - o).squaredNorm(), i);
  }
  const auto kk = std::min<std::size_t>(static_cast<std::size_t>(r.k), dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end());
  Vec u = Vec::Zero(r.ref_act.cols());
  for (std::size_t i = 0; i < kk; ++i) u += r.ref_act.row(dist[i].second).transpose();
  return u / double(kk);
}

RowMat gather_rows(const RowMat& src, const std::vector<std::int64_t>& idx) {
  RowMat out(static_cast<Eigen::Index>(idx.size()), src.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) = src.row(static_cast<Eigen::Index>(idx[r]));
  }
  return out;
}

}  // namespace

ReactivePolicy train_policy(const SegmentationResult& seg, const SampleSet& ss,
                            const PolicyConfig& cfg) {
  if (cfg.lambda <= 0.0) throw Error(ErrorKind::InvalidArgument, "ridge lambda must be positive");
  if (cfg.k < 1) throw Error(ErrorKind::InvalidArgument, "k must be at least 1");

  std::vector<std::int64_t> all_reactive;
  for (const auto& split : seg.modes) {
    all_reactive.insert(all_reactive.end(), split.reactive.begin(), split.reactive.end());
  }
  if (all_reactive.empty()) {
    throw Error(ErrorKind::EmptyInput, "no reactive samples to train on");
  }
  std::sort(all_reactive.begin(), all_reactive.end());

  ReactivePolicy policy;
  policy.d = ss.d();
  policy.l = ss.l();
  policy.W_window = ss.W;
  policy.fallback =
      train_regressor(gather_rows(ss.obs, all_reactive), gather_rows(ss.act, all_reactive), cfg);

  for (const auto& split : seg.modes) {
    const bool own = cfg.per_mode &&
                     split.reactive.size() >= static_cast<std::size_t>(cfg.min_mode_samples);
    if (!own) {
      policy.fallback_modes.push_back(split.mode);
      continue;
    }
    policy.modes.emplace(split.mode, train_regressor(gather_rows(ss.obs, split.reactive),
                                                     gather_rows(ss.act, split.reactive), cfg));
  }
  return policy;
}

Vec policy_predict(const ReactivePolicy& policy, int mode, const Eigen::Ref<const Vec>& o) {
  if (o.size() != policy.d) {
    throw Error(ErrorKind::DimensionMismatch, "observation dimension does not match the policy");
  }
  auto it = policy.modes.find(mode);
  if (it != policy.modes.end()) return regressor_predict(it->second, o);
  if (std::find(policy.fallback_modes.begin(), policy.fallback_modes.end(), mode) ==
      policy.fallback_modes.end()) {
    throw Error(ErrorKind::UnknownMode, "no policy for mode " + std::to_string(mode));
  }
  return regressor_predict(policy.fallback, o);
}

double eval_rmse(const ReactivePolicy& policy, const SampleSet& ss, const ModeAssignment& modes) {
  std::vector<std::int64_t> all(static_cast<std::size_t>(ss.size()));
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<std::int64_t>(i);
  return eval_rmse_subset(policy, ss, modes, all);
}

double eval_rmse_subset(const ReactivePolicy& policy, const SampleSet& ss,
                        const ModeAssignment& modes, const std::vector<std::int64_t>& indices) {
  if (modes.size() != static_cast<std::size_t>(ss.size())) {
    throw Error(ErrorKind::DimensionMismatch, "mode assignment does not cover the sample set");
  }
  if (indices.empty()) throw Error(ErrorKind::EmptyInput, "empty evaluation set");
  double sum = 0.0;
  for (std::int64_t i : indices) {
    const Vec pred = policy_predict(policy, modes.states[static_cast<std::size_t>(i)],
                                    ss.obs.row(static_cast<Eigen::Index>(i)).transpose());
    sum += (pred - ss.act.row(static_cast<Eigen::Index>(i)).transpose()).squaredNorm();
  }
  return std::sqrt(sum / double(indices.size()));
}

namespace {

nlohmann::json regressor_to_json(const ReactivePolicy::Regressor& r) {
  nlohmann::json j;
  j["kind"] = r.kind == PolicyKind::ridge ? "ridge" : "knn";
  j["train_count"] = r.train_count;
  if (r.kind == PolicyKind::ridge) {
    std::vector<std::vector<double>> rows;
    for (Eigen::Index i = 0; i < r.W.rows(); ++i) {
      rows.emplace_back(r.W.row(i).begin(), r.W.row(i).end());
    }
    j["W"] = rows;
  } else {
    j["k"] = r.k;
    std::vector<std::vector<double>> obs, act;
    for (Eigen::Index i = 0; i < r.ref_obs.rows(); ++i) {
      obs.emplace_back(r.ref_obs.row(i).begin(), r.ref_obs.row(i).end());
      act.emplace_back(r.ref_act.row(i).begin(), r.ref_act.row(i).end());
    }
    j["ref_obs"] = obs;
    j["ref_act"] = act;
  }
  return j;
}

ReactivePolicy::Regressor regressor_from_json(const nlohmann::json& j) {
  ReactivePolicy::Regressor r;
  r.kind = j.at("kind").get<std::string>() == "ridge" ? PolicyKind::ridge : PolicyKind::knn;
  r.train_count = j.at("train_count").get<std::size_t>();
  auto to_rowmat = [](const nlohmann::json& rows) {
    const auto n = rows.size();
    const auto c = n == 0 ? 0 : rows[0].size();
    RowMat m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(c));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < c; ++k) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k].get<double>();
      }
    }
    return m;
  };
  if (r.kind == PolicyKind::ridge) {
    r.W = Mat(to_rowmat(j.at("W")));
  } else {
    r.k = j.at("k").get<int>();
    r.ref_obs = to_rowmat(j.at("ref_obs"));
    r.ref_act = to_rowmat(j.at("ref_act"));
  }
  return r;
}

}  // namespace

void save_policy_json(const ReactivePolicy& policy, const std::string& path) {
  nlohmann::json j;
  j["d"] = policy.d;
  j["l"] = policy.l;
  j["W_window"] = policy.W_window;
  j["fallback"] = regressor_to_json(policy.fallback);
  j["fallback_modes"] = policy.fallback_modes;
  nlohmann::json modes = nlohmann::json::object();
  for (const auto& [mode, r] : policy.modes) modes[std::to_string(mode)] = regressor_to_json(r);
  j["modes"] = std::move(modes);
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
  out << j.dump() << "\n";
}

ReactivePolicy load_policy_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  nlohmann::json j;
  in >> j;
  ReactivePolicy policy;
  policy.d = j.at("d").get<int>();
  policy.l = j.at("l").get<int>();
  policy.W_window = j.at("W_window").get<int>();
  policy.fallback = regressor_from_json(j.at("fallback"));
  policy.fallback_modes = j.at("fallback_modes").get<std::vector<int>>();
  for (const auto& [key, r] : j.at("modes").items()) {
    policy.modes.emplace(std::stoi(key), regressor_from_json(r));
  }
  return policy;
}

}  // namespace lipshare
