#pragma once

#include "lipshare/dataset.hpp"
#include "lipshare/modes.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lipshare {

// Discrete task-mode model with Gaussian emissions. A(i, j) is the
// probability of moving from state i to state j; rows sum to 1.
struct GaussianHmm {
  int N = 0;
  Mat A;                   // N x N, row-stochastic
  std::vector<Vec> means;  // N vectors of emission dimension
  std::vector<Mat> covs;   // N SPD matrices
  Vec rho;                 // initial state distribution

  int dim() const { return means.empty() ? 0 : static_cast<int>(means[0].size()); }
  void validate(double tol = 1e-9) const;
};

struct FitConfig {
  int max_iters = 200;
  double tol = 1e-6;        // relative log-likelihood improvement stop
  double cov_floor = 1e-6;  // added to covariance diagonals each M-step
  int restarts = 5;
  std::uint64_t seed = 0;
};

struct FitResult {
  GaussianHmm model;
  std::vector<double> loglik_history;  // of the winning restart
  int best_restart = 0;
};

// k-means++ clustering of the pooled frames; means/covariances from the
// clusters, uniform A and rho.
GaussianHmm kmeans_init(const std::vector<RowMat>& sequences, int N, std::uint64_t seed,
                        double cov_floor = 1e-6);

// Multi-sequence Baum-Welch (log-space forward-backward), best of restarts.
FitResult fit_baum_welch(const std::vector<RowMat>& sequences, int N, const FitConfig& cfg);

// MAP state path; argmax ties resolve to the lowest state index.
ModeAssignment viterbi(const GaussianHmm& hmm, const RowMat& sequence);

double loglik(const GaussianHmm& hmm, const RowMat& sequence);

// Causal filtering distribution P(X_t | o_1..o_t), advanced one frame at a
// time. One instance per stream; not shareable across streams.
class ForwardFilter {
 public:
  explicit ForwardFilter(const GaussianHmm& hmm);

  const Vec& step(const Eigen::Ref<const Vec>& frame);
  const Vec& posterior() const;
  int steps() const { return steps_; }
  void reset();

 private:
  const GaussianHmm* hmm_;
  std::vector<double> log_norms_;  // per-state Gaussian log normalizers
  std::vector<Eigen::LLT<Mat>> chols_;
  Vec post_;
  int steps_ = 0;
};

// Convenience: filter a whole prefix and return the final posterior.
Vec forward_filter(const GaussianHmm& hmm, const RowMat& prefix);

// Standardized observation frames of each demonstration, in demo order.
std::vector<RowMat> emission_sequences(const DemoSet& standardized);

// Viterbi per demonstration; per-frame states concatenated in demo order.
ModeAssignment decode_demoset(const GaussianHmm& hmm, const DemoSet& standardized);

// Maps per-frame states to window samples (state at each window's last step).
ModeAssignment window_states(const ModeAssignment& frame_states, const DemoSet& ds, int W);

// JSON: { "N": .., "A": [[..]], "means": [[..]], "covs": [[[..]]], "rho": [..] }
void save_model_json(const GaussianHmm& hmm, const std::string& path);
GaussianHmm load_model_json(const std::string& path);

}  // namespace lipshare
