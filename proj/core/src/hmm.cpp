#include "lipshare/hmm.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

namespace lipshare {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logsumexp_row(const Eigen::Ref<const Vec>& v) {
  const double m = v.maxCoeff();
  if (m == kNegInf) return kNegInf;
  return m + std::log((v.array() - m).exp().sum());
}

// Cached Cholesky form of one state's emission density.
struct GaussianLogPdf {
  Vec mu;
  Mat L;  // lower Cholesky factor
  double log_norm = 0.0;

  static GaussianLogPdf make(const Vec& mu, const Mat& cov) {
    Eigen::LLT<Mat> llt(cov);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorKind::DegenerateCovariance, "covariance is not positive definite");
    }
    GaussianLogPdf g;
    g.mu = mu;
    g.L = llt.matrixL();
    const double logdet = 2.0 * g.L.diagonal().array().log().sum();
    g.log_norm = -0.5 * (double(mu.size()) * std::log(2.0 * M_PI) + logdet);
    return g;
  }

  double operator()(const Eigen::Ref<const Vec>& x) const {
    Vec diff = x - mu;
    L.triangularView<Eigen::Lower>().solveInPlace(diff);
    return log_norm - 0.5 * diff.squaredNorm();
  }
};

std::vector<GaussianLogPdf> emission_pdfs(const GaussianHmm& hmm) {
  std::vector<GaussianLogPdf> pdfs;
  pdfs.reserve(static_cast<std::size_t>(hmm.N));
  for (int j = 0; j < hmm.N; ++j) {
    pdfs.push_back(GaussianLogPdf::make(hmm.means[static_cast<std::size_t>(j)],
                                        hmm.covs[static_cast<std::size_t>(j)]));
  }
  return pdfs;
}

// T x N emission log-densities for one sequence.
Mat emission_logs(const std::vector<GaussianLogPdf>& pdfs, const RowMat& seq) {
  const Eigen::Index T = seq.rows();
  const auto N = static_cast<Eigen::Index>(pdfs.size());
  Mat lb(T, N);
  for (Eigen::Index t = 0; t < T; ++t) {
    const Vec frame = seq.row(t).transpose();
    for (Eigen::Index j = 0; j < N; ++j) lb(t, j) = pdfs[static_cast<std::size_t>(j)](frame);
  }
  return lb;
}

Mat log_matrix(const Mat& m) {
  return m.array().log().matrix();  // log(0) = -inf is fine in the recursions
}

// Log-space forward pass; returns the sequence log-likelihood.
double forward_pass(const Mat& lA, const Vec& lrho, const Mat& lb, Mat& lalpha) {
  const Eigen::Index T = lb.rows();
  const Eigen::Index N = lb.cols();
  lalpha.resize(T, N);
  lalpha.row(0) = (lrho.transpose() + lb.row(0));
  Vec scratch(N);
  for (Eigen::Index t = 1; t < T; ++t) {
    for (Eigen::Index j = 0; j < N; ++j) {
      scratch = lalpha.row(t - 1).transpose() + lA.col(j);
      lalpha(t, j) = logsumexp_row(scratch) + lb(t, j);
    }
  }
  return logsumexp_row(lalpha.row(T - 1).transpose());
}

void backward_pass(const Mat& lA, const Mat& lb, Mat& lbeta) {
  const Eigen::Index T = lb.rows();
  const Eigen::Index N = lb.cols();
  lbeta.resize(T, N);
  lbeta.row(T - 1).setZero();
  Vec scratch(N);
  for (Eigen::Index t = T - 2; t >= 0; --t) {
    for (Eigen::Index i = 0; i < N; ++i) {
      scratch = lA.row(i).transpose() + lb.row(t + 1).transpose() + lbeta.row(t + 1).transpose();
      lbeta(t, i) = logsumexp_row(scratch);
    }
  }
}

struct EStepStats {
  double loglik = 0.0;
  Vec gamma0;     // sum of initial-state posteriors across sequences
  Mat xi_sum;     // N x N expected transition counts
  Vec gamma_sum;  // per-state posterior mass
  Mat obs_sum;    // N x d posterior-weighted observation sums
  std::vector<Mat> gammas;  // per-sequence T x N posteriors, kept for the M-step
};

EStepStats e_step(const GaussianHmm& hmm, const std::vector<RowMat>& seqs) {
  const int N = hmm.N;
  const int d = hmm.dim();
  const auto pdfs = emission_pdfs(hmm);
  const Mat lA = log_matrix(hmm.A);
  const Vec lrho = hmm.rho.array().log().matrix();

  EStepStats st;
  st.gamma0 = Vec::Zero(N);
  st.xi_sum = Mat::Zero(N, N);
  st.gamma_sum = Vec::Zero(N);
  st.obs_sum = Mat::Zero(N, d);
  st.gammas.reserve(seqs.size());

  Mat lalpha, lbeta;
  for (const auto& seq : seqs) {
    const Mat lb = emission_logs(pdfs, seq);
    const double ll = forward_pass(lA, lrho, lb, lalpha);
    if (!std::isfinite(ll)) {
      throw Error(ErrorKind::Underflow, "sequence has zero likelihood under the model");
    }
    backward_pass(lA, lb, lbeta);
    st.loglik += ll;

    const Eigen::Index T = seq.rows();
    Mat gamma = ((lalpha + lbeta).array() - ll).exp().matrix();
    // Normalize each row; rounding keeps them at 1 to machine precision.
    for (Eigen::Index t = 0; t < T; ++t) gamma.row(t) /= gamma.row(t).sum();

    st.gamma0 += gamma.row(0).transpose();
    st.gamma_sum += gamma.colwise().sum().transpose();
    st.obs_sum += gamma.transpose() * seq;
    for (Eigen::Index t = 0; t + 1 < T; ++t) {
      for (int i = 0; i < N; ++i) {
        for (int j = 0; j < N; ++j) {
          const double lxi = lalpha(t, i) + lA(i, j) + lb(t + 1, j) + lbeta(t + 1, j) - ll;
          st.xi_sum(i, j) += std::exp(lxi);
        }
      }
    }
    st.gammas.push_back(std::move(gamma));
  }
  return st;
}

void m_step(const EStepStats& st, const std::vector<RowMat>& seqs, double cov_floor,
            GaussianHmm& hmm) {
  const int N = hmm.N;
  const int d = hmm.dim();

  for (int i = 0; i < N; ++i) {
    const double row = st.xi_sum.row(i).sum();
    if (row > 0.0) {
      hmm.A.row(i) = st.xi_sum.row(i) / row;
    } else {
      hmm.A.row(i).setConstant(1.0 / N);  // state never left: keep it unbiased
    }
  }
  hmm.rho = st.gamma0 / st.gamma0.sum();

  for (int j = 0; j < N; ++j) {
    const double mass = st.gamma_sum[j];
    if (mass <= 1e-12) continue;  // starved state keeps its previous parameters
    hmm.means[static_cast<std::size_t>(j)] = st.obs_sum.row(j).transpose() / mass;
  }
  std::vector<Mat> scatter(static_cast<std::size_t>(N), Mat::Zero(d, d));
  for (std::size_t s = 0; s < seqs.size(); ++s) {
    const RowMat& seq = seqs[s];
    const Mat& gamma = st.gammas[s];
    for (Eigen::Index t = 0; t < seq.rows(); ++t) {
      const Vec frame = seq.row(t).transpose();
      for (int j = 0; j < N; ++j) {
        const Vec diff = frame - hmm.means[static_cast<std::size_t>(j)];
        scatter[static_cast<std::size_t>(j)] += gamma(t, j) * (diff * diff.transpose());
      }
    }
  }
  for (int j = 0; j < N; ++j) {
    const double mass = st.gamma_sum[j];
    if (mass <= 1e-12) continue;
    Mat cov = scatter[static_cast<std::size_t>(j)] / mass;
    cov.diagonal().array() += cov_floor;
    hmm.covs[static_cast<std::size_t>(j)] = std::move(cov);
  }
}

void check_sequences(const std::vector<RowMat>& seqs, int N) {
  if (seqs.empty()) throw Error(ErrorKind::EmptyInput, "no emission sequences");
  const Eigen::Index d = seqs.front().cols();
  Eigen::Index total = 0;
  for (const auto& s : seqs) {
    if (s.cols() != d) {
      throw Error(ErrorKind::DimensionMismatch, "emission sequences differ in dimension");
    }
    total += s.rows();
  }
  if (total < N) {
    throw Error(ErrorKind::EmptyInput, "fewer samples than states");
  }
}

}  // namespace

void GaussianHmm::validate(double tol) const {
  if (N < 1 || A.rows() != N || A.cols() != N || rho.size() != N ||
      means.size() != static_cast<std::size_t>(N) || covs.size() != static_cast<std::size_t>(N)) {
    throw Error(ErrorKind::DimensionMismatch, "inconsistent HMM shapes");
  }
  for (int i = 0; i < N; ++i) {
    if (std::abs(A.row(i).sum() - 1.0) > tol) {
      throw Error(ErrorKind::InvalidValue, "transition row " + std::to_string(i) +
                                               " does not sum to 1");
    }
    if (A.row(i).minCoeff() < 0.0) {
      throw Error(ErrorKind::InvalidValue, "negative transition probability");
    }
  }
  if (std::abs(rho.sum() - 1.0) > tol || rho.minCoeff() < 0.0) {
    throw Error(ErrorKind::InvalidValue, "initial distribution does not sum to 1");
  }
  for (int j = 0; j < N; ++j) {
    Eigen::LLT<Mat> llt(covs[static_cast<std::size_t>(j)]);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorKind::DegenerateCovariance,
                  "covariance of state " + std::to_string(j) + " is not positive definite");
    }
  }
}

GaussianHmm kmeans_init(const std::vector<RowMat>& sequences, int N, std::uint64_t seed,
                        double cov_floor) {
  if (N < 1) throw Error(ErrorKind::InvalidArgument, "need at least one state");
  check_sequences(sequences, N);

  Eigen::Index total = 0;
  for (const auto& s : sequences) total += s.rows();
  const Eigen::Index d = sequences.front().cols();
  RowMat X(total, d);
  Eigen::Index row = 0;
  for (const auto& s : sequences) {
    X.middleRows(row, s.rows()) = s;
    row += s.rows();
  }

  std::mt19937_64 rng(seed);
  std::vector<Eigen::Index> centers;
  centers.reserve(static_cast<std::size_t>(N));
  centers.push_back(static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(total)));

  // k-means++ seeding on squared distances.
  Vec d2 = (X.rowwise() - X.row(centers[0])).rowwise().squaredNorm();
  while (static_cast<int>(centers.size()) < N) {
    const double sum = d2.sum();
    Eigen::Index pick = 0;
    if (sum > 0.0) {
      std::uniform_real_distribution<double> u(0.0, sum);
      double target = u(rng);
      double acc = 0.0;
      for (Eigen::Index i = 0; i < total; ++i) {
        acc += d2[i];
        if (acc >= target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(total));
    }
    centers.push_back(pick);
    d2 = d2.cwiseMin((X.rowwise() - X.row(pick)).rowwise().squaredNorm());
  }

  Mat centroids(N, d);
  for (int j = 0; j < N; ++j) centroids.row(j) = X.row(centers[static_cast<std::size_t>(j)]);

  std::vector<int> assign(static_cast<std::size_t>(total), -1);
  for (int iter = 0; iter < 50; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < total; ++i) {
      int best = 0;
      double best_d = (X.row(i) - centroids.row(0).eval()).squaredNorm();
      for (int j = 1; j < N; ++j) {
        const double dj = (X.row(i) - centroids.row(j).eval()).squaredNorm();
        if (dj < best_d) {
          best_d = dj;
          best = j;
        }
      }
      if (assign[static_cast<std::size_t>(i)] != best) {
        assign[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;

    Mat sums = Mat::Zero(N, d);
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(N), 0);
    for (Eigen::Index i = 0; i < total; ++i) {
      sums.row(assign[static_cast<std::size_t>(i)]) += X.row(i);
      ++counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
    }
    for (int j = 0; j < N; ++j) {
      if (counts[static_cast<std::size_t>(j)] > 0) {
        centroids.row(j) = sums.row(j) / double(counts[static_cast<std::size_t>(j)]);
      } else {
        // Re-seed an empty cluster with the point farthest from its centroid.
        Eigen::Index far = 0;
        double far_d = -1.0;
        for (Eigen::Index i = 0; i < total; ++i) {
          const double di =
              (X.row(i) - centroids.row(assign[static_cast<std::size_t>(i)]).eval()).squaredNorm();
          if (di > far_d) {
            far_d = di;
            far = i;
          }
        }
        centroids.row(j) = X.row(far);
        assign[static_cast<std::size_t>(far)] = j;
      }
    }
  }

  GaussianHmm hmm;
  hmm.N = N;
  hmm.A = Mat::Constant(N, N, 1.0 / N);
  hmm.rho = Vec::Constant(N, 1.0 / N);
  hmm.means.resize(static_cast<std::size_t>(N));
  hmm.covs.resize(static_cast<std::size_t>(N));
  for (int j = 0; j < N; ++j) {
    std::vector<Eigen::Index> members;
    for (Eigen::Index i = 0; i < total; ++i) {
      if (assign[static_cast<std::size_t>(i)] == j) members.push_back(i);
    }
    Vec mu = centroids.row(j).transpose();
    Mat cov = Mat::Zero(d, d);
    for (Eigen::Index i : members) {
      const Vec diff = X.row(i).transpose() - mu;
      cov += diff * diff.transpose();
    }
    if (!members.empty()) cov /= double(members.size());
    cov.diagonal().array() += cov_floor;
    hmm.means[static_cast<std::size_t>(j)] = std::move(mu);
    hmm.covs[static_cast<std::size_t>(j)] = std::move(cov);
  }
  return hmm;
}

FitResult fit_baum_welch(const std::vector<RowMat>& sequences, int N, const FitConfig& cfg) {
  if (N < 1) throw Error(ErrorKind::InvalidArgument, "need at least one state");
  check_sequences(sequences, N);
  for (const auto& s : sequences) {
    if (s.rows() < 2) {
      throw Error(ErrorKind::StreamTooShort, "every sequence needs at least 2 frames");
    }
  }
  const int restarts = std::max(1, cfg.restarts);

  struct RestartOutcome {
    GaussianHmm model;
    std::vector<double> history;
    bool ok = false;
    std::string error;
  };
  std::vector<RestartOutcome> outcomes(static_cast<std::size_t>(restarts));

  parallel_blocks(static_cast<std::size_t>(restarts), restarts,
                  [&](std::size_t begin, std::size_t end) {
                    for (std::size_t r = begin; r < end; ++r) {
                      RestartOutcome& out = outcomes[r];
                      try {
                        GaussianHmm hmm =
                            kmeans_init(sequences, N, derive_seed(cfg.seed, r), cfg.cov_floor);
                        double prev = kNegInf;
                        for (int iter = 0; iter < cfg.max_iters; ++iter) {
                          EStepStats st = e_step(hmm, sequences);
                          out.history.push_back(st.loglik);
                          if (prev != kNegInf &&
                              st.loglik - prev <= cfg.tol * std::max(1.0, std::abs(prev))) {
                            break;
                          }
                          prev = st.loglik;
                          m_step(st, sequences, cfg.cov_floor, hmm);
                        }
                        out.model = std::move(hmm);
                        out.ok = true;
                      } catch (const std::exception& e) {
                        out.error = e.what();
                      }
                    }
                  });

  int best = -1;
  for (int r = 0; r < restarts; ++r) {
    const auto& o = outcomes[static_cast<std::size_t>(r)];
    if (!o.ok) continue;
    if (best < 0 ||
        o.history.back() > outcomes[static_cast<std::size_t>(best)].history.back()) {
      best = r;
    }
  }
  if (best < 0) {
    throw Error(ErrorKind::DegenerateCovariance,
                "every restart failed: " + outcomes.front().error);
  }

  FitResult result;
  result.model = std::move(outcomes[static_cast<std::size_t>(best)].model);
  result.loglik_history = std::move(outcomes[static_cast<std::size_t>(best)].history);
  result.best_restart = best;
  result.model.validate(1e-9);
  return result;
}

ModeAssignment viterbi(const GaussianHmm& hmm, const RowMat& sequence) {
  if (sequence.rows() == 0) throw Error(ErrorKind::EmptyInput, "empty sequence");
  if (sequence.cols() != hmm.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "sequence dimension does not match the model");
  }
  const Eigen::Index T = sequence.rows();
  const int N = hmm.N;
  const auto pdfs = emission_pdfs(hmm);
  const Mat lA = log_matrix(hmm.A);

  Mat delta(T, N);
  Eigen::MatrixXi from(T, N);
  for (int j = 0; j < N; ++j) {
    delta(0, j) = std::log(hmm.rho[j]) + pdfs[static_cast<std::size_t>(j)](sequence.row(0).transpose());
  }
  for (Eigen::Index t = 1; t < T; ++t) {
    const Vec frame = sequence.row(t).transpose();
    for (int j = 0; j < N; ++j) {
      int arg = 0;
      double best = delta(t - 1, 0) + lA(0, j);
      for (int i = 1; i < N; ++i) {
        const double cand = delta(t - 1, i) + lA(i, j);
        if (cand > best) {  // strict: ties keep the lowest from-state
          best = cand;
          arg = i;
        }
      }
      delta(t, j) = best + pdfs[static_cast<std::size_t>(j)](frame);
      from(t, j) = arg;
    }
  }

  ModeAssignment path;
  path.source = ModeAssignment::Source::viterbi;
  path.states.resize(static_cast<std::size_t>(T));
  int last = 0;
  for (int j = 1; j < N; ++j) {
    if (delta(T - 1, j) > delta(T - 1, last)) last = j;
  }
  path.states.back() = last;
  for (Eigen::Index t = T - 1; t > 0; --t) {
    last = from(t, last);
    path.states[static_cast<std::size_t>(t - 1)] = last;
  }
  return path;
}

double loglik(const GaussianHmm& hmm, const RowMat& sequence) {
  if (sequence.rows() == 0) throw Error(ErrorKind::EmptyInput, "empty sequence");
  if (sequence.cols() != hmm.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "sequence dimension does not match the model");
  }
  const auto pdfs = emission_pdfs(hmm);
  const Mat lb = emission_logs(pdfs, sequence);
  Mat lalpha;
  return forward_pass(log_matrix(hmm.A), hmm.rho.array().log().matrix(), lb, lalpha);
}

ForwardFilter::ForwardFilter(const GaussianHmm& hmm) : hmm_(&hmm) {
  hmm.validate(1e-6);
  chols_.reserve(static_cast<std::size_t>(hmm.N));
  log_norms_.reserve(static_cast<std::size_t>(hmm.N));
  for (int j = 0; j < hmm.N; ++j) {
    Eigen::LLT<Mat> llt(hmm.covs[static_cast<std::size_t>(j)]);
    const double logdet = 2.0 * Mat(llt.matrixL()).diagonal().array().log().sum();
    log_norms_.push_back(-0.5 * (double(hmm.dim()) * std::log(2.0 * M_PI) + logdet));
    chols_.push_back(std::move(llt));
  }
  post_ = Vec::Zero(hmm.N);
}

const Vec& ForwardFilter::step(const Eigen::Ref<const Vec>& frame) {
  if (frame.size() != hmm_->dim()) {
    throw Error(ErrorKind::DimensionMismatch, "frame dimension does not match the model");
  }
  const int N = hmm_->N;
  Vec lp(N);
  for (int j = 0; j < N; ++j) {
    Vec diff = frame - hmm_->means[static_cast<std::size_t>(j)];
    chols_[static_cast<std::size_t>(j)].matrixL().solveInPlace(diff);
    lp[j] = log_norms_[static_cast<std::size_t>(j)] - 0.5 * diff.squaredNorm();
  }
  if (steps_ == 0) {
    lp += hmm_->rho.array().log().matrix();
  } else {
    const Vec pred = hmm_->A.transpose() * post_;
    lp += pred.array().log().matrix();
  }
  const double m = lp.maxCoeff();
  if (m == kNegInf || std::isnan(m)) {
    throw Error(ErrorKind::Underflow, "filtering distribution vanished");
  }
  Vec w = (lp.array() - m).exp();
  post_ = w / w.sum();
  ++steps_;
  return post_;
}

const Vec& ForwardFilter::posterior() const {
  if (steps_ == 0) throw Error(ErrorKind::EmptyInput, "no frames filtered yet");
  return post_;
}

void ForwardFilter::reset() {
  post_.setZero();
  steps_ = 0;
}

Vec forward_filter(const GaussianHmm& hmm, const RowMat& prefix) {
  if (prefix.rows() == 0) throw Error(ErrorKind::EmptyInput, "empty prefix");
  ForwardFilter f(hmm);
  for (Eigen::Index t = 0; t < prefix.rows(); ++t) f.step(prefix.row(t).transpose());
  return f.posterior();
}

std::vector<RowMat> emission_sequences(const DemoSet& standardized) {
  std::vector<RowMat> seqs;
  seqs.reserve(standardized.demos.size());
  for (const auto& demo : standardized.demos) seqs.push_back(demo.obs);
  return seqs;
}

ModeAssignment decode_demoset(const GaussianHmm& hmm, const DemoSet& standardized) {
  ModeAssignment all;
  all.source = ModeAssignment::Source::viterbi;
  for (const auto& demo : standardized.demos) {
    ModeAssignment part = viterbi(hmm, demo.obs);
    all.states.insert(all.states.end(), part.states.begin(), part.states.end());
  }
  return all;
}

ModeAssignment window_states(const ModeAssignment& frame_states, const DemoSet& ds, int W) {
  if (frame_states.size() != ds.total_records()) {
    throw Error(ErrorKind::DimensionMismatch, "frame states do not cover the DemoSet");
  }
  ModeAssignment out;
  out.source = frame_states.source;
  std::size_t offset = 0;
  for (const auto& demo : ds.demos) {
    const auto T = static_cast<std::size_t>(demo.size());
    for (std::size_t t = static_cast<std::size_t>(W) - 1; t < T; ++t) {
      out.states.push_back(frame_states.states[offset + t]);
    }
    offset += T;
  }
  return out;
}

void save_model_json(const GaussianHmm& hmm, const std::string& path) {
  nlohmann::json j;
  j["N"] = hmm.N;
  auto mat_to_json = [](const Mat& m) {
    std::vector<std::vector<double>> rows;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      rows.emplace_back(m.row(i).begin(), m.row(i).end());
    }
    return rows;
  };
  j["A"] = mat_to_json(hmm.A);
  std::vector<std::vector<double>> means;
  for (const auto& mu : hmm.means) means.emplace_back(mu.begin(), mu.end());
  j["means"] = means;
  std::vector<std::vector<std::vector<double>>> covs;
  for (const auto& cov : hmm.covs) covs.push_back(mat_to_json(cov));
  j["covs"] = covs;
  j["rho"] = std::vector<double>(hmm.rho.begin(), hmm.rho.end());
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

GaussianHmm load_model_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  nlohmann::json j;
  in >> j;
  GaussianHmm hmm;
  hmm.N = j.at("N").get<int>();
  auto mat_from_json = [](const nlohmann::json& rows) {
    const auto r = rows.size();
    const auto c = rows.empty() ? 0 : rows[0].size();
    Mat m(r, c);
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t k = 0; k < c; ++k) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k].get<double>();
    }
    return m;
  };
  hmm.A = mat_from_json(j.at("A"));
  for (const auto& mu : j.at("means")) {
    auto v = mu.get<std::vector<double>>();
    hmm.means.push_back(Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())));
  }
  for (const auto& cov : j.at("covs")) hmm.covs.push_back(mat_from_json(cov));
  auto rho = j.at("rho").get<std::vector<double>>();
  hmm.rho = Eigen::Map<const Vec>(rho.data(), static_cast<Eigen::Index>(rho.size()));
  hmm.validate(1e-6);
  return hmm;
}

}  // namespace lipshare
