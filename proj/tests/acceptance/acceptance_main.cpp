// Acceptance suite: one numbered criterion per function, one pass/fail line
// per criterion on stdout. Run with no arguments to execute everything, or
// with a criterion number to run a single one (the ctest entries do that).
#include <lipshare/arbitration.hpp>
#include <lipshare/dataset.hpp>
#include <lipshare/gate.hpp>
#include <lipshare/hmm.hpp>
#include <lipshare/lipschitz.hpp>
#include <lipshare/policy.hpp>
#include <lipshare/report.hpp>
#include <lipshare/segmentation.hpp>
#include <lipshare/stats.hpp>
#include <lipshare/synthgen.hpp>

#include "../oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace lipshare;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool cond, const std::string& why) {
    if (!cond && pass) {
      pass = false;
      detail = why;
    }
  }
};

GaussianHmm random_model(int N, int d, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.1, 1.0);
  GaussianHmm hmm;
  hmm.N = N;
  hmm.A.resize(N, N);
  for (int i = 0; i < N; ++i) {
    double row = 0;
    for (int j = 0; j < N; ++j) {
      hmm.A(i, j) = unif(rng);
      row += hmm.A(i, j);
    }
    hmm.A.row(i) /= row;
  }
  hmm.rho.resize(N);
  double sum = 0;
  for (int i = 0; i < N; ++i) {
    hmm.rho[i] = unif(rng);
    sum += hmm.rho[i];
  }
  hmm.rho /= sum;
  for (int j = 0; j < N; ++j) {
    Vec mu(d);
    for (int c = 0; c < d; ++c) mu[c] = 3.0 * gauss(rng);
    Mat R(d, d);
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) R(r, c) = gauss(rng);
    }
    hmm.means.push_back(std::move(mu));
    hmm.covs.push_back(Mat(R * R.transpose() + 0.3 * Mat::Identity(d, d)));
  }
  return hmm;
}

RowMat sample_model(const GaussianHmm& hmm, int T, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int d = hmm.dim();
  std::vector<Eigen::LLT<Mat>> chols;
  for (const auto& cov : hmm.covs) chols.emplace_back(cov);
  auto pick = [&](const Vec& p) {
    double r = unif(rng);
    double acc = 0;
    for (int j = 0; j < p.size(); ++j) {
      acc += p[j];
      if (r <= acc) return j;
    }
    return int(p.size()) - 1;
  };
  RowMat seq(T, d);
  int s = pick(hmm.rho);
  for (int t = 0; t < T; ++t) {
    if (t > 0) s = pick(hmm.A.row(s).transpose());
    Vec z(d);
    for (int c = 0; c < d; ++c) z[c] = gauss(rng);
    seq.row(t) =
        (hmm.means[static_cast<std::size_t>(s)] + Mat(chols[static_cast<std::size_t>(s)].matrixL()) * z)
            .transpose();
  }
  return seq;
}

// ---------------------------------------------------------------------------

// 1. Viterbi path log-probability equals the exhaustive maximum.
Outcome criterion_1() {
  Outcome out;
  const auto start = Clock::now();
  std::mt19937_64 rng(1001);
  for (int rep = 0; rep < 200 && out.pass; ++rep) {
    const int N = 2 + int(rng() % 2);
    const int T = 2 + int(rng() % 7);
    const GaussianHmm hmm = random_model(N, 2, rng);
    const RowMat seq = sample_model(hmm, T, rng);
    const auto path = viterbi(hmm, seq);
    const double score = oracle::path_logprob(hmm, seq, path.states);
    const double brute = oracle::brute_force_best_path(hmm, seq);
    out.require(std::abs(score - brute) <= 1e-9 * std::max(1.0, std::abs(brute)),
                "case " + std::to_string(rep) + ": viterbi " + format_double(score) +
                    " vs brute " + format_double(brute));
  }
  const double elapsed = seconds_since(start);
  out.require(elapsed < 10.0, "took " + format_double(elapsed) + " s (budget 10 s)");
  out.detail = "200 models, " + format_double(elapsed) + " s";
  return out;
}

// 2. Baum-Welch monotone log-likelihood and stochastic rows.
Outcome criterion_2() {
  Outcome out;
  std::mt19937_64 rng(2002);
  for (int rep = 0; rep < 50 && out.pass; ++rep) {
    const int N = 1 + int(rng() % 3);
    const GaussianHmm gen = random_model(std::max(N, 1), 2, rng);
    const RowMat seq = sample_model(gen, 150 + int(rng() % 150), rng);
    FitConfig cfg;
    cfg.restarts = 1;
    cfg.seed = rng();
    cfg.max_iters = 30;
    const auto fit = fit_baum_welch({seq}, N, cfg);
    for (std::size_t i = 1; i < fit.loglik_history.size(); ++i) {
      out.require(fit.loglik_history[i] >=
                      fit.loglik_history[i - 1] - 1e-6 * std::abs(fit.loglik_history[i - 1]),
                  "case " + std::to_string(rep) + ": loglik dropped at iteration " +
                      std::to_string(i));
    }
    for (int i = 0; i < N; ++i) {
      out.require(std::abs(fit.model.A.row(i).sum() - 1.0) <= 1e-12,
                  "case " + std::to_string(rep) + ": row " + std::to_string(i) + " sums to " +
                      format_double(fit.model.A.row(i).sum()));
    }
  }
  out.detail = "50 datasets";
  return out;
}

// 3. Best-permutation Viterbi agreement with ground truth on the default
//    4-mode generator.
Outcome criterion_3() {
  Outcome out;
  const auto start = Clock::now();
  double worst = 1.0;
  for (std::uint64_t seed = 0; seed < 5 && out.pass; ++seed) {
    const DemoSet raw = generate(default_config(seed));
    const DemoSet std_ds = apply_standardizer(raw, fit_standardizer(raw));
    FitConfig cfg;
    cfg.seed = seed;
    const auto fit = fit_baum_welch(emission_sequences(std_ds), 4, cfg);
    const ModeAssignment decoded = decode_demoset(fit.model, std_ds);

    std::vector<int> truth;
    for (const auto& demo : raw.demos) {
      truth.insert(truth.end(), demo.mode_truth.begin(), demo.mode_truth.end());
    }
    std::vector<int> perm{0, 1, 2, 3};
    double best = 0.0;
    do {
      std::size_t hits = 0;
      for (std::size_t t = 0; t < truth.size(); ++t) {
        if (perm[static_cast<std::size_t>(decoded.states[t])] == truth[t]) ++hits;
      }
      best = std::max(best, double(hits) / double(truth.size()));
    } while (std::next_permutation(perm.begin(), perm.end()));
    worst = std::min(worst, best);
    out.require(best >= 0.90, "seed " + std::to_string(seed) + ": agreement " +
                                  format_double(best) + " < 0.90");
  }
  const double elapsed = seconds_since(start);
  out.require(elapsed < 120.0, "took " + format_double(elapsed) + " s (budget 120 s)");
  if (out.pass) {
    out.detail = "worst agreement " + format_double(worst) + ", " + format_double(elapsed) + " s";
  }
  return out;
}

// 4. Parallel == serial == naive oracle, exactly, witnesses included.
Outcome criterion_4() {
  Outcome out;
  SynthConfig cfg = default_config(4);
  cfg.steps_per_demo = 1030;
  cfg.n_demos = 2;
  const DemoSet raw = generate(cfg);
  const DemoSet std_ds = apply_standardizer(raw, fit_standardizer(raw));
  SampleSet ss = make_windows(std_ds, 10);
  const Eigen::Index n = std::min<Eigen::Index>(2000, ss.size());
  ss.obs = RowMat(ss.obs.topRows(n));
  ss.act = RowMat(ss.act.topRows(n));
  ss.demo_index.resize(static_cast<std::size_t>(n));
  ss.t_index.resize(static_cast<std::size_t>(n));
  if (!ss.mode_truth.empty()) ss.mode_truth.resize(static_cast<std::size_t>(n));

  QuotientOptions serial;
  serial.threads = 1;
  QuotientOptions parallel;
  parallel.threads = 8;
  const auto rs = pointwise_quotients(ss, serial);
  const auto rp = pointwise_quotients(ss, parallel);
  const auto ref = oracle::naive_quotients(ss.obs, ss.act, serial.epsilon_dup, serial.delta_dup);
  for (Eigen::Index i = 0; i < n && out.pass; ++i) {
    const auto iu = static_cast<std::size_t>(i);
    const bool same_serial = rs.entries[iu].q == ref[iu].q &&
                             rs.entries[iu].witness == ref[iu].witness &&
                             rs.entries[iu].degenerate == ref[iu].degenerate;
    const bool same_parallel =
        rp.entries[iu].q == rs.entries[iu].q && rp.entries[iu].witness == rs.entries[iu].witness;
    out.require(same_serial, "sample " + std::to_string(i) + ": serial differs from the oracle");
    out.require(same_parallel, "sample " + std::to_string(i) + ": parallel differs from serial");
  }
  out.detail = std::to_string(n) + " samples, d=" + std::to_string(ss.d());
  return out;
}

// 5. Quotient engine throughput at n=10000, d=100, 8 worker threads.
Outcome criterion_5() {
  Outcome out;
  SynthConfig cfg;
  cfg.n_modes = 1;
  cfg.transition = Mat::Ones(1, 1);
  cfg.d_raw = 10;
  cfg.l = 6;
  cfg.dt = 0.1;
  cfg.steps_per_demo = 5010;
  cfg.n_demos = 2;
  cfg.seed = 5;
  ModeSpec m;
  m.kind = ModeSpec::Kind::functional;
  m.mean = Vec::Zero(10);
  m.gain = 0.5 * Mat::Random(6, 10);
  m.offset = Vec::Zero(6);
  m.excitation = 1.0;
  m.sigma_o = 0.05;
  m.sigma_u = 0.1;
  cfg.modes.push_back(std::move(m));
  const DemoSet raw = generate(cfg);
  const DemoSet std_ds = apply_standardizer(raw, fit_standardizer(raw));
  SampleSet ss = make_windows(std_ds, 10);
  const Eigen::Index n = std::min<Eigen::Index>(10000, ss.size());
  ss.obs = RowMat(ss.obs.topRows(n));
  ss.act = RowMat(ss.act.topRows(n));
  ss.demo_index.resize(static_cast<std::size_t>(n));
  ss.t_index.resize(static_cast<std::size_t>(n));
  if (!ss.mode_truth.empty()) ss.mode_truth.resize(static_cast<std::size_t>(n));

  QuotientOptions opts;
  opts.threads = 8;
  const auto start = Clock::now();
  const auto report = pointwise_quotients(ss, opts);
  const double elapsed = seconds_since(start);
  out.require(report.entries.size() == static_cast<std::size_t>(n), "missing entries");
  out.require(elapsed < 30.0, "took " + format_double(elapsed) + " s (budget 30 s)");
  out.detail = "n=" + std::to_string(n) + ", d=" + std::to_string(ss.d()) + ", " +
               format_double(elapsed) + " s on 8 threads";
  return out;
}

// 6. HMM-conditioned quotients significantly below the proportion-matched
//    random control (Welch, p < 0.001) on every seed.
Outcome criterion_6() {
  Outcome out;
  double worst_p = 0.0;
  for (std::uint64_t seed = 0; seed < 5 && out.pass; ++seed) {
    const DemoSet raw = generate(default_config(seed));
    const DemoSet std_ds = apply_standardizer(raw, fit_standardizer(raw));
    const SampleSet ss = make_windows(std_ds, 10);
    FitConfig cfg;
    cfg.seed = seed;
    const auto fit = fit_baum_welch(emission_sequences(std_ds), 4, cfg);
    const ModeAssignment hmm_modes = window_states(decode_demoset(fit.model, std_ds), std_ds, 10);
    const ModeAssignment rand_modes =
        random_segmentation(ss, 4, derive_seed(seed, 91), empirical_proportions(hmm_modes));

    const auto pooled = merge_reports(mode_quotients(ss, hmm_modes));
    const double K = select_threshold(pooled, 80.0).K;
    const auto cmp = compare_segmentations(ss, hmm_modes, rand_modes, K);
    worst_p = std::max(worst_p, cmp.ttest.p);
    out.require(cmp.ttest.p < 0.001, "seed " + std::to_string(seed) + ": p = " +
                                         format_double(cmp.ttest.p));
    out.require(cmp.mean_a < cmp.mean_b,
                "seed " + std::to_string(seed) + ": HMM mean " + format_double(cmp.mean_a) +
                    " not below control mean " + format_double(cmp.mean_b));
  }
  if (out.pass) out.detail = "5 seeds, worst p = " + format_double(worst_p);
  return out;
}

// 7. Mode-conditioning shrinks the voluntary set at the global 80th
//    percentile threshold on every seed.
Outcome criterion_7() {
  Outcome out;
  for (std::uint64_t seed = 0; seed < 5 && out.pass; ++seed) {
    const DemoSet raw = generate(default_config(seed));
    const DemoSet std_ds = apply_standardizer(raw, fit_standardizer(raw));
    const SampleSet ss = make_windows(std_ds, 10);
    const auto global = pointwise_quotients(ss);
    const double K = select_threshold(global, 80.0).K;

    FitConfig cfg;
    cfg.seed = seed;
    const auto fit = fit_baum_welch(emission_sequences(std_ds), 4, cfg);
    const ModeAssignment hmm_modes = window_states(decode_demoset(fit.model, std_ds), std_ds, 10);
    const auto reports = mode_quotients(ss, hmm_modes);

    auto ratio_above = [K](const std::vector<QuotientReport>& rs) {
      std::size_t vol = 0;
      std::size_t total = 0;
      for (const auto& r : rs) {
        for (const auto& e : r.entries) {
          ++total;
          if (e.q > K) ++vol;
        }
      }
      return double(vol) / double(total);
    };
    const double uncond = ratio_above({global});
    const double cond = ratio_above(reports);
    out.require(cond < uncond, "seed " + std::to_string(seed) + ": conditioned " +
                                   format_double(cond) + " not below unconditioned " +
                                   format_double(uncond));
    if (seed == 0) {
      out.detail = "seed 0: " + format_double(uncond) + " -> " + format_double(cond);
    }
  }
  return out;
}

// 8. Trade-off trend over the percentile sweep.
Outcome criterion_8() {
  Outcome out;
  const auto start = Clock::now();
  const DemoSet raw = generate(default_config(8));
  PipelineConfig cfg;
  cfg.W = 10;
  cfg.n_states = 4;
  cfg.hmm.seed = 8;
  cfg.blend.beta_adjust = 0.3;
  const std::vector<double> percentiles{100, 90, 80, 70, 60, 50};
  const auto rows = tradeoff_sweep(raw, percentiles, cfg);

  std::vector<double> p, rmse, effort;
  for (const auto& r : rows) {
    p.push_back(r.percentile);
    rmse.push_back(r.reactive_rmse);
    effort.push_back(r.voluntary_effort);
  }
  const double rho_rmse = spearman(p, rmse);
  const double rho_effort = spearman(p, effort);
  const double elapsed = seconds_since(start);
  out.require(rho_rmse >= 0.8, "spearman(percentile, rmse) = " + format_double(rho_rmse));
  out.require(rho_effort <= -0.8, "spearman(percentile, effort) = " + format_double(rho_effort));
  out.require(elapsed < 300.0, "took " + format_double(elapsed) + " s (budget 300 s)");
  out.detail = "rho_rmse = " + format_double(rho_rmse) +
               ", rho_effort = " + format_double(rho_effort) + ", " + format_double(elapsed) + " s";
  return out;
}

// 9. Blending-law identities, exact arithmetic.
Outcome criterion_9() {
  Outcome out;
  std::mt19937_64 rng(9009);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int rep = 0; rep < 100 && out.pass; ++rep) {
    Vec u_r(4), u_v(4);
    for (int c = 0; c < 4; ++c) {
      u_r[c] = gauss(rng);
      u_v[c] = gauss(rng);
    }
    BlendConfig cfg;
    for (double beta : {0.0, 0.5, 1.0}) {
      cfg.beta_adjust = beta;
      const auto off = blend(u_r, u_v, 0, cfg);
      out.require(off.alpha == 0.0 && off.beta == 1.0, "h=0 weights");
      out.require(off.u_hat == u_v, "h=0 passthrough not exact");
      const auto on = blend(u_r, u_v, 1, cfg);
      out.require(on.alpha == 1.0 && on.beta == beta, "h=1 weights");
      if (beta == 0.0) {
        out.require(on.u_hat == u_r, "h=1, beta=0 passthrough not exact");
      } else {
        for (int c = 0; c < 4; ++c) {
          out.require(on.u_hat[c] == 1.0 * u_r[c] + beta * u_v[c],
                      "h=1 combination not exact at channel " + std::to_string(c));
        }
      }
    }
  }
  out.detail = "h in {0,1} x beta in {0, 0.5, 1}, 100 random command pairs";
  return out;
}

// 10. Welch t-test against the recorded reference implementation values.
Outcome criterion_10() {
  Outcome out;
  const auto r = welch_t_test({1, 2, 3}, {4, 5, 6});
  out.require(std::abs(r.t - (-3.6742346141747673)) <= 1e-4,
              "t = " + format_double(r.t));
  out.require(std::abs(r.dof - 4.0) <= 1e-9, "dof = " + format_double(r.dof));
  out.require(std::abs(r.p - 0.021311641128756727) <= 1e-6, "p = " + format_double(r.p));
  out.detail = "t = " + format_double(r.t) + ", dof = " + format_double(r.dof) +
               ", p = " + format_double(r.p);
  return out;
}

// 11. Byte-identical report bundles from two identical CLI pipeline runs.
Outcome criterion_11() {
  Outcome out;
#ifndef LIPSHARE_CLI
  out.require(false, "CLI path not configured");
  return out;
#else
  const auto start = Clock::now();
  const std::string cli = LIPSHARE_CLI;
  const auto scratch =
      std::filesystem::temp_directory_path() / ("lipshare_accept_e2e_" + std::to_string(::getpid()));
  std::filesystem::remove_all(scratch);
  std::filesystem::create_directories(scratch);

  auto shell = [&](const std::string& cmd) {
    const int rc = std::system((cmd + " >> " + (scratch / "log.txt").string() + " 2>&1").c_str());
    return rc == 0;
  };

  SynthConfig synth = default_config(11);
  save_synth_config(synth, (scratch / "synth.json").string());

  bool all_ok = true;
  for (const std::string run : {"a", "b"}) {
    const std::string dir = (scratch / run).string();
    std::filesystem::create_directories(dir);
    const std::string data = dir + "/data.csv";
    auto in = [&](const std::string& f) { return dir + "/" + f; };
    all_ok = all_ok && shell(cli + " gen --config " + (scratch / "synth.json").string() +
                             " --out " + data);
    all_ok = all_ok && shell(cli + " hmm-fit --input " + data +
                             " --states 4 --seed 11 --out " + in("model.json") +
                             " --save-stats " + in("stats.json"));
    all_ok = all_ok && shell(cli + " hmm-decode --input " + data + " --model " + in("model.json") +
                             " --window 10 --out " + in("modes.csv"));
    all_ok = all_ok && shell(cli + " quotients --input " + data + " --window 10 --modes " +
                             in("modes.csv") + " --out " + in("quotients.csv"));
    all_ok = all_ok && shell(cli + " segment --report " + in("quotients.csv") + " --modes " +
                             in("modes.csv") + " --percentile 80 --out " + in("seg.csv"));
    all_ok = all_ok && shell(cli + " train-gate --input " + data + " --window 10 --segmentation " +
                             in("seg.csv") + " --out " + in("gate.json"));
    all_ok = all_ok && shell(cli + " train-policy --input " + data + " --window 10 --segmentation " +
                             in("seg.csv") + " --out " + in("policy.json"));
    std::filesystem::create_directories(dir + "/models");
    for (const std::string f : {"stats.json", "model.json", "gate.json", "policy.json"}) {
      std::filesystem::copy_file(in(f), dir + "/models/" + f,
                                 std::filesystem::copy_options::overwrite_existing);
    }
    all_ok = all_ok && shell(cli + " replay --models " + dir + "/models --input " + data +
                             " --beta 0.3 --out " + in("trace.csv"));
    all_ok = all_ok && shell(cli + " report --out " + dir + "/bundle --quotients " +
                             in("quotients.csv") + " --segmentation " + in("seg.csv") +
                             " --trace " + in("trace.csv") + " --config " +
                             (scratch / "synth.json").string() + " --seed 11");
    if (!all_ok) break;
  }
  out.require(all_ok, "a pipeline stage exited nonzero (see " + (scratch / "log.txt").string() + ")");

  if (out.pass) {
    auto slurp = [](const std::filesystem::path& p) {
      std::ifstream in(p, std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      return ss.str();
    };
    std::size_t compared = 0;
    for (const auto& entry : std::filesystem::directory_iterator(scratch / "a" / "bundle")) {
      const auto name = entry.path().filename();
      out.require(slurp(entry.path()) == slurp(scratch / "b" / "bundle" / name),
                  "bundle file " + name.string() + " differs between runs");
      ++compared;
    }
    out.require(compared >= 6, "bundle has only " + std::to_string(compared) + " files");
    const double elapsed = seconds_since(start);
    out.require(elapsed < 300.0, "took " + format_double(elapsed) + " s (budget 300 s)");
    if (out.pass) {
      out.detail = std::to_string(compared) + " bundle files byte-identical, " +
                   format_double(elapsed) + " s";
      std::filesystem::remove_all(scratch);
    }
  }
  return out;
#endif
}

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome()> run;
};

const std::vector<Criterion> kCriteria = {
    {1, "Viterbi equals exhaustive enumeration", criterion_1},
    {2, "Baum-Welch monotone log-likelihood, stochastic rows", criterion_2},
    {3, "synthetic 4-mode recovery >= 90% agreement", criterion_3},
    {4, "quotient engine: parallel == serial == naive oracle", criterion_4},
    {5, "quotient engine: 10k x 100-d under 30 s", criterion_5},
    {6, "HMM vs random segmentation: p < 0.001, lower mean", criterion_6},
    {7, "mode conditioning shrinks the voluntary set", criterion_7},
    {8, "percentile sweep trade-off trend", criterion_8},
    {9, "blending-law identities, exact arithmetic", criterion_9},
    {10, "Welch t-test reference values", criterion_10},
    {11, "end-to-end CLI determinism, byte-identical bundles", criterion_11},
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  if (argc > 1) only = std::atoi(argv[1]);

  int failures = 0;
  for (const auto& c : kCriteria) {
    if (only != 0 && c.id != only) continue;
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    std::cout << (out.pass ? "[PASS]" : "[FAIL]") << " criterion " << c.id << ": " << c.title;
    if (!out.detail.empty()) std::cout << " (" << out.detail << ")";
    std::cout << std::endl;
    if (!out.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
