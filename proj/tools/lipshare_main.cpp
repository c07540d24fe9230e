// lipshare: predictability analysis and shared-control arbitration over
// demonstration data. Subcommands cover the full offline/online workflow:
// gen, quotients, hmm-fit, hmm-decode, segment, train-gate, train-policy,
// replay, sweep, report.
#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <lipshare/arbitration.hpp>
#include <lipshare/dataset.hpp>
#include <lipshare/gate.hpp>
#include <lipshare/hmm.hpp>
#include <lipshare/lipschitz.hpp>
#include <lipshare/policy.hpp>
#include <lipshare/report.hpp>
#include <lipshare/segmentation.hpp>
#include <lipshare/synthgen.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace lipshare;
using nlohmann::json;

struct GlobalOpts {
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 0;
};

std::vector<double> parse_percentiles(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_double(item, "--percentiles"));
  }
  if (out.empty()) throw Error(ErrorKind::InvalidArgument, "no percentiles given");
  return out;
}

StandardizationStats stats_for(const DemoSet& raw, const std::string& stats_path) {
  return stats_path.empty() ? fit_standardizer(raw) : load_stats(stats_path);
}

void cmd_gen(const std::string& config_path, const std::string& out,
             const std::string& dump_config, const GlobalOpts& g) {
  if (!dump_config.empty()) {
    save_synth_config(default_config(g.seed), dump_config);
    std::cout << "wrote " << dump_config << "\n";
    if (out.empty()) return;
  }
  SynthConfig cfg = config_path.empty() ? default_config(g.seed) : load_synth_config(config_path);
  if (g.seed_given) cfg.seed = g.seed;
  const DemoSet ds = generate(cfg);
  save_demoset(ds, out);
  std::cout << "wrote " << out << " (" << ds.demos.size() << " demos, " << ds.total_records()
            << " records)\n";
}

void cmd_quotients(const std::string& input, int W, const std::string& modes_path,
                   const std::string& stats_path, const std::string& save_stats_path,
                   const std::string& out, double eps, double delta, const GlobalOpts& g) {
  const DemoSet raw = load_demoset(input);
  const StandardizationStats stats = stats_for(raw, stats_path);
  if (!save_stats_path.empty()) save_stats(stats, save_stats_path);
  const SampleSet ss = make_windows(apply_standardizer(raw, stats), W);

  QuotientOptions opts;
  opts.epsilon_dup = eps;
  opts.delta_dup = delta;
  opts.threads = g.threads;

  std::vector<QuotientReport> reports;
  if (modes_path.empty()) {
    reports.push_back(pointwise_quotients(ss, opts));
  } else {
    ModeAssignment modes = load_modes_csv(modes_path);
    reports = mode_quotients(ss, modes, opts);
  }
  save_reports_csv(reports, out);
  std::cout << "wrote " << out << "\n";
}

void cmd_hmm_fit(const std::string& input, int N, const std::string& out,
                 const std::string& save_stats_path, FitConfig cfg, const GlobalOpts& g) {
  if (g.seed_given) cfg.seed = g.seed;
  const DemoSet raw = load_demoset(input);
  const StandardizationStats stats = fit_standardizer(raw);
  if (!save_stats_path.empty()) save_stats(stats, save_stats_path);
  const DemoSet std_ds = apply_standardizer(raw, stats);
  const FitResult fit = fit_baum_welch(emission_sequences(std_ds), N, cfg);
  save_model_json(fit.model, out);
  std::cout << "wrote " << out << " (loglik " << format_double(fit.loglik_history.back())
            << ", " << fit.loglik_history.size() << " iterations, restart " << fit.best_restart
            << ")\n";
}

void cmd_hmm_decode(const std::string& input, const std::string& model_path, int W,
                    const std::string& stats_path, const std::string& out) {
  const DemoSet raw = load_demoset(input);
  const GaussianHmm hmm = load_model_json(model_path);
  const DemoSet std_ds = apply_standardizer(raw, stats_for(raw, stats_path));
  ModeAssignment frames = decode_demoset(hmm, std_ds);
  if (W > 0) {
    save_modes_csv(window_states(frames, std_ds, W), out);
  } else {
    save_modes_csv(frames, out);
  }
  std::cout << "wrote " << out << "\n";
}

void cmd_segment(const std::string& report_path, const std::string& modes_path, double percentile,
                 const std::string& out) {
  const auto reports = load_reports_csv(report_path);
  if (!modes_path.empty()) {
    const ModeAssignment modes = load_modes_csv(modes_path);
    std::size_t covered = 0;
    for (const auto& r : reports) covered += r.entries.size();
    if (covered != modes.size()) {
      throw Error(ErrorKind::DimensionMismatch, "mode file covers " + std::to_string(modes.size()) +
                                                    " samples, report covers " +
                                                    std::to_string(covered));
    }
  }
  const Threshold K = select_threshold(merge_reports(reports), percentile);
  const SegmentationResult seg = split_rv(reports, K);
  save_segmentation_csv(seg, out);
  json j;
  j["K"] = K.K;
  j["percentile"] = K.percentile;
  j["voluntary_ratio"] = seg.voluntary_ratio;
  std::cout << j.dump() << "\n";
}

void cmd_train_gate(const std::string& input, int W, const std::string& seg_path,
                    const std::string& stats_path, const std::string& kind, int k,
                    const std::string& out) {
  const DemoSet raw = load_demoset(input);
  const SampleSet ss = make_windows(apply_standardizer(raw, stats_for(raw, stats_path)), W);
  const SegmentationResult seg = load_segmentation_csv(seg_path);
  if (seg.total_samples != static_cast<std::size_t>(ss.size())) {
    throw Error(ErrorKind::DimensionMismatch, "segmentation does not cover the windowed samples");
  }
  GateConfig cfg;
  cfg.kind = kind == "linear" ? GateKind::linear : GateKind::knn;
  cfg.k = k;
  const GateClassifier gate = train_gate(ss, make_gate_labels(seg), cfg);
  save_gate_json(gate, out);
  json j;
  for (const auto& [mode, mg] : gate.modes) {
    j["train_accuracy"][std::to_string(mode)] = mg.train_accuracy;
  }
  std::cout << "wrote " << out << " " << j.dump() << "\n";
}

void cmd_train_policy(const std::string& input, int W, const std::string& seg_path,
                      const std::string& stats_path, const std::string& kind, double lambda, int k,
                      int min_mode_samples, bool pooled, const std::string& out) {
  const DemoSet raw = load_demoset(input);
  const SampleSet ss = make_windows(apply_standardizer(raw, stats_for(raw, stats_path)), W);
  const SegmentationResult seg = load_segmentation_csv(seg_path);
  if (seg.total_samples != static_cast<std::size_t>(ss.size())) {
    throw Error(ErrorKind::DimensionMismatch, "segmentation does not cover the windowed samples");
  }
  PolicyConfig cfg;
  cfg.kind = kind == "knn" ? PolicyKind::knn : PolicyKind::ridge;
  cfg.lambda = lambda;
  cfg.k = k;
  cfg.min_mode_samples = min_mode_samples;
  cfg.per_mode = !pooled;
  const ReactivePolicy policy = train_policy(seg, ss, cfg);
  save_policy_json(policy, out);
  std::cout << "wrote " << out << " (" << policy.modes.size() << " per-mode regressors, "
            << policy.fallback_modes.size() << " on the fallback)\n";
}

void cmd_replay(const std::string& models_dir, const std::string& input, double beta,
                const std::string& voluntary, double noise_sigma, const std::string& out,
                const GlobalOpts& g) {
  const std::filesystem::path dir(models_dir);
  const StandardizationStats stats = load_stats((dir / "stats.json").string());
  const GaussianHmm hmm = load_model_json((dir / "model.json").string());
  const GateClassifier gate = load_gate_json((dir / "gate.json").string());
  const ReactivePolicy policy = load_policy_json((dir / "policy.json").string());
  if (gate.W != policy.W_window) {
    throw Error(ErrorKind::DimensionMismatch, "gate and policy disagree on the window length");
  }
  const DemoSet raw = load_demoset(input);

  BlendConfig cfg;
  cfg.beta_adjust = beta;
  cfg.seed = g.seed;
  cfg.noise_sigma = noise_sigma;
  if (voluntary == "recorded") {
    cfg.source = VoluntarySource::recorded;
  } else if (voluntary == "zero") {
    cfg.source = VoluntarySource::zero;
  } else if (voluntary == "noise") {
    cfg.source = VoluntarySource::noise;
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown voluntary source '" + voluntary + "'");
  }

  const ArbitrationTrace trace = replay(raw, hmm, gate, policy, stats, policy.W_window, cfg);
  save_trace_csv(trace, out);
  json j;
  j["voluntary_ratio"] = trace.summary.voluntary_ratio;
  j["voluntary_effort"] = trace.summary.voluntary_effort;
  j["reactive_rmse"] = trace.summary.reactive_rmse;
  j["steps"] = trace.summary.total_steps;
  std::cout << j.dump() << "\n";
}

void cmd_sweep(const std::string& input, const std::string& percentiles_csv, int W, int N,
               double beta, int restarts, const std::string& out, const GlobalOpts& g) {
  const DemoSet raw = load_demoset(input);
  PipelineConfig cfg;
  cfg.W = W;
  cfg.n_states = N;
  cfg.hmm.seed = g.seed;
  cfg.hmm.restarts = restarts;
  cfg.blend.beta_adjust = beta;
  cfg.blend.seed = g.seed;
  cfg.threads = g.threads;
  cfg.apply_threads();
  const auto rows = tradeoff_sweep(raw, parse_percentiles(percentiles_csv), cfg);
  save_tradeoff_csv(rows, out);
  std::cout << "wrote " << out << " (" << rows.size() << " rows)\n";
}

void cmd_report(const std::string& out_dir, const std::string& quotients_path,
                const std::string& seg_path, const std::string& trace_path,
                const std::string& tradeoff_path, const std::string& config_path, int bins,
                bool compare, const std::string& input, int W, const std::string& modes_path,
                double percentile, const GlobalOpts& g) {
  ReportArtifacts art;
  art.seed = g.seed;
  art.histogram_bins = bins;
  if (!quotients_path.empty()) art.reports = load_reports_csv(quotients_path);
  if (!seg_path.empty()) art.segmentation = load_segmentation_csv(seg_path);
  if (!tradeoff_path.empty()) art.sweep = load_tradeoff_csv(tradeoff_path);
  art.trace_csv_path = trace_path;
  if (compare) {
    // Mode-conditioned quotients against a proportion-matched random control.
    if (input.empty() || modes_path.empty() || art.reports.empty()) {
      throw Error(ErrorKind::InvalidArgument,
                  "--compare needs --input, --window, --modes and --quotients");
    }
    const DemoSet raw = load_demoset(input);
    const SampleSet ss = make_windows(apply_standardizer(raw, fit_standardizer(raw)), W);
    const ModeAssignment modes = load_modes_csv(modes_path);
    int n_modes = 1;
    for (int s : modes.states) n_modes = std::max(n_modes, s + 1);
    const ModeAssignment control =
        random_segmentation(ss, n_modes, derive_seed(g.seed, 1), empirical_proportions(modes));
    const double K = select_threshold(merge_reports(art.reports), percentile).K;
    QuotientOptions opts;
    opts.threads = g.threads;
    art.comparison = compare_segmentations(ss, modes, control, K, opts);
  }
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + config_path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    art.config_json = ss.str();
  }
  emit_report(art, out_dir);
  std::cout << "wrote bundle " << out_dir << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lipschitz-quotient predictability analysis and shared-control arbitration"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOpts g;
  app.add_option("--seed", g.seed, "master seed for stochastic stages")
      ->each([&g](const std::string&) { g.seed_given = true; });
  app.add_option("--threads", g.threads, "worker threads (0 = hardware concurrency)");

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic demonstration dataset");
  std::string gen_config, gen_out, gen_dump;
  gen->add_option("--config", gen_config, "synthesis config JSON (defaults to the built-in)");
  gen->add_option("--out", gen_out, "output dataset CSV");
  gen->add_option("--dump-config", gen_dump, "write the default config JSON and exit");
  gen->callback([&] {
    if (gen_out.empty() && gen_dump.empty()) {
      throw Error(ErrorKind::InvalidArgument, "gen needs --out or --dump-config");
    }
    cmd_gen(gen_config, gen_out, gen_dump, g);
  });

  // quotients
  auto* quo = app.add_subcommand("quotients", "point-wise Lipschitz quotients over windowed samples");
  std::string quo_in, quo_modes, quo_stats, quo_save_stats, quo_out;
  int quo_W = 10;
  double quo_eps = 1e-9, quo_delta = 1e-9;
  quo->add_option("--input", quo_in, "dataset CSV")->required();
  quo->add_option("--window", quo_W, "window length in steps")->required();
  quo->add_option("--modes", quo_modes, "sample-aligned modes CSV (per-mode quotients)");
  quo->add_option("--stats", quo_stats, "standardizer JSON (otherwise fitted from the input)");
  quo->add_option("--save-stats", quo_save_stats, "write the fitted standardizer JSON");
  quo->add_option("--out", quo_out, "output report CSV")->required();
  quo->add_option("--epsilon", quo_eps, "duplicate tolerance on observations");
  quo->add_option("--delta", quo_delta, "duplicate tolerance on actions");
  quo->callback([&] {
    cmd_quotients(quo_in, quo_W, quo_modes, quo_stats, quo_save_stats, quo_out, quo_eps, quo_delta, g);
  });

  // hmm-fit
  auto* fit = app.add_subcommand("hmm-fit", "train the Gaussian task-mode model");
  std::string fit_in, fit_out, fit_save_stats;
  int fit_N = 4;
  FitConfig fit_cfg;
  fit->add_option("--input", fit_in, "dataset CSV")->required();
  fit->add_option("--states", fit_N, "number of task modes");
  fit->add_option("--out", fit_out, "output model JSON")->required();
  fit->add_option("--save-stats", fit_save_stats, "write the fitted standardizer JSON");
  fit->add_option("--restarts", fit_cfg.restarts, "EM restarts");
  fit->add_option("--max-iters", fit_cfg.max_iters, "EM iteration cap");
  fit->add_option("--tol", fit_cfg.tol, "relative log-likelihood stop");
  fit->add_option("--cov-floor", fit_cfg.cov_floor, "covariance diagonal floor");
  fit->callback([&] { cmd_hmm_fit(fit_in, fit_N, fit_out, fit_save_stats, fit_cfg, g); });

  // hmm-decode
  auto* dec = app.add_subcommand("hmm-decode", "Viterbi mode labels per demonstration");
  std::string dec_in, dec_model, dec_stats, dec_out;
  int dec_W = 0;
  dec->add_option("--input", dec_in, "dataset CSV")->required();
  dec->add_option("--model", dec_model, "model JSON")->required();
  dec->add_option("--window", dec_W, "emit window-aligned labels for this window length");
  dec->add_option("--stats", dec_stats, "standardizer JSON (otherwise fitted from the input)");
  dec->add_option("--out", dec_out, "output modes CSV")->required();
  dec->callback([&] { cmd_hmm_decode(dec_in, dec_model, dec_W, dec_stats, dec_out); });

  // segment
  auto* seg = app.add_subcommand("segment", "reactive/voluntary split at a percentile threshold");
  std::string seg_report, seg_modes, seg_out;
  double seg_percentile = 90.0;
  seg->add_option("--report", seg_report, "quotient report CSV")->required();
  seg->add_option("--modes", seg_modes, "modes CSV (consistency check)");
  seg->add_option("--percentile", seg_percentile, "threshold percentile");
  seg->add_option("--out", seg_out, "output segmentation CSV")->required();
  seg->callback([&] { cmd_segment(seg_report, seg_modes, seg_percentile, seg_out); });

  // train-gate
  auto* tg = app.add_subcommand("train-gate", "train per-mode predictability classifiers");
  std::string tg_in, tg_seg, tg_stats, tg_out, tg_kind = "knn";
  int tg_W = 10, tg_k = 5;
  tg->add_option("--input", tg_in, "dataset CSV")->required();
  tg->add_option("--window", tg_W, "window length in steps")->required();
  tg->add_option("--segmentation", tg_seg, "segmentation CSV")->required();
  tg->add_option("--stats", tg_stats, "standardizer JSON (otherwise fitted from the input)");
  tg->add_option("--kind", tg_kind, "classifier kind: knn | linear");
  tg->add_option("--k", tg_k, "neighbors for the knn kind");
  tg->add_option("--out", tg_out, "output gate JSON")->required();
  tg->callback([&] { cmd_train_gate(tg_in, tg_W, tg_seg, tg_stats, tg_kind, tg_k, tg_out); });

  // train-policy
  auto* tp = app.add_subcommand("train-policy", "train per-mode reactive regressors");
  std::string tp_in, tp_seg, tp_stats, tp_out, tp_kind = "ridge";
  int tp_W = 10, tp_k = 5, tp_min = 20;
  double tp_lambda = 1e-6, tp_percentile = 0.0;
  bool tp_pooled = false;
  tp->add_option("--input", tp_in, "dataset CSV")->required();
  tp->add_option("--window", tp_W, "window length in steps")->required();
  tp->add_option("--segmentation", tp_seg, "segmentation CSV")->required();
  tp->add_option("--stats", tp_stats, "standardizer JSON (otherwise fitted from the input)");
  tp->add_option("--kind", tp_kind, "regressor kind: ridge | knn");
  tp->add_option("--lambda", tp_lambda, "ridge regularizer");
  tp->add_option("--k", tp_k, "neighbors for the knn kind");
  tp->add_option("--min-mode-samples", tp_min, "below this a mode uses the fallback");
  tp->add_flag("--pooled", tp_pooled, "train a single pooled model instead of per-mode");
  tp->add_option("--percentile", tp_percentile, "threshold percentile (metadata only)");
  tp->add_option("--out", tp_out, "output policy JSON")->required();
  tp->callback([&] {
    (void)tp_percentile;
    cmd_train_policy(tp_in, tp_W, tp_seg, tp_stats, tp_kind, tp_lambda, tp_k, tp_min, tp_pooled, tp_out);
  });

  // replay
  auto* rp = app.add_subcommand("replay", "causal shared-control replay over a recorded stream");
  std::string rp_models, rp_in, rp_out, rp_voluntary = "recorded";
  double rp_beta = 0.3, rp_noise = 0.0;
  rp->add_option("--models", rp_models, "directory with stats/model/gate/policy JSON")->required();
  rp->add_option("--input", rp_in, "dataset CSV to replay")->required();
  rp->add_option("--beta", rp_beta, "human adjustment weight while predictable");
  rp->add_option("--voluntary", rp_voluntary, "voluntary source: recorded | zero | noise");
  rp->add_option("--noise-sigma", rp_noise, "sigma for the noise source");
  rp->add_option("--out", rp_out, "output trace CSV")->required();
  rp->callback([&] { cmd_replay(rp_models, rp_in, rp_beta, rp_voluntary, rp_noise, rp_out, g); });

  // sweep
  auto* sw = app.add_subcommand("sweep", "trade-off table over percentile thresholds");
  std::string sw_in, sw_percentiles = "100,90,80,70,60,50", sw_out;
  int sw_W = 10, sw_N = 4, sw_restarts = 5;
  double sw_beta = 0.3;
  sw->add_option("--input", sw_in, "dataset CSV")->required();
  sw->add_option("--percentiles", sw_percentiles, "comma-separated percentile list");
  sw->add_option("--window", sw_W, "window length in steps");
  sw->add_option("--states", sw_N, "number of task modes");
  sw->add_option("--beta", sw_beta, "human adjustment weight while predictable");
  sw->add_option("--restarts", sw_restarts, "EM restarts");
  sw->add_option("--out", sw_out, "output tradeoff CSV")->required();
  sw->callback([&] { cmd_sweep(sw_in, sw_percentiles, sw_W, sw_N, sw_beta, sw_restarts, sw_out, g); });

  // report
  auto* rep = app.add_subcommand("report", "assemble a report bundle from artifacts");
  std::string rep_out, rep_quotients, rep_seg, rep_trace, rep_tradeoff, rep_config;
  std::string rep_input, rep_modes;
  int rep_bins = 50, rep_W = 10;
  double rep_percentile = 90.0;
  bool rep_compare = false;
  rep->add_option("--out", rep_out, "output bundle directory")->required();
  rep->add_option("--quotients", rep_quotients, "quotient report CSV");
  rep->add_option("--segmentation", rep_seg, "segmentation CSV");
  rep->add_option("--trace", rep_trace, "arbitration trace CSV");
  rep->add_option("--tradeoff", rep_tradeoff, "tradeoff CSV");
  rep->add_option("--config", rep_config, "configuration JSON to echo into the manifest");
  rep->add_option("--bins", rep_bins, "histogram bins");
  rep->add_flag("--compare", rep_compare, "add a mode-vs-random segmentation comparison");
  rep->add_option("--input", rep_input, "dataset CSV (for --compare)");
  rep->add_option("--window", rep_W, "window length (for --compare)");
  rep->add_option("--modes", rep_modes, "sample-aligned modes CSV (for --compare)");
  rep->add_option("--percentile", rep_percentile, "threshold percentile (for --compare)");
  rep->callback([&] {
    cmd_report(rep_out, rep_quotients, rep_seg, rep_trace, rep_tradeoff, rep_config, rep_bins,
               rep_compare, rep_input, rep_W, rep_modes, rep_percentile, g);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    json err;
    err["error"]["type"] = to_string(e.kind());
    err["error"]["message"] = e.what();
    std::cerr << err.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    json err;
    err["error"]["type"] = "Internal";
    err["error"]["message"] = e.what();
    std::cerr << err.dump() << "\n";
    return 2;
  }
  return 0;
}
