#include "lipshare/arbitration.hpp"

#include <cmath>
#include <fstream>
#include <random>

namespace lipshare {

BlendResult blend(const Eigen::Ref<const Vec>& u_r, const Eigen::Ref<const Vec>& u_v, int h,
                  const BlendConfig& cfg) {
  if (u_r.size() != u_v.size()) {
    throw Error(ErrorKind::DimensionMismatch, "reactive and voluntary commands differ in size");
  }
  if (!(cfg.beta_adjust >= 0.0 && cfg.beta_adjust <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "beta_adjust must lie in [0, 1]");
  }
  BlendResult r;
  if (h == 1) {
    r.alpha = 1.0;
    r.beta = cfg.beta_adjust;
  } else {
    r.alpha = 0.0;
    r.beta = 1.0;
  }
  // 0/1 coefficients pass the operand through unchanged.
  if (r.alpha == 0.0 && r.beta == 1.0) {
    r.u_hat = u_v;
  } else if (r.alpha == 1.0 && r.beta == 0.0) {
    r.u_hat = u_r;
  } else {
    r.u_hat = r.alpha * u_r + r.beta * u_v;
  }
  return r;
}

TraceSummary summarize(const std::vector<ArbitrationStep>& steps) {
  TraceSummary s;
  s.total_steps = steps.size();
  double effort = 0.0;
  double rmse_acc = 0.0;
  for (const auto& step : steps) {
    if (step.h == 0) s.voluntary_ratio += 1.0;
    effort += step.beta * step.u_voluntary.norm();
    if (step.h == 1) {
      rmse_acc += (step.u_reactive - step.u_ref).squaredNorm();
      ++s.reactive_steps;
    }
  }
  if (!steps.empty()) {
    s.voluntary_ratio /= double(steps.size());
    s.voluntary_effort = effort / double(steps.size());
  }
  s.reactive_rmse = s.reactive_steps > 0 ? std::sqrt(rmse_acc / double(s.reactive_steps)) : 0.0;
  return s;
}

ArbitrationTrace replay(const DemoSet& raw, const GaussianHmm& hmm, const GateClassifier& gates,
                        const ReactivePolicy& policy, const StandardizationStats& stats, int W,
                        const BlendConfig& cfg) {
  if (W < 1) throw Error(ErrorKind::InvalidArgument, "window length must be >= 1");
  if (raw.demos.empty()) throw Error(ErrorKind::EmptyInput, "nothing to replay");
  if (stats.mean.size() != raw.d_raw + raw.l) {
    throw Error(ErrorKind::DimensionMismatch, "standardizer does not match the stream channels");
  }
  if (hmm.dim() != raw.d_raw) {
    throw Error(ErrorKind::DimensionMismatch, "mode model expects " + std::to_string(hmm.dim()) +
                                                  " channels, stream has " +
                                                  std::to_string(raw.d_raw));
  }
  const int d = raw.d_raw * W;
  if (policy.d != d || gates.d != d) {
    throw Error(ErrorKind::DimensionMismatch, "models were trained with a different window");
  }
  for (const auto& demo : raw.demos) {
    if (demo.size() < W) {
      throw Error(ErrorKind::StreamTooShort,
                  "demo '" + demo.id + "' is shorter than the window");
    }
  }

  const auto om = stats.mean.head(raw.d_raw);
  const auto os = stats.std.head(raw.d_raw);
  const auto am = stats.mean.tail(raw.l);
  const auto as = stats.std.tail(raw.l);

  // Streams are causal and independent, so demonstrations replay in parallel
  // with per-demo derived noise seeds.
  std::vector<std::vector<ArbitrationStep>> per_demo(raw.demos.size());
  parallel_blocks(raw.demos.size(), 0, [&](std::size_t begin, std::size_t end) {
    for (std::size_t di = begin; di < end; ++di) {
      const auto& demo = raw.demos[di];
      std::mt19937_64 rng(derive_seed(cfg.seed, di));
      std::normal_distribution<double> gauss(0.0, 1.0);
      ForwardFilter filter(hmm);
      Vec window = Vec::Zero(d);
      auto& steps = per_demo[di];
      steps.reserve(static_cast<std::size_t>(demo.size() - W + 1));
      for (Eigen::Index t = 0; t < demo.size(); ++t) {
        const Vec frame = (demo.obs.row(t).transpose() - om).cwiseQuotient(os);
        const Vec u_ref = (demo.act.row(t).transpose() - am).cwiseQuotient(as);
        // Slide the window: drop the oldest frame, append the newest.
        if (W > 1) window.head(d - raw.d_raw) = window.tail(d - raw.d_raw).eval();
        window.tail(raw.d_raw) = frame;
        filter.step(frame);
        if (t < W - 1) continue;

        const Vec& post = filter.posterior();
        int mode = 0;
        for (int j = 1; j < hmm.N; ++j) {
          if (post[j] > post[mode]) mode = j;
        }
        const int h = gate_predict(gates, mode, window);
        const Vec u_r = policy_predict(policy, mode, window);
        Vec u_v;
        switch (cfg.source) {
          case VoluntarySource::recorded: u_v = u_ref; break;
          case VoluntarySource::zero: u_v = Vec::Zero(raw.l); break;
          case VoluntarySource::noise: {
            u_v.resize(raw.l);
            for (int c = 0; c < raw.l; ++c) u_v[c] = cfg.noise_sigma * gauss(rng);
            break;
          }
        }
        BlendResult b = blend(u_r, u_v, h, cfg);

        ArbitrationStep step;
        step.demo_index = static_cast<int>(di);
        step.t_index = static_cast<int>(t);
        step.mode = mode;
        step.h = h;
        step.alpha = b.alpha;
        step.beta = b.beta;
        step.u_reactive = u_r;
        step.u_voluntary = std::move(u_v);
        step.u_hat = std::move(b.u_hat);
        step.u_ref = u_ref;
        steps.push_back(std::move(step));
      }
    }
  });

  ArbitrationTrace trace;
  for (auto& steps : per_demo) {
    trace.steps.insert(trace.steps.end(), std::make_move_iterator(steps.begin()),
                       std::make_move_iterator(steps.end()));
  }
  trace.summary = summarize(trace.steps);
  return trace;
}

double voluntary_effort(const ArbitrationTrace& trace) {
  if (trace.steps.empty()) throw Error(ErrorKind::EmptyInput, "empty trace");
  double effort = 0.0;
  for (const auto& step : trace.steps) effort += step.beta * step.u_voluntary.norm();
  return effort / double(trace.steps.size());
}

double voluntary_ratio(const ArbitrationTrace& trace) {
  if (trace.steps.empty()) throw Error(ErrorKind::EmptyInput, "empty trace");
  std::size_t vol = 0;
  for (const auto& step : trace.steps) {
    if (step.h == 0) ++vol;
  }
  return double(vol) / double(trace.steps.size());
}

void save_trace_csv(const ArbitrationTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
  const Eigen::Index l = trace.steps.empty() ? 0 : trace.steps.front().u_hat.size();
  out << "t,mode,h,alpha,beta";
  for (Eigen::Index c = 1; c <= l; ++c) out << ",u_r_" << c;
  for (Eigen::Index c = 1; c <= l; ++c) out << ",u_v_" << c;
  for (Eigen::Index c = 1; c <= l; ++c) out << ",u_hat_" << c;
  out << "\n";
  for (const auto& step : trace.steps) {
    out << step.t_index << ',' << step.mode << ',' << step.h << ',' << format_double(step.alpha)
        << ',' << format_double(step.beta);
    for (Eigen::Index c = 0; c < l; ++c) out << ',' << format_double(step.u_reactive[c]);
    for (Eigen::Index c = 0; c < l; ++c) out << ',' << format_double(step.u_voluntary[c]);
    for (Eigen::Index c = 0; c < l; ++c) out << ',' << format_double(step.u_hat[c]);
    out << "\n";
  }
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path + "'");
}

}  // namespace lipshare
