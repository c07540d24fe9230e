#include "lipshare/synthgen.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <random>

namespace lipshare {

namespace {

constexpr double kArCoeff = 0.9;  // first-order low-pass on the excitation

Mat dwell_scaled(const Mat& A, double s) {
  if (s == 1.0) return A;
  Mat out = A;
  const Eigen::Index N = A.rows();
  for (Eigen::Index i = 0; i < N; ++i) {
    const double stay = A(i, i);
    const double stay_scaled = 1.0 - (1.0 - stay) / s;  // dwell length scales by s
    const double off = 1.0 - stay;
    for (Eigen::Index j = 0; j < N; ++j) {
      out(i, j) = j == i ? stay_scaled : (off > 0.0 ? A(i, j) * (1.0 - stay_scaled) / off : 0.0);
    }
  }
  return out;
}

}  // namespace

void SynthConfig::validate() const {
  if (n_modes < 1 || static_cast<int>(modes.size()) != n_modes) {
    throw Error(ErrorKind::InvalidArgument, "mode specs do not match n_modes");
  }
  if (transition.rows() != n_modes || transition.cols() != n_modes) {
    throw Error(ErrorKind::DimensionMismatch, "transition matrix must be n_modes x n_modes");
  }
  for (int i = 0; i < n_modes; ++i) {
    if (std::abs(transition.row(i).sum() - 1.0) > 1e-9 || transition.row(i).minCoeff() < 0.0) {
      throw Error(ErrorKind::InvalidValue, "transition row " + std::to_string(i) +
                                               " is not a distribution");
    }
  }
  if (dwell_scaling < 1.0) {
    throw Error(ErrorKind::InvalidArgument, "dwell_scaling must be >= 1");
  }
  bool any_functional = false;
  for (const auto& m : modes) {
    if (m.mean.size() != d_raw) {
      throw Error(ErrorKind::DimensionMismatch, "mode mean must have d_raw entries");
    }
    if (m.sigma_o < 0.0 || m.sigma_u < 0.0) {
      throw Error(ErrorKind::InvalidValue, "noise levels must be nonnegative");
    }
    if (m.kind == ModeSpec::Kind::functional) {
      any_functional = true;
      if (m.gain.rows() != l || m.gain.cols() != d_raw || m.offset.size() != l) {
        throw Error(ErrorKind::DimensionMismatch, "gain/offset shapes must be l x d_raw and l");
      }
      if (m.excitation < 0.0) throw Error(ErrorKind::InvalidValue, "negative excitation");
    } else {
      if (!(m.freq_min > 0.0 && m.freq_max >= m.freq_min)) {
        throw Error(ErrorKind::InvalidValue, "bad oscillation frequency range");
      }
    }
  }
  if (!any_functional) {
    throw Error(ErrorKind::InvalidArgument, "at least one mode must be functional");
  }
  if (steps_per_demo < 1 || n_demos < 1 || d_raw < 1 || l < 1 || dt <= 0.0) {
    throw Error(ErrorKind::InvalidArgument, "bad size/rate configuration");
  }
}

SynthConfig default_config(std::uint64_t seed) {
  SynthConfig cfg;
  cfg.n_modes = 4;
  cfg.d_raw = 9;
  cfg.l = 6;
  cfg.dt = 0.1;
  cfg.steps_per_demo = 2500;
  cfg.n_demos = 8;
  cfg.seed = seed;

  // Functional dwell ~2 s at 10 Hz, with a thin entry into the spontaneous
  // mode so it stays a minority share.
  cfg.transition.resize(4, 4);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 4; ++j) {
      cfg.transition(i, j) = j == i ? 0.95 : (j == 3 ? 0.004 : 0.023);
    }
  }
  for (int j = 0; j < 4; ++j) cfg.transition(3, j) = j == 3 ? 0.95 : 0.05 / 3.0;

  // Structural parameters are fixed; only generate() consumes cfg.seed.
  std::mt19937_64 rng(0xC0FFEEULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Mat base_gain(cfg.l, cfg.d_raw);
  for (Eigen::Index r = 0; r < base_gain.rows(); ++r) {
    for (Eigen::Index c = 0; c < base_gain.cols(); ++c) {
      base_gain(r, c) = 1.8 * gauss(rng) / std::sqrt(double(cfg.d_raw));
    }
  }
  auto pattern = [&](int phase) {
    Vec v = Vec::Zero(cfg.d_raw);
    for (int i = phase; i < cfg.d_raw; i += 3) v[i] = 1.0;
    return Vec(v / v.norm());
  };

  const double separation = 4.5;  // >= 4 within-mode stds apart
  const double action_noise[3] = {0.03, 0.5, 1.1};
  for (int j = 0; j < 3; ++j) {
    ModeSpec m;
    m.kind = ModeSpec::Kind::functional;
    m.mean = j == 0 ? Vec(Vec::Zero(cfg.d_raw)) : Vec(separation * pattern(j - 1));
    // Strongly opposed action maps: the mode identity carries information the
    // fixed-window observation cannot, the source of cross-mode confounders.
    if (j == 0) {
      m.gain = base_gain;
    } else if (j == 1) {
      m.gain = -base_gain;
    } else {
      m.gain = base_gain;
      for (Eigen::Index r = 0; r < m.gain.rows(); r += 2) m.gain.row(r) = -base_gain.row(r);
    }
    m.offset = Vec::Zero(cfg.l);
    m.excitation = 1.0;
    m.sigma_o = 0.02;
    m.sigma_u = action_noise[j];
    cfg.modes.push_back(std::move(m));
  }
  ModeSpec sp;
  sp.kind = ModeSpec::Kind::spontaneous;
  sp.mean = separation * pattern(2);
  sp.sigma_o = 0.15;  // near-constant hold
  sp.osc_amp = 2.5;
  sp.freq_min = 0.6;
  sp.freq_max = 1.5;
  cfg.modes.push_back(std::move(sp));

  cfg.validate();
  return cfg;
}

DemoSet generate(const SynthConfig& cfg) {
  cfg.validate();
  const Mat A = dwell_scaled(cfg.transition, cfg.dwell_scaling);

  DemoSet ds;
  ds.d_raw = cfg.d_raw;
  ds.l = cfg.l;
  ds.demos.reserve(static_cast<std::size_t>(cfg.n_demos));

  for (int demo_i = 0; demo_i < cfg.n_demos; ++demo_i) {
    std::mt19937_64 rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(demo_i)));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    auto pick = [&](const Eigen::Ref<const Vec>& probs) {
      const double r = unif(rng);
      double acc = 0.0;
      for (Eigen::Index j = 0; j < probs.size(); ++j) {
        acc += probs[j];
        if (r <= acc) return static_cast<int>(j);
      }
      return static_cast<int>(probs.size() - 1);
    };

    Demonstration demo;
    demo.id = "demo_" + std::to_string(demo_i);
    demo.dt = cfg.dt;
    const int T = cfg.steps_per_demo;
    demo.t.resize(static_cast<std::size_t>(T));
    demo.obs.resize(T, cfg.d_raw);
    demo.act.resize(T, cfg.l);
    demo.mode_truth.resize(static_cast<std::size_t>(T));

    // Unit-variance AR(1) excitation shared by the functional modes.
    Vec excite(cfg.d_raw);
    for (int c = 0; c < cfg.d_raw; ++c) excite[c] = gauss(rng);
    const double innov = std::sqrt(1.0 - kArCoeff * kArCoeff);

    int state = pick(Vec::Constant(cfg.n_modes, 1.0 / cfg.n_modes));
    int visit_start = 0;
    double osc_freq = 0.0;
    Vec osc_phase = Vec::Zero(cfg.l);
    auto enter_spontaneous = [&](int t) {
      const auto& m = cfg.modes[static_cast<std::size_t>(state)];
      osc_freq = m.freq_min + (m.freq_max - m.freq_min) * unif(rng);
      for (int c = 0; c < cfg.l; ++c) osc_phase[c] = 2.0 * M_PI * unif(rng);
      visit_start = t;
    };
    if (cfg.modes[static_cast<std::size_t>(state)].kind == ModeSpec::Kind::spontaneous) {
      enter_spontaneous(0);
    }

    for (int t = 0; t < T; ++t) {
      if (t > 0) {
        const int next = pick(A.row(state).transpose());
        if (next != state) {
          state = next;
          if (cfg.modes[static_cast<std::size_t>(state)].kind == ModeSpec::Kind::spontaneous) {
            enter_spontaneous(t);
          } else {
            visit_start = t;
          }
        }
      }
      const auto& m = cfg.modes[static_cast<std::size_t>(state)];

      for (int c = 0; c < cfg.d_raw; ++c) excite[c] = kArCoeff * excite[c] + innov * gauss(rng);

      Vec o(cfg.d_raw);
      Vec u(cfg.l);
      if (m.kind == ModeSpec::Kind::functional) {
        for (int c = 0; c < cfg.d_raw; ++c) {
          o[c] = m.mean[c] + m.excitation * excite[c] + m.sigma_o * gauss(rng);
        }
        u = m.gain * o + m.offset;
        for (int c = 0; c < cfg.l; ++c) u[c] += m.sigma_u * gauss(rng);
      } else {
        for (int c = 0; c < cfg.d_raw; ++c) o[c] = m.mean[c] + m.sigma_o * gauss(rng);
        const double phase_t = 2.0 * M_PI * osc_freq * double(t - visit_start) * cfg.dt;
        for (int c = 0; c < cfg.l; ++c) u[c] = m.osc_amp * std::sin(phase_t + osc_phase[c]);
      }

      demo.t[static_cast<std::size_t>(t)] = double(t) * cfg.dt;
      demo.obs.row(t) = o.transpose();
      demo.act.row(t) = u.transpose();
      demo.mode_truth[static_cast<std::size_t>(t)] = state;
    }
    ds.demos.push_back(std::move(demo));
  }
  return ds;
}

Vec mode_proportions(const DemoSet& ds) {
  if (!ds.has_mode_truth()) {
    throw Error(ErrorKind::InvalidArgument, "dataset has no ground-truth mode column");
  }
  int max_mode = 0;
  for (const auto& demo : ds.demos) {
    for (int m : demo.mode_truth) max_mode = std::max(max_mode, m);
  }
  Vec counts = Vec::Zero(max_mode + 1);
  for (const auto& demo : ds.demos) {
    for (int m : demo.mode_truth) counts[m] += 1.0;
  }
  return counts / counts.sum();
}

namespace {

nlohmann::json mat_to_json(const Mat& m) {
  std::vector<std::vector<double>> rows;
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.emplace_back(m.row(i).begin(), m.row(i).end());
  return rows;
}

Mat mat_from_json(const nlohmann::json& rows) {
  const auto r = rows.size();
  const auto c = r == 0 ? 0 : rows[0].size();
  Mat m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t k = 0; k < c; ++k) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k].get<double>();
    }
  }
  return m;
}

}  // namespace

void save_synth_config(const SynthConfig& cfg, const std::string& path) {
  nlohmann::json j;
  j["n_modes"] = cfg.n_modes;
  j["transition"] = mat_to_json(cfg.transition);
  j["dwell_scaling"] = cfg.dwell_scaling;
  j["steps_per_demo"] = cfg.steps_per_demo;
  j["n_demos"] = cfg.n_demos;
  j["dt"] = cfg.dt;
  j["d_raw"] = cfg.d_raw;
  j["l"] = cfg.l;
  j["seed"] = cfg.seed;
  nlohmann::json modes = nlohmann::json::array();
  for (const auto& m : cfg.modes) {
    nlohmann::json jm;
    jm["kind"] = m.kind == ModeSpec::Kind::functional ? "functional" : "spontaneous";
    jm["mean"] = std::vector<double>(m.mean.begin(), m.mean.end());
    jm["sigma_o"] = m.sigma_o;
    if (m.kind == ModeSpec::Kind::functional) {
      jm["gain"] = mat_to_json(m.gain);
      jm["offset"] = std::vector<double>(m.offset.begin(), m.offset.end());
      jm["excitation"] = m.excitation;
      jm["sigma_u"] = m.sigma_u;
    } else {
      jm["osc_amp"] = m.osc_amp;
      jm["freq_min"] = m.freq_min;
      jm["freq_max"] = m.freq_max;
    }
    modes.push_back(std::move(jm));
  }
  j["modes"] = std::move(modes);
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

SynthConfig load_synth_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  nlohmann::json j;
  in >> j;
  SynthConfig cfg;
  cfg.n_modes = j.at("n_modes").get<int>();
  cfg.transition = mat_from_json(j.at("transition"));
  cfg.dwell_scaling = j.value("dwell_scaling", 1.0);
  cfg.steps_per_demo = j.at("steps_per_demo").get<int>();
  cfg.n_demos = j.at("n_demos").get<int>();
  cfg.dt = j.at("dt").get<double>();
  cfg.d_raw = j.at("d_raw").get<int>();
  cfg.l = j.at("l").get<int>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& jm : j.at("modes")) {
    ModeSpec m;
    m.kind = jm.at("kind").get<std::string>() == "functional" ? ModeSpec::Kind::functional
                                                              : ModeSpec::Kind::spontaneous;
    auto mean = jm.at("mean").get<std::vector<double>>();
    m.mean = Eigen::Map<const Vec>(mean.data(), static_cast<Eigen::Index>(mean.size()));
    m.sigma_o = jm.at("sigma_o").get<double>();
    if (m.kind == ModeSpec::Kind::functional) {
      m.gain = mat_from_json(jm.at("gain"));
      auto off = jm.at("offset").get<std::vector<double>>();
      m.offset = Eigen::Map<const Vec>(off.data(), static_cast<Eigen::Index>(off.size()));
      m.excitation = jm.at("excitation").get<double>();
      m.sigma_u = jm.at("sigma_u").get<double>();
    } else {
      m.osc_amp = jm.at("osc_amp").get<double>();
      m.freq_min = jm.at("freq_min").get<double>();
      m.freq_max = jm.at("freq_max").get<double>();
    }
    cfg.modes.push_back(std::move(m));
  }
  cfg.validate();
  return cfg;
}

}  // namespace lipshare
