#pragma once

#include "lipshare/dataset.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lipshare {

// One synthetic task mode. Functional modes act as a noisy linear map of the
// observation; spontaneous modes hold the observation near a fixed level
// while the action oscillates with a per-visit random phase and frequency,
// so no map from observation to action exists.
struct ModeSpec {
  enum class Kind { functional, spontaneous };

  Kind kind = Kind::functional;
  Vec mean;  // observation mean shift (functional) or hold level (spontaneous)

  // functional
  Mat gain;     // l x d_raw
  Vec offset;   // length l
  double excitation = 1.0;  // stationary std of the smooth observation input
  double sigma_u = 0.0;     // action noise

  // both kinds: observation noise (spontaneous: hold noise)
  double sigma_o = 0.0;

  // spontaneous
  double osc_amp = 1.0;
  double freq_min = 0.5;  // Hz
  double freq_max = 2.0;
};

struct SynthConfig {
  int n_modes = 0;
  Mat transition;  // row-stochastic
  double dwell_scaling = 1.0;  // multiplies the expected dwell of every mode
  std::vector<ModeSpec> modes;
  int steps_per_demo = 2500;
  int n_demos = 8;
  double dt = 0.1;
  int d_raw = 9;
  int l = 6;
  std::uint64_t seed = 0;

  void validate() const;
};

// Desk-scale 4-mode default (three functional + one spontaneous), 10 Hz,
// 9 observation channels, 6 action channels, 2e4 steps total.
SynthConfig default_config(std::uint64_t seed = 0);

// Deterministic per seed; demonstrations draw independent derived seeds.
DemoSet generate(const SynthConfig& cfg);

// Empirical ground-truth mode fractions; requires the mode column.
Vec mode_proportions(const DemoSet& ds);

void save_synth_config(const SynthConfig& cfg, const std::string& path);
SynthConfig load_synth_config(const std::string& path);

}  // namespace lipshare
