#include "lipshare/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>

namespace lipshare {

const char* to_string(ModeAssignment::Source s) {
  switch (s) {
    case ModeAssignment::Source::viterbi: return "viterbi";
    case ModeAssignment::Source::filtered: return "filtered";
    case ModeAssignment::Source::truth: return "truth";
    case ModeAssignment::Source::random: return "random";
  }
  return "unknown";
}

void save_modes_csv(const ModeAssignment& modes, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
  out << "index,mode\n";
  for (std::size_t i = 0; i < modes.states.size(); ++i) {
    out << i << ',' << modes.states[i] << "\n";
  }
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path + "'");
}

ModeAssignment load_modes_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::EmptyInput, "'" + path + "' is empty");
  ModeAssignment modes;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos) {
      throw Error(ErrorKind::InvalidValue, "ragged row " + std::to_string(row) + " in '" + path + "'");
    }
    const auto index = static_cast<std::size_t>(parse_double(line.substr(0, comma), "index column"));
    if (index != modes.states.size()) {
      throw Error(ErrorKind::InvalidValue, "non-contiguous index at row " + std::to_string(row));
    }
    const int mode = static_cast<int>(parse_double(line.substr(comma + 1), "mode column"));
    if (mode < 0) throw Error(ErrorKind::InvalidValue, "negative mode at row " + std::to_string(row));
    modes.states.push_back(mode);
  }
  return modes;
}

SegmentationResult split_rv(const std::vector<QuotientReport>& mode_reports, const Threshold& K) {
  if (mode_reports.empty()) throw Error(ErrorKind::EmptyInput, "no quotient reports");

  std::int64_t max_index = -1;
  for (const auto& r : mode_reports) {
    for (const auto& e : r.entries) max_index = std::max(max_index, e.sample_index);
  }

  SegmentationResult seg;
  seg.threshold = K;
  seg.sample_mode.assign(static_cast<std::size_t>(max_index + 1), -1);
  seg.sample_q.assign(static_cast<std::size_t>(max_index + 1), 0.0);

  std::size_t voluntary = 0;
  for (const auto& r : mode_reports) {
    SegmentationResult::ModeSplit split;
    split.mode = r.scope >= 0 ? r.scope : 0;
    for (const auto& e : r.entries) {
      const auto i = static_cast<std::size_t>(e.sample_index);
      if (seg.sample_mode[i] != -1) {
        throw Error(ErrorKind::InvalidValue,
                    "sample " + std::to_string(e.sample_index) + " appears in two reports");
      }
      seg.sample_mode[i] = split.mode;
      seg.sample_q[i] = e.q;
      if (e.q <= K.K) {  // boundary q = K stays reactive
        split.reactive.push_back(e.sample_index);
      } else {
        split.voluntary.push_back(e.sample_index);
        ++voluntary;
      }
      ++seg.total_samples;
    }
    seg.modes.push_back(std::move(split));
  }
  for (int m : seg.sample_mode) {
    if (m == -1) {
      throw Error(ErrorKind::InvalidValue, "quotient reports do not cover every sample");
    }
  }
  seg.voluntary_ratio = seg.total_samples == 0 ? 0.0 : double(voluntary) / double(seg.total_samples);
  return seg;
}

GateLabels make_gate_labels(const SegmentationResult& seg) {
  GateLabels labels;
  labels.z.assign(seg.total_samples, 0);
  labels.mode.assign(seg.total_samples, -1);
  for (const auto& split : seg.modes) {
    for (std::int64_t i : split.reactive) {
      labels.z[static_cast<std::size_t>(i)] = 1;
      labels.mode[static_cast<std::size_t>(i)] = split.mode;
    }
    for (std::int64_t i : split.voluntary) {
      labels.z[static_cast<std::size_t>(i)] = 0;
      labels.mode[static_cast<std::size_t>(i)] = split.mode;
    }
  }
  return labels;
}

ModeAssignment random_segmentation(const SampleSet& ss, int N, std::uint64_t seed,
                                   const std::vector<double>& proportions) {
  if (N < 1) throw Error(ErrorKind::InvalidArgument, "need at least one mode");
  std::vector<double> p = proportions;
  if (p.empty()) p.assign(static_cast<std::size_t>(N), 1.0 / N);
  if (p.size() != static_cast<std::size_t>(N)) {
    throw Error(ErrorKind::DimensionMismatch, "proportions length does not match mode count");
  }
  double sum = 0.0;
  for (double v : p) {
    if (v < 0.0) throw Error(ErrorKind::InvalidValue, "negative proportion");
    sum += v;
  }
  if (sum <= 0.0) throw Error(ErrorKind::InvalidValue, "proportions sum to zero");

  std::vector<double> cdf(p.size());
  double acc = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    acc += p[j] / sum;
    cdf[j] = acc;
  }
  cdf.back() = 1.0;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ModeAssignment modes;
  modes.source = ModeAssignment::Source::random;
  modes.states.resize(static_cast<std::size_t>(ss.size()));
  for (auto& s : modes.states) {
    const double r = u(rng);
    s = static_cast<int>(std::lower_bound(cdf.begin(), cdf.end(), r) - cdf.begin());
  }
  return modes;
}

std::vector<double> empirical_proportions(const ModeAssignment& modes) {
  if (modes.states.empty()) throw Error(ErrorKind::EmptyInput, "empty mode assignment");
  int max_mode = 0;
  for (int s : modes.states) max_mode = std::max(max_mode, s);
  std::vector<double> p(static_cast<std::size_t>(max_mode) + 1, 0.0);
  for (int s : modes.states) p[static_cast<std::size_t>(s)] += 1.0;
  for (double& v : p) v /= double(modes.states.size());
  return p;
}

void save_segmentation_csv(const SegmentationResult& seg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
  out << "index,mode,q,label\n";
  for (std::size_t i = 0; i < seg.sample_mode.size(); ++i) {
    const int label = seg.sample_q[i] <= seg.threshold.K ? 1 : 0;
    out << i << ',' << seg.sample_mode[i] << ',' << format_double(seg.sample_q[i]) << ','
        << label << "\n";
  }
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path + "'");
}

SegmentationResult load_segmentation_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::EmptyInput, "'" + path + "' is empty");

  SegmentationResult seg;
  std::map<int, SegmentationResult::ModeSplit> splits;
  std::size_t voluntary = 0;
  double max_reactive_q = 0.0;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t p1 = line.find(',');
    std::size_t p2 = line.find(',', p1 + 1);
    std::size_t p3 = line.find(',', p2 + 1);
    if (p1 == std::string::npos || p2 == std::string::npos || p3 == std::string::npos) {
      throw Error(ErrorKind::InvalidValue, "ragged row " + std::to_string(row) + " in '" + path + "'");
    }
    const auto index = static_cast<std::int64_t>(parse_double(line.substr(0, p1), "index"));
    const int mode = static_cast<int>(parse_double(line.substr(p1 + 1, p2 - p1 - 1), "mode"));
    const double q = parse_double(line.substr(p2 + 1, p3 - p2 - 1), "q");
    const int label = static_cast<int>(parse_double(line.substr(p3 + 1), "label"));
    if (static_cast<std::size_t>(index) != seg.sample_mode.size()) {
      throw Error(ErrorKind::InvalidValue, "non-contiguous index at row " + std::to_string(row));
    }
    seg.sample_mode.push_back(mode);
    seg.sample_q.push_back(q);
    auto& split = splits[mode];
    split.mode = mode;
    if (label == 1) {
      split.reactive.push_back(index);
      max_reactive_q = std::max(max_reactive_q, q);
    } else {
      split.voluntary.push_back(index);
      ++voluntary;
    }
    ++seg.total_samples;
  }
  for (auto& [mode, split] : splits) seg.modes.push_back(std::move(split));
  seg.voluntary_ratio = seg.total_samples == 0 ? 0.0 : double(voluntary) / double(seg.total_samples);
  // The original K is not stored; the largest reactive q is an equivalent cut.
  seg.threshold.K = max_reactive_q;
  seg.threshold.percentile = 100.0 * (1.0 - seg.voluntary_ratio);
  return seg;
}

}  // namespace lipshare
