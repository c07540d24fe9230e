#include "lipshare/dataset.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace lipshare {

namespace {

constexpr double kStdFloor = 1e-12;
constexpr double kDtRelTol = 1e-6;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

double finite_field(const std::string& field, std::size_t row, const std::string& what) {
  double v = parse_double(field, what + " at row " + std::to_string(row));
  if (!std::isfinite(v)) {
    throw Error(ErrorKind::InvalidValue,
                "non-finite " + what + " at row " + std::to_string(row));
  }
  return v;
}

void check_uniform_dt(const Demonstration& demo) {
  if (demo.size() < 2) return;
  for (std::size_t i = 1; i < demo.t.size(); ++i) {
    double step = demo.t[i] - demo.t[i - 1];
    if (step <= 0.0) {
      throw Error(ErrorKind::InvalidValue, "non-monotone time in demo '" + demo.id + "'");
    }
    if (std::abs(step - demo.dt) > kDtRelTol * std::max(std::abs(demo.dt), 1e-30)) {
      throw Error(ErrorKind::InvalidValue, "non-uniform sampling in demo '" + demo.id + "'");
    }
  }
}

void finalize_demo(Demonstration& demo) {
  demo.dt = demo.size() >= 2 ? (demo.t.back() - demo.t.front()) / double(demo.size() - 1) : 0.0;
  check_uniform_dt(demo);
}

}  // namespace

bool DemoSet::has_mode_truth() const {
  return !demos.empty() && demos.front().has_mode_truth();
}

std::size_t DemoSet::total_records() const {
  std::size_t n = 0;
  for (const auto& d : demos) n += static_cast<std::size_t>(d.size());
  return n;
}

double DemoSet::dt() const {
  if (demos.empty()) throw Error(ErrorKind::EmptyInput, "dt of an empty DemoSet");
  return demos.front().dt;
}

DemoSet load_demoset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");

  std::string header;
  if (!std::getline(in, header)) throw Error(ErrorKind::EmptyInput, "'" + path + "' is empty");
  if (!header.empty() && header.back() == '\r') header.pop_back();

  auto cols = split_csv_line(header);
  if (cols.size() < 4 || cols[0] != "demo" || cols[1] != "t") {
    throw Error(ErrorKind::InvalidValue, "header must start with demo,t in '" + path + "'");
  }
  int d_raw = 0;
  int l = 0;
  bool has_mode = false;
  std::size_t c = 2;
  while (c < cols.size() && cols[c] == "o_" + std::to_string(d_raw + 1)) {
    ++d_raw;
    ++c;
  }
  while (c < cols.size() && cols[c] == "u_" + std::to_string(l + 1)) {
    ++l;
    ++c;
  }
  if (c < cols.size() && cols[c] == "mode") {
    has_mode = true;
    ++c;
  }
  if (d_raw < 1 || l < 1 || c != cols.size()) {
    throw Error(ErrorKind::InvalidValue, "unrecognized column layout in '" + path + "'");
  }

  const std::size_t expected = 2 + static_cast<std::size_t>(d_raw + l) + (has_mode ? 1 : 0);

  // Rows grouped by contiguous demo id.
  struct Block {
    std::string id;
    std::vector<double> t;
    std::vector<double> obs;
    std::vector<double> act;
    std::vector<int> mode;
  };
  std::vector<Block> blocks;
  std::vector<std::string> seen_ids;

  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != expected) {
      throw Error(ErrorKind::InvalidValue,
                  "ragged row " + std::to_string(row) + " in '" + path + "' (" +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(expected) + ")");
    }
    const std::string& id = fields[0];
    if (blocks.empty() || blocks.back().id != id) {
      if (std::find(seen_ids.begin(), seen_ids.end(), id) != seen_ids.end()) {
        throw Error(ErrorKind::InvalidValue, "demo '" + id + "' is not contiguous");
      }
      seen_ids.push_back(id);
      blocks.push_back(Block{id, {}, {}, {}, {}});
    }
    Block& b = blocks.back();
    double t = finite_field(fields[1], row, "time");
    if (!b.t.empty() && t <= b.t.back()) {
      throw Error(ErrorKind::InvalidValue,
                  "non-monotone time at row " + std::to_string(row) + " in demo '" + id + "'");
    }
    b.t.push_back(t);
    for (int k = 0; k < d_raw; ++k) b.obs.push_back(finite_field(fields[2 + k], row, "observation"));
    for (int k = 0; k < l; ++k) b.act.push_back(finite_field(fields[2 + d_raw + k], row, "action"));
    if (has_mode) {
      double m = finite_field(fields[2 + d_raw + l], row, "mode");
      int mi = static_cast<int>(m);
      if (mi < 0 || double(mi) != m) {
        throw Error(ErrorKind::InvalidValue, "mode must be a nonnegative integer at row " +
                                                 std::to_string(row));
      }
      b.mode.push_back(mi);
    }
  }
  if (blocks.empty()) throw Error(ErrorKind::EmptyInput, "no data rows in '" + path + "'");

  DemoSet ds;
  ds.d_raw = d_raw;
  ds.l = l;
  for (auto& b : blocks) {
    Demonstration demo;
    demo.id = b.id;
    demo.t = std::move(b.t);
    const auto T = static_cast<Eigen::Index>(demo.t.size());
    demo.obs = Eigen::Map<const RowMat>(b.obs.data(), T, d_raw);
    demo.act = Eigen::Map<const RowMat>(b.act.data(), T, l);
    demo.mode_truth = std::move(b.mode);
    finalize_demo(demo);
    ds.demos.push_back(std::move(demo));
  }
  // Shared dt across demonstrations.
  for (const auto& demo : ds.demos) {
    if (demo.size() >= 2 && ds.demos.front().size() >= 2 &&
        std::abs(demo.dt - ds.demos.front().dt) > kDtRelTol * ds.demos.front().dt) {
      throw Error(ErrorKind::InvalidValue, "demo '" + demo.id + "' has a different dt");
    }
  }
  return ds;
}

void save_demoset(const DemoSet& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
  out << "demo,t";
  for (int k = 1; k <= ds.d_raw; ++k) out << ",o_" << k;
  for (int k = 1; k <= ds.l; ++k) out << ",u_" << k;
  if (ds.has_mode_truth()) out << ",mode";
  out << "\n";
  for (const auto& demo : ds.demos) {
    for (Eigen::Index i = 0; i < demo.size(); ++i) {
      out << demo.id << ',' << format_double(demo.t[static_cast<std::size_t>(i)]);
      for (int k = 0; k < ds.d_raw; ++k) out << ',' << format_double(demo.obs(i, k));
      for (int k = 0; k < ds.l; ++k) out << ',' << format_double(demo.act(i, k));
      if (ds.has_mode_truth()) out << ',' << demo.mode_truth[static_cast<std::size_t>(i)];
      out << "\n";
    }
  }
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path + "'");
}

DemoSet resample(const DemoSet& ds, double period) {
  if (ds.demos.empty()) throw Error(ErrorKind::EmptyInput, "resample of an empty DemoSet");
  const double dt = ds.dt();
  if (dt <= 0.0) throw Error(ErrorKind::IncompatiblePeriod, "source dt is not positive");
  if (period < dt * (1.0 - kDtRelTol)) {
    throw Error(ErrorKind::IncompatiblePeriod, "period " + format_double(period) +
                                                   " is below the sampling period " +
                                                   format_double(dt));
  }
  const double ratio = period / dt;
  const auto factor = static_cast<Eigen::Index>(std::llround(ratio));
  if (factor < 1 || std::abs(ratio - double(factor)) > kDtRelTol * ratio) {
    throw Error(ErrorKind::IncompatiblePeriod,
                "period " + format_double(period) + " is not an integer multiple of dt " +
                    format_double(dt));
  }

  DemoSet out;
  out.d_raw = ds.d_raw;
  out.l = ds.l;
  for (const auto& demo : ds.demos) {
    Demonstration r;
    r.id = demo.id;
    const Eigen::Index n = (demo.size() + factor - 1) / factor;
    r.t.reserve(static_cast<std::size_t>(n));
    r.obs.resize(n, ds.d_raw);
    r.act.resize(n, ds.l);
    if (demo.has_mode_truth()) r.mode_truth.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < n; ++k) {
      const Eigen::Index src = k * factor;  // nearest record to t0 + k*period
      r.t.push_back(demo.t[static_cast<std::size_t>(src)]);
      r.obs.row(k) = demo.obs.row(src);
      r.act.row(k) = demo.act.row(src);
      if (demo.has_mode_truth()) r.mode_truth.push_back(demo.mode_truth[static_cast<std::size_t>(src)]);
    }
    r.dt = r.size() >= 2 ? (r.t.back() - r.t.front()) / double(r.size() - 1) : period;
    check_uniform_dt(r);
    out.demos.push_back(std::move(r));
  }
  return out;
}

StandardizationStats fit_standardizer(const DemoSet& ds) {
  const std::size_t n = ds.total_records();
  if (n < 2) throw Error(ErrorKind::EmptyInput, "standardizer needs at least 2 records");
  const int channels = ds.d_raw + ds.l;

  Vec mean = Vec::Zero(channels);
  for (const auto& demo : ds.demos) {
    mean.head(ds.d_raw) += demo.obs.colwise().sum().transpose();
    mean.tail(ds.l) += demo.act.colwise().sum().transpose();
  }
  mean /= double(n);

  Vec var = Vec::Zero(channels);
  for (const auto& demo : ds.demos) {
    var.head(ds.d_raw) +=
        (demo.obs.rowwise() - mean.head(ds.d_raw).transpose()).array().square().colwise().sum().matrix().transpose();
    var.tail(ds.l) +=
        (demo.act.rowwise() - mean.tail(ds.l).transpose()).array().square().colwise().sum().matrix().transpose();
  }
  var /= double(n);  // population convention

  StandardizationStats stats;
  stats.mean = mean;
  stats.std = var.array().sqrt();
  for (int c = 0; c < channels; ++c) {
    if (stats.std[c] < kStdFloor) stats.std[c] = 1.0;  // constant-channel guard
  }
  return stats;
}

namespace {

DemoSet transform_demoset(const DemoSet& ds, const StandardizationStats& stats, bool inverse) {
  if (stats.mean.size() != ds.d_raw + ds.l || stats.std.size() != ds.d_raw + ds.l) {
    throw Error(ErrorKind::DimensionMismatch,
                "standardizer has " + std::to_string(stats.mean.size()) + " channels, data has " +
                    std::to_string(ds.d_raw + ds.l));
  }
  DemoSet out = ds;
  const auto om = stats.mean.head(ds.d_raw).transpose();
  const auto os = stats.std.head(ds.d_raw).transpose();
  const auto am = stats.mean.tail(ds.l).transpose();
  const auto as = stats.std.tail(ds.l).transpose();
  for (auto& demo : out.demos) {
    if (inverse) {
      demo.obs = ((demo.obs.array().rowwise() * os.array()).rowwise() + om.array()).matrix();
      demo.act = ((demo.act.array().rowwise() * as.array()).rowwise() + am.array()).matrix();
    } else {
      demo.obs = ((demo.obs.array().rowwise() - om.array()).rowwise() / os.array()).matrix();
      demo.act = ((demo.act.array().rowwise() - am.array()).rowwise() / as.array()).matrix();
    }
  }
  return out;
}

}  // namespace

DemoSet apply_standardizer(const DemoSet& ds, const StandardizationStats& stats) {
  return transform_demoset(ds, stats, false);
}

DemoSet invert_standardizer(const DemoSet& ds, const StandardizationStats& stats) {
  return transform_demoset(ds, stats, true);
}

void save_stats(const StandardizationStats& stats, const std::string& path) {
  nlohmann::json j;
  j["mean"] = std::vector<double>(stats.mean.data(), stats.mean.data() + stats.mean.size());
  j["std"] = std::vector<double>(stats.std.data(), stats.std.data() + stats.std.size());
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

StandardizationStats load_stats(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  nlohmann::json j;
  in >> j;
  StandardizationStats stats;
  auto mean = j.at("mean").get<std::vector<double>>();
  auto std_ = j.at("std").get<std::vector<double>>();
  if (mean.size() != std_.size()) {
    throw Error(ErrorKind::DimensionMismatch, "mean/std length mismatch in '" + path + "'");
  }
  stats.mean = Eigen::Map<const Vec>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  stats.std = Eigen::Map<const Vec>(std_.data(), static_cast<Eigen::Index>(std_.size()));
  for (Eigen::Index c = 0; c < stats.std.size(); ++c) {
    if (stats.std[c] <= 0.0) {
      throw Error(ErrorKind::InvalidValue, "non-positive std in '" + path + "'");
    }
  }
  return stats;
}

SampleSet make_windows(const DemoSet& ds, int W) {
  if (W < 1) throw Error(ErrorKind::InvalidArgument, "window length must be >= 1");
  if (ds.demos.empty()) throw Error(ErrorKind::EmptyInput, "windowing an empty DemoSet");

  Eigen::Index n = 0;
  for (const auto& demo : ds.demos) {
    if (demo.size() < W) {
      throw Error(ErrorKind::StreamTooShort,
                  "demo '" + demo.id + "' has " + std::to_string(demo.size()) +
                      " records, window needs " + std::to_string(W));
    }
    n += demo.size() - W + 1;
  }

  SampleSet ss;
  ss.W = W;
  ss.d_raw = ds.d_raw;
  ss.obs.resize(n, static_cast<Eigen::Index>(ds.d_raw) * W);
  ss.act.resize(n, ds.l);
  ss.demo_index.reserve(static_cast<std::size_t>(n));
  ss.t_index.reserve(static_cast<std::size_t>(n));
  const bool truth = ds.has_mode_truth();
  if (truth) ss.mode_truth.reserve(static_cast<std::size_t>(n));

  Eigen::Index row = 0;
  for (std::size_t di = 0; di < ds.demos.size(); ++di) {
    const auto& demo = ds.demos[di];
    for (Eigen::Index t = W - 1; t < demo.size(); ++t) {
      for (int w = 0; w < W; ++w) {
        ss.obs.block(row, static_cast<Eigen::Index>(w) * ds.d_raw, 1, ds.d_raw) =
            demo.obs.row(t - W + 1 + w);  // oldest frame first
      }
      ss.act.row(row) = demo.act.row(t);
      ss.demo_index.push_back(static_cast<int>(di));
      ss.t_index.push_back(static_cast<int>(t));
      if (truth) ss.mode_truth.push_back(demo.mode_truth[static_cast<std::size_t>(t)]);
      ++row;
    }
  }
  return ss;
}

}  // namespace lipshare
