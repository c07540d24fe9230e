#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <lipshare/lipschitz.hpp>
#include <lipshare/synthgen.hpp>

#include "oracles.hpp"
#include "test_util.hpp"

#include <cmath>
#include <random>

using namespace lipshare;

namespace {

ModeAssignment truth_assignment(const SampleSet& ss) {
  ModeAssignment m;
  m.source = ModeAssignment::Source::truth;
  m.states = ss.mode_truth;
  return m;
}

}  // namespace

TEST_CASE("single pair: mutual witnesses") {
  const auto ss = testutil::make_samples_1d({0.0, 1.0}, {0.0, 2.0});
  const auto report = pointwise_quotients(ss);
  REQUIRE(report.entries.size() == 2);
  CHECK(report.entries[0].q == 2.0);
  CHECK(report.entries[1].q == 2.0);
  CHECK(report.entries[0].witness == 1);
  CHECK(report.entries[1].witness == 0);
}

TEST_CASE("identity map has quotient exactly 1") {
  RowMat O = testutil::random_rowmat(30, 3, 21);
  const auto report = pointwise_quotients(testutil::make_samples(O, O));
  for (const auto& e : report.entries) CHECK(e.q == 1.0);
}

TEST_CASE("three-point example from exhaustive enumeration") {
  // Pairs: (0,1): 5/0.1 = 50; (0,2): 10/10 = 1; (1,2): 5/9.9.
  const auto ss = testutil::make_samples_1d({0.0, 0.1, 10.0}, {0.0, 5.0, 10.0});
  const auto report = pointwise_quotients(ss);
  CHECK(report.entries[0].q == doctest::Approx(50.0));
  CHECK(report.entries[1].q == doctest::Approx(50.0));
  CHECK(report.entries[2].q == doctest::Approx(1.0));
  CHECK(report.entries[0].witness == 1);
  CHECK(report.entries[1].witness == 0);
  CHECK(report.entries[2].witness == 0);
}

TEST_CASE("identical observations with different actions are unbounded") {
  const auto ss = testutil::make_samples_1d({3.0, 3.0}, {1.0, 2.0});
  const auto report = pointwise_quotients(ss);
  CHECK(std::isinf(report.entries[0].q));
  CHECK(std::isinf(report.entries[1].q));
  CHECK_FALSE(report.entries[0].degenerate);
}

TEST_CASE("exact duplicates are skipped; all-duplicate samples are flagged") {
  const auto ss = testutil::make_samples_1d({3.0, 3.0}, {1.0, 1.0});
  const auto report = pointwise_quotients(ss);
  for (const auto& e : report.entries) {
    CHECK(e.q == 0.0);
    CHECK(e.witness == -1);
    CHECK(e.degenerate);
  }
}

TEST_CASE("fewer than two samples is an error") {
  const auto ss = testutil::make_samples_1d({1.0}, {1.0});
  CHECK_THROWS_AS(pointwise_quotients(ss), Error);
}

TEST_CASE("mode restriction with one mode equals the global computation") {
  auto ss = testutil::make_samples(testutil::random_rowmat(40, 2, 22), testutil::random_rowmat(40, 2, 23));
  ModeAssignment modes;
  modes.states.assign(40, 0);
  const auto global = pointwise_quotients(ss);
  const auto per_mode = mode_quotients(ss, modes);
  REQUIRE(per_mode.size() == 1);
  for (std::size_t i = 0; i < global.entries.size(); ++i) {
    CHECK(per_mode[0].entries[i].q == global.entries[i].q);
    CHECK(per_mode[0].entries[i].witness == global.entries[i].witness);
  }
}

TEST_CASE("restriction monotonicity: per-sample mode quotient <= global quotient") {
  auto ss = testutil::make_samples(testutil::random_rowmat(60, 3, 24), testutil::random_rowmat(60, 2, 25));
  const auto global = pointwise_quotients(ss);
  std::mt19937_64 rng(26);
  ModeAssignment modes;
  for (int i = 0; i < 60; ++i) modes.states.push_back(int(rng() % 3));
  std::vector<double> q_global(60);
  for (const auto& e : global.entries) q_global[static_cast<std::size_t>(e.sample_index)] = e.q;
  for (const auto& report : mode_quotients(ss, modes)) {
    for (const auto& e : report.entries) {
      CHECK(e.q <= q_global[static_cast<std::size_t>(e.sample_index)]);
    }
  }
}

TEST_CASE("4-mode synthetic data: conditioning lowers the mean quotient") {
  SynthConfig cfg = default_config(3);
  cfg.n_demos = 2;
  cfg.steps_per_demo = 400;
  const DemoSet raw = generate(cfg);
  const DemoSet std_ds = apply_standardizer(raw, fit_standardizer(raw));
  const SampleSet ss = make_windows(std_ds, 5);

  const auto global = pointwise_quotients(ss);
  const auto per_mode = mode_quotients(ss, truth_assignment(ss));

  auto mean_finite = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / double(v.size());
  };
  std::vector<double> mode_all;
  for (const auto& r : per_mode) {
    const auto f = r.finite_quotients();
    mode_all.insert(mode_all.end(), f.begin(), f.end());
  }
  CHECK(mean_finite(mode_all) < mean_finite(global.finite_quotients()));
}

TEST_CASE("mode assignment length mismatch is an error") {
  auto ss = testutil::make_samples_1d({0, 1, 2}, {0, 1, 2});
  ModeAssignment modes;
  modes.states = {0, 1};
  CHECK_THROWS_AS(mode_quotients(ss, modes), Error);
}

TEST_CASE("singleton mode yields a degenerate zero entry") {
  auto ss = testutil::make_samples_1d({0, 1, 2}, {0, 1, 2});
  ModeAssignment modes;
  modes.states = {0, 0, 1};
  const auto reports = mode_quotients(ss, modes);
  REQUIRE(reports.size() == 2);
  CHECK(reports[1].entries.size() == 1);
  CHECK(reports[1].entries[0].q == 0.0);
  CHECK(reports[1].entries[0].degenerate);
}

TEST_CASE("threshold selection: nearest rank") {
  QuotientReport r;
  for (int i = 1; i <= 10; ++i) {
    r.entries.push_back({i - 1, double(i), 0, false});
  }
  CHECK(select_threshold(r, 90.0).K == 9.0);
  CHECK(select_threshold(r, 100.0).K == 10.0);

  QuotientReport c;
  c.entries = {{0, 5, 1, false}, {1, 5, 0, false}, {2, 5, 0, false}};
  CHECK(select_threshold(c, 13.0).K == 5.0);
  CHECK(select_threshold(c, 77.0).K == 5.0);
}

TEST_CASE("threshold selection: infinities excluded, errors when nothing is finite") {
  QuotientReport r;
  const double inf = std::numeric_limits<double>::infinity();
  r.entries = {{0, 1, 1, false}, {1, 2, 0, false}, {2, inf, 0, false}};
  CHECK(select_threshold(r, 100.0).K == 2.0);
  QuotientReport bad;
  bad.entries = {{0, inf, 1, false}};
  CHECK_THROWS_AS(select_threshold(bad, 50.0), Error);
  CHECK_THROWS_AS(select_threshold(r, 0.0), Error);
}

TEST_CASE("histogram: counts, overflow bucket, cumulative column") {
  QuotientReport r;
  r.entries = {{0, 1, 1, false}, {1, 1, 0, false}, {2, 3, 0, false}, {3, 3, 0, false}};
  const auto h = quotient_histogram(r, 2);
  CHECK(h.counts[0] == 2);
  CHECK(h.counts[1] == 2);
  CHECK(h.overflow == 0);
  CHECK(h.cumulative_percent[1] == doctest::Approx(100.0));

  QuotientReport w;
  for (int i = 0; i < 9; ++i) w.entries.push_back({i, double(i + 1), 0, false});
  w.entries.push_back({9, std::numeric_limits<double>::infinity(), 0, false});
  const auto h2 = quotient_histogram(w, 3);
  CHECK(h2.overflow == 1);
  CHECK(h2.cumulative_percent.back() == doctest::Approx(90.0));
}

TEST_CASE("engine equals the naive oracle, serially and in parallel") {
  std::mt19937_64 rng(27);
  for (int rep = 0; rep < 6; ++rep) {
    const int n = 40 + int(rng() % 200);
    const int d = 1 + int(rng() % 8);
    const int l = 1 + int(rng() % 3);
    RowMat O = testutil::random_rowmat(n, d, rng());
    RowMat U = testutil::random_rowmat(n, l, rng());
    if (rep % 2 == 0) {
      O.row(1) = O.row(0);  // inject duplicate observations
      U.row(3) = U.row(2);
      O.row(3) = O.row(2);
    }
    auto ss = testutil::make_samples(O, U);

    QuotientOptions serial;
    serial.threads = 1;
    QuotientOptions parallel;
    parallel.threads = 8;
    const auto rs = pointwise_quotients(ss, serial);
    const auto rp = pointwise_quotients(ss, parallel);
    const auto ref = oracle::naive_quotients(O, U, serial.epsilon_dup, serial.delta_dup);
    for (int i = 0; i < n; ++i) {
      const auto iu = static_cast<std::size_t>(i);
      CHECK(rs.entries[iu].q == ref[iu].q);  // exact, including infinities
      CHECK(rs.entries[iu].witness == ref[iu].witness);
      CHECK(rs.entries[iu].degenerate == ref[iu].degenerate);
      CHECK(rp.entries[iu].q == rs.entries[iu].q);
      CHECK(rp.entries[iu].witness == rs.entries[iu].witness);
    }
  }
}

TEST_CASE("worker count does not change the report") {
  auto ss = testutil::make_samples(testutil::random_rowmat(150, 4, 30), testutil::random_rowmat(150, 2, 31));
  QuotientOptions a, b;
  a.threads = 3;
  b.threads = 7;
  const auto ra = pointwise_quotients(ss, a);
  const auto rb = pointwise_quotients(ss, b);
  for (std::size_t i = 0; i < ra.entries.size(); ++i) {
    CHECK(ra.entries[i].q == rb.entries[i].q);
    CHECK(ra.entries[i].witness == rb.entries[i].witness);
  }
}

TEST_CASE("witness pair reproduces the quotient exactly") {
  auto ss = testutil::make_samples(testutil::random_rowmat(80, 3, 32), testutil::random_rowmat(80, 2, 33));
  const auto report = pointwise_quotients(ss);
  for (const auto& e : report.entries) {
    const auto i = static_cast<Eigen::Index>(e.sample_index);
    const auto j = static_cast<Eigen::Index>(e.witness);
    double do2 = 0, du2 = 0;
    for (Eigen::Index k = 0; k < ss.obs.cols(); ++k) {
      const double diff = ss.obs(i, k) - ss.obs(j, k);
      do2 += diff * diff;
    }
    for (Eigen::Index k = 0; k < ss.act.cols(); ++k) {
      const double diff = ss.act(i, k) - ss.act(j, k);
      du2 += diff * diff;
    }
    CHECK(std::sqrt(du2) / std::sqrt(do2) == e.q);
  }
}

TEST_CASE("report CSV round-trips, with inf literals and scopes") {
  testutil::TempDir tmp("qreport");
  auto ss = testutil::make_samples(testutil::random_rowmat(30, 2, 34), testutil::random_rowmat(30, 2, 35));
  ModeAssignment modes;
  std::mt19937_64 rng(36);
  for (int i = 0; i < 30; ++i) modes.states.push_back(int(rng() % 2));
  auto reports = mode_quotients(ss, modes);
  // Force one infinity through the file format.
  reports[0].entries[0].q = std::numeric_limits<double>::infinity();
  save_reports_csv(reports, tmp.file("r.csv"));
  const auto back = load_reports_csv(tmp.file("r.csv"));
  REQUIRE(back.size() == reports.size());
  for (std::size_t s = 0; s < reports.size(); ++s) {
    CHECK(back[s].scope == reports[s].scope);
    REQUIRE(back[s].entries.size() == reports[s].entries.size());
    for (std::size_t i = 0; i < reports[s].entries.size(); ++i) {
      CHECK(back[s].entries[i].q == reports[s].entries[i].q);
      CHECK(back[s].entries[i].witness == reports[s].entries[i].witness);
      CHECK(back[s].entries[i].sample_index == reports[s].entries[i].sample_index);
    }
  }
}

TEST_CASE("merged report is sorted by sample index and covers every sample") {
  auto ss = testutil::make_samples(testutil::random_rowmat(25, 2, 37), testutil::random_rowmat(25, 1, 38));
  ModeAssignment modes;
  std::mt19937_64 rng(39);
  for (int i = 0; i < 25; ++i) modes.states.push_back(int(rng() % 3));
  const auto merged = merge_reports(mode_quotients(ss, modes));
  REQUIRE(merged.entries.size() == 25);
  for (std::size_t i = 0; i < merged.entries.size(); ++i) {
    CHECK(merged.entries[i].sample_index == static_cast<std::int64_t>(i));
  }
}
