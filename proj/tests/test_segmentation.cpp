#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <lipshare/segmentation.hpp>

#include "test_util.hpp"

#include <cmath>
#include <limits>

using namespace lipshare;

namespace {

// One-mode report with the given quotients.
std::vector<QuotientReport> one_mode_report(const std::vector<double>& qs, int mode = 0) {
  QuotientReport r;
  r.scope = mode;
  for (std::size_t i = 0; i < qs.size(); ++i) {
    r.entries.push_back(
        {static_cast<std::int64_t>(i), qs[i], qs[i] == 0.0 ? -1 : 0, qs[i] == 0.0});
  }
  return {r};
}

}  // namespace

TEST_CASE("all quotients below K: voluntary set empty") {
  const auto seg = split_rv(one_mode_report({1, 2, 3}), Threshold{5.0, 90.0});
  CHECK(seg.modes[0].voluntary.empty());
  CHECK(seg.modes[0].reactive.size() == 3);
  CHECK(seg.voluntary_ratio == 0.0);
}

TEST_CASE("split at K = 5 with an infinity") {
  const double inf = std::numeric_limits<double>::infinity();
  const auto seg = split_rv(one_mode_report({1, 3, 7, inf}), Threshold{5.0, 0.0});
  CHECK(seg.modes[0].reactive == std::vector<std::int64_t>{0, 1});
  CHECK(seg.modes[0].voluntary == std::vector<std::int64_t>{2, 3});
  CHECK(seg.voluntary_ratio == doctest::Approx(0.5));
}

TEST_CASE("boundary semantics: q equal to K stays reactive") {
  const double inf = std::numeric_limits<double>::infinity();
  const auto at7 = split_rv(one_mode_report({1, 3, 7, inf}), Threshold{7.0, 0.0});
  CHECK(at7.modes[0].reactive == std::vector<std::int64_t>{0, 1, 2});
  CHECK(at7.modes[0].voluntary == std::vector<std::int64_t>{3});
  const auto at3 = split_rv(one_mode_report({1, 3, 7, inf}), Threshold{3.0, 0.0});
  CHECK(at3.modes[0].reactive == std::vector<std::int64_t>{0, 1});
  CHECK(at3.modes[0].voluntary == std::vector<std::int64_t>{2, 3});
}

TEST_CASE("gate labels mirror the partition") {
  const double inf = std::numeric_limits<double>::infinity();
  const auto seg = split_rv(one_mode_report({1, 3, 7, inf}), Threshold{5.0, 0.0});
  const auto labels = make_gate_labels(seg);
  CHECK(labels.z == std::vector<int>{1, 1, 0, 0});
  CHECK(labels.mode == std::vector<int>{0, 0, 0, 0});
  std::size_t reactive_count = 0;
  for (const auto& split : seg.modes) reactive_count += split.reactive.size();
  std::size_t ones = 0;
  for (int z : labels.z) ones += static_cast<std::size_t>(z);
  CHECK(ones == reactive_count);
}

TEST_CASE("partition property and monotone voluntary ratio in K") {
  std::mt19937_64 rng(62);
  std::vector<double> qs;
  for (int i = 0; i < 500; ++i) qs.push_back(double(rng() % 1000) / 100.0);
  double prev_ratio = 1.0;
  for (double K : {0.5, 2.0, 4.0, 6.0, 8.0, 10.0}) {
    const auto seg = split_rv(one_mode_report(qs), Threshold{K, 0.0});
    CHECK(seg.modes[0].reactive.size() + seg.modes[0].voluntary.size() == qs.size());
    CHECK(seg.voluntary_ratio <= prev_ratio);
    prev_ratio = seg.voluntary_ratio;
    for (std::int64_t i : seg.modes[0].reactive) CHECK(qs[static_cast<std::size_t>(i)] <= K);
    for (std::int64_t i : seg.modes[0].voluntary) CHECK(qs[static_cast<std::size_t>(i)] > K);
  }
}

TEST_CASE("infinite quotients are voluntary for every finite K") {
  const double inf = std::numeric_limits<double>::infinity();
  for (double K : {1.0, 1e6, 1e300}) {
    const auto seg = split_rv(one_mode_report({inf, 1.0}), Threshold{K, 0.0});
    CHECK(seg.modes[0].voluntary == std::vector<std::int64_t>{0});
  }
}

TEST_CASE("random segmentation: single mode, determinism, proportions") {
  auto ss = testutil::make_samples(testutil::random_rowmat(10000, 1, 63),
                                   testutil::random_rowmat(10000, 1, 64));
  const auto all_one = random_segmentation(ss, 1, 3);
  for (int s : all_one.states) CHECK(s == 0);

  const auto a = random_segmentation(ss, 4, 123);
  const auto b = random_segmentation(ss, 4, 123);
  CHECK(a.states == b.states);
  CHECK(a.source == ModeAssignment::Source::random);

  const std::vector<double> want{0.1, 0.2, 0.3, 0.4};
  const auto c = random_segmentation(ss, 4, 9, want);
  const auto got = empirical_proportions(c);
  for (int j = 0; j < 4; ++j) {
    CHECK(std::abs(got[static_cast<std::size_t>(j)] - want[static_cast<std::size_t>(j)]) < 0.02);
  }
}

TEST_CASE("segmentation CSV round-trips the partition") {
  testutil::TempDir tmp("seg_csv");
  const double inf = std::numeric_limits<double>::infinity();
  QuotientReport m0, m1;
  m0.scope = 0;
  m0.entries = {{0, 1.0, 1, false}, {2, 9.0, 0, false}};
  m1.scope = 1;
  m1.entries = {{1, 4.0, 3, false}, {3, inf, 1, false}};
  const auto seg = split_rv({m0, m1}, Threshold{5.0, 80.0});
  save_segmentation_csv(seg, tmp.file("seg.csv"));
  const auto back = load_segmentation_csv(tmp.file("seg.csv"));
  CHECK(back.total_samples == seg.total_samples);
  CHECK(back.voluntary_ratio == doctest::Approx(seg.voluntary_ratio));
  CHECK(back.sample_mode == seg.sample_mode);
  CHECK(back.sample_q == seg.sample_q);
  REQUIRE(back.modes.size() == seg.modes.size());
  for (std::size_t m = 0; m < seg.modes.size(); ++m) {
    CHECK(back.modes[m].reactive == seg.modes[m].reactive);
    CHECK(back.modes[m].voluntary == seg.modes[m].voluntary);
  }
}

TEST_CASE("reports that double-cover a sample are rejected") {
  QuotientReport a, b;
  a.scope = 0;
  a.entries = {{0, 1.0, 1, false}};
  b.scope = 1;
  b.entries = {{0, 2.0, 1, false}};
  CHECK_THROWS_AS(split_rv({a, b}, Threshold{5.0, 0.0}), Error);
}
