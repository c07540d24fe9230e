#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <lipshare/gate.hpp>

#include "test_util.hpp"

#include <random>

using namespace lipshare;

namespace {

GateLabels labels_for(const std::vector<int>& z, int mode = 0) {
  GateLabels labels;
  labels.z = z;
  labels.mode.assign(z.size(), mode);
  return labels;
}

}  // namespace

TEST_CASE("single-class mode degenerates to a constant classifier") {
  auto ss = testutil::make_samples(testutil::random_rowmat(10, 2, 70), testutil::random_rowmat(10, 1, 71));
  const auto gate = train_gate(ss, labels_for(std::vector<int>(10, 1)));
  CHECK(gate.modes.at(0).constant_label == 1);
  CHECK(gate_predict(gate, 0, Vec::Zero(2)) == 1);
  CHECK(gate_predict(gate, 0, Vec::Constant(2, 1e6)) == 1);
}

TEST_CASE("k=1 at a training point returns that point's label") {
  RowMat O(4, 1);
  O << 0.0, 1.0, 2.0, 3.0;
  auto ss = testutil::make_samples(O, testutil::random_rowmat(4, 1, 72));
  GateConfig cfg;
  cfg.k = 1;
  const auto gate = train_gate(ss, labels_for({0, 1, 0, 1}), cfg);
  CHECK(gate_predict(gate, 0, Vec::Constant(1, 0.0)) == 0);
  CHECK(gate_predict(gate, 0, Vec::Constant(1, 1.0)) == 1);
  CHECK(gate_predict(gate, 0, Vec::Constant(1, 3.0)) == 1);
  CHECK(gate.modes.at(0).train_accuracy == 1.0);
}

TEST_CASE("well-separated blobs are classified almost perfectly") {
  std::mt19937_64 rng(73);
  std::normal_distribution<double> gauss(0.0, 1.0);
  RowMat O(500, 2);
  std::vector<int> z(500);
  for (int i = 0; i < 500; ++i) {
    const int label = i % 2;
    const double center = label == 1 ? 5.0 : -5.0;
    O(i, 0) = center + gauss(rng);
    O(i, 1) = center + gauss(rng);
    z[static_cast<std::size_t>(i)] = label;
  }
  auto ss = testutil::make_samples(O, testutil::random_rowmat(500, 1, 74));

  const auto knn_gate = train_gate(ss, labels_for(z));
  CHECK(knn_gate.modes.at(0).train_accuracy >= 0.99);

  GateConfig lin;
  lin.kind = GateKind::linear;
  const auto lin_gate = train_gate(ss, labels_for(z), lin);
  CHECK(lin_gate.modes.at(0).train_accuracy >= 0.99);
}

TEST_CASE("even-k tie at a midpoint fails safe to voluntary") {
  RowMat O(2, 1);
  O << -1.0, 1.0;
  auto ss = testutil::make_samples(O, testutil::random_rowmat(2, 1, 75));
  GateConfig cfg;
  cfg.k = 2;
  const auto gate = train_gate(ss, labels_for({0, 1}), cfg);
  CHECK(gate_predict(gate, 0, Vec::Zero(1)) == 0);
}

TEST_CASE("prediction is deterministic and mode-routed") {
  auto ss = testutil::make_samples(testutil::random_rowmat(30, 3, 76), testutil::random_rowmat(30, 1, 77));
  GateLabels labels;
  std::mt19937_64 rng(78);
  for (int i = 0; i < 30; ++i) {
    labels.mode.push_back(i < 15 ? 0 : 2);
    labels.z.push_back(int(rng() % 2));
  }
  const auto gate = train_gate(ss, labels);
  const Vec o = Vec::Constant(3, 0.3);
  CHECK(gate_predict(gate, 0, o) == gate_predict(gate, 0, o));
  CHECK_THROWS_AS(gate_predict(gate, 1, o), Error);
  try {
    gate_predict(gate, 1, o);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownMode);
  }
  CHECK_THROWS_AS(gate_predict(gate, 0, Vec::Zero(2)), Error);
}

TEST_CASE("k=1 training accuracy is perfect without conflicting duplicates") {
  RowMat O = testutil::random_rowmat(60, 2, 79);
  auto ss = testutil::make_samples(O, testutil::random_rowmat(60, 1, 80));
  GateLabels labels;
  std::mt19937_64 rng(81);
  for (int i = 0; i < 60; ++i) {
    labels.mode.push_back(0);
    labels.z.push_back(int(rng() % 2));
  }
  GateConfig cfg;
  cfg.k = 1;
  const auto gate = train_gate(ss, labels, cfg);
  CHECK(gate.modes.at(0).train_accuracy == 1.0);
}

TEST_CASE("gate JSON round-trips predictions") {
  testutil::TempDir tmp("gate_json");
  auto ss = testutil::make_samples(testutil::random_rowmat(40, 2, 82), testutil::random_rowmat(40, 1, 83));
  GateLabels labels;
  std::mt19937_64 rng(84);
  for (int i = 0; i < 40; ++i) {
    labels.mode.push_back(i % 2);
    labels.z.push_back(int(rng() % 2));
  }
  const auto gate = train_gate(ss, labels);
  save_gate_json(gate, tmp.file("g.json"));
  const auto back = load_gate_json(tmp.file("g.json"));
  CHECK(back.W == gate.W);
  for (int rep = 0; rep < 20; ++rep) {
    const Vec o = testutil::random_rowmat(1, 2, 85 + static_cast<std::uint64_t>(rep)).row(0).transpose();
    CHECK(gate_predict(back, rep % 2, o) == gate_predict(gate, rep % 2, o));
  }
}
