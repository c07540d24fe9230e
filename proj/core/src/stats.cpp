#include "lipshare/stats.hpp"

#include "lipshare/common.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lipshare {

namespace {

// Lentz continued-fraction evaluation of the incomplete beta fraction.
double beta_cf(double x, double a, double b) {
  constexpr double tiny = 1e-300;
  constexpr double tol = 1e-12;
  constexpr int max_terms = 500;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_terms; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < tol) return h;
  }
  return h;  // converged to working precision for all practical (a, b)
}

std::vector<double> average_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = 0.5 * double(i + j) + 1.0;  // average rank, 1-based
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double regularized_incomplete_beta(double x, double a, double b) {
  if (!(a > 0.0 && b > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "incomplete beta needs a, b > 0");
  }
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cf(x, a, b) / a;
  }
  return 1.0 - front * beta_cf(1.0 - x, b, a) / b;
}

double student_t_cdf(double t, double dof) {
  if (!(dof > 0.0)) throw Error(ErrorKind::InvalidArgument, "dof must be positive");
  const double x = dof / (dof + t * t);
  const double half_tail = 0.5 * regularized_incomplete_beta(x, 0.5 * dof, 0.5);
  return t >= 0.0 ? 1.0 - half_tail : half_tail;
}

TTestResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) {
    throw Error(ErrorKind::EmptyInput, "each sample needs at least 2 values");
  }
  const double na = double(a.size());
  const double nb = double(b.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / na;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / nb;
  double va = 0.0;
  double vb = 0.0;
  for (double v : a) va += (v - ma) * (v - ma);
  for (double v : b) vb += (v - mb) * (v - mb);
  va /= na - 1.0;
  vb /= nb - 1.0;
  if (va == 0.0 && vb == 0.0) {
    throw Error(ErrorKind::ZeroVariance, "both samples have zero variance");
  }

  const double se2 = va / na + vb / nb;
  TTestResult r;
  r.t = (ma - mb) / std::sqrt(se2);
  r.dof = se2 * se2 / (va * va / (na * na * (na - 1.0)) + vb * vb / (nb * nb * (nb - 1.0)));
  if (r.t == 0.0) {
    r.p = 1.0;
  } else {
    const double tail = 1.0 - student_t_cdf(std::fabs(r.t), r.dof);
    r.p = std::min(1.0, std::max(2.0 * tail, std::numeric_limits<double>::min()));
  }
  return r;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::DimensionMismatch, "spearman inputs differ in length");
  }
  if (x.size() < 2) throw Error(ErrorKind::EmptyInput, "spearman needs at least 2 points");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = double(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = rx[i] - mx;
    const double dy = ry[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw Error(ErrorKind::ZeroVariance, "constant ranks in spearman input");
  }
  return sxy / std::sqrt(sxx * syy);
}

double nearest_rank_percentile(std::vector<double> values, double percentile) {
  if (values.empty()) throw Error(ErrorKind::EmptyInput, "percentile of an empty set");
  if (!(percentile > 0.0 && percentile <= 100.0)) {
    throw Error(ErrorKind::InvalidArgument, "percentile must lie in (0, 100]");
  }
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  auto rank = static_cast<std::size_t>(std::ceil(percentile / 100.0 * double(n)));
  if (rank < 1) rank = 1;
  if (rank > n) rank = n;
  return values[rank - 1];
}

}  // namespace lipshare
