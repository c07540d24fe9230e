#pragma once

#include "lipshare/common.hpp"

#include <vector>

namespace lipshare {

struct TTestResult {
  double t = 0.0;
  double dof = 0.0;  // Welch-Satterthwaite, real-valued
  double p = 1.0;    // two-sided
};

// Welch's unequal-variance t-test (sample variances, n-1 denominator).
TTestResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b);

// I_x(a, b) via Lentz continued fraction, converged to 1e-12.
double regularized_incomplete_beta(double x, double a, double b);

double student_t_cdf(double t, double dof);

// Spearman rank correlation with average ranks on ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

// Nearest-rank percentile: smallest order statistic covering the fraction.
// percentile must lie in (0, 100]; values must be nonempty.
double nearest_rank_percentile(std::vector<double> values, double percentile);

}  // namespace lipshare
