#pragma once

#include <string>
#include <vector>

namespace hoptk {

struct Comparison {
    double U = 0.0;             // statistic for (a, b); U(a,b) + U(b,a) = |a| * |b|
    double p_two_sided = 1.0;
    bool exact = false;         // exact enumeration vs normal approximation
    std::string stars = "ns";   // ns / * / ** / ***
};

// Mann-Whitney U with midrank tie handling. Exact two-sided p by full
// enumeration when |a| + |b| <= 12 and there are no ties; otherwise the
// normal approximation with tie and continuity corrections.
Comparison mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b);

// Pure threshold map: p < 0.05 / 0.01 / 0.001 -> * / ** / ***.
std::string significance_stars(double p);

struct MeanCi {
    double mean = 0.0;
    double half_width = 0.0;  // t_{0.975, n-1} * s / sqrt(n)
};
MeanCi mean_ci95(const std::vector<double>& x);

// Student-t quantile (upper-tail probability 1 - p), used by the CI and
// exposed for tests.
double student_t_quantile(double p, double dof);

// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

}  // namespace hoptk
