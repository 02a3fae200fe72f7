#include "hoptk/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hoptk {

std::string significance_stars(double p) {
    if (p < 0.001) return "***";
    if (p < 0.01) return "**";
    if (p < 0.05) return "*";
    return "ns";
}

namespace {

// Midranks over the pooled sample; returns ranks aligned with the input.
std::vector<double> midranks(const std::vector<double>& pooled) {
    const std::size_t n = pooled.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return pooled[i] < pooled[j]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
        const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mid;
        i = j + 1;
    }
    return ranks;
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

// Exact two-sided p: enumerate every assignment of na of the pooled
// (tie-free) observations to group a and count assignments at least as
// extreme as the observed |U - na*nb/2|.
double exact_two_sided_p(const std::vector<double>& pooled_sorted, std::size_t na, double u_obs) {
    const std::size_t n = pooled_sorted.size();
    const std::size_t nb = n - na;
    const double center = 0.5 * static_cast<double>(na * nb);
    const double dev_obs = std::abs(u_obs - center);

    std::vector<bool> pick(n, false);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(na), true);
    std::sort(pick.begin(), pick.end());  // lexicographically first mask for next_permutation

    std::size_t total = 0, extreme = 0;
    do {
        // rank sum of group a over distinct sorted values: rank = index + 1
        double ra = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (pick[i]) ra += static_cast<double>(i + 1);
        const double u = ra - 0.5 * static_cast<double>(na * (na + 1));
        ++total;
        if (std::abs(u - center) >= dev_obs - 1e-12) ++extreme;
    } while (std::next_permutation(pick.begin(), pick.end()));
    return static_cast<double>(extreme) / static_cast<double>(total);
}

}  // namespace

Comparison mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("mann_whitney_u: empty group");
    const std::size_t na = a.size(), nb = b.size();
    const std::size_t n = na + nb;

    std::vector<double> pooled;
    pooled.reserve(n);
    pooled.insert(pooled.end(), a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    const std::vector<double> ranks = midranks(pooled);

    double ra = 0.0;
    for (std::size_t i = 0; i < na; ++i) ra += ranks[i];
    const double u = ra - 0.5 * static_cast<double>(na * (na + 1));

    // Tie census (sizes of tied groups).
    std::vector<double> sorted = pooled;
    std::sort(sorted.begin(), sorted.end());
    double tie_term = 0.0;
    bool has_ties = false;
    {
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && sorted[j + 1] == sorted[i]) ++j;
            const double t = static_cast<double>(j - i + 1);
            if (t > 1.0) {
                has_ties = true;
                tie_term += t * t * t - t;
            }
            i = j + 1;
        }
    }

    Comparison cmp;
    cmp.U = u;
    if (n <= 12 && !has_ties) {
        cmp.exact = true;
        cmp.p_two_sided = exact_two_sided_p(sorted, na, u);
    } else {
        const double mu = 0.5 * static_cast<double>(na * nb);
        const double nn = static_cast<double>(n);
        double var = (static_cast<double>(na * nb) / 12.0) *
                     ((nn + 1.0) - tie_term / (nn * (nn - 1.0)));
        if (var <= 0.0) {
            cmp.p_two_sided = 1.0;  // all observations identical
        } else {
            const double z = std::max(0.0, (std::abs(u - mu) - 0.5) / std::sqrt(var));
            cmp.p_two_sided = std::min(1.0, 2.0 * normal_sf(z));
        }
    }
    if (cmp.p_two_sided <= 0.0) cmp.p_two_sided = std::numeric_limits<double>::min();
    cmp.stars = significance_stars(cmp.p_two_sided);
    return cmp;
}

namespace {

double beta_cf(double a, double b, double x) {
    // Lentz continued fraction for the incomplete beta.
    const int max_iter = 300;
    const double eps = 1e-15, fpmin = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }
    return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log(1.0 - x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

namespace {

double student_t_cdf(double t, double dof) {
    const double x = dof / (dof + t * t);
    const double tail = 0.5 * incomplete_beta(0.5 * dof, 0.5, x);
    return t >= 0.0 ? 1.0 - tail : tail;
}

}  // namespace

double student_t_quantile(double p, double dof) {
    if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("student_t_quantile: p in (0,1) required");
    if (dof <= 0.0) throw std::invalid_argument("student_t_quantile: dof must be positive");
    double lo = -1e8, hi = 1e8;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (student_t_cdf(mid, dof) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

MeanCi mean_ci95(const std::vector<double>& x) {
    if (x.size() < 2) throw std::invalid_argument("mean_ci95: need at least 2 values");
    const double n = static_cast<double>(x.size());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    const double s = std::sqrt(ss / (n - 1.0));
    const double t = student_t_quantile(0.975, n - 1.0);
    return {mean, t * s / std::sqrt(n)};
}

}  // namespace hoptk
