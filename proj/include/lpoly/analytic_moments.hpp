#pragma once

#include <span>

#include "lpoly/distributions.hpp"

namespace lpoly {

/// Two-sided multiplicative band for checks of the form a ~ b.
class EquivalenceBand {
public:
    explicit EquivalenceBand(double c = 10.0);
    double c() const noexcept { return c_; }
    /// ratio in [1/C, C].
    bool contains(double ratio) const noexcept { return ratio >= 1.0 / c_ && ratio <= c_; }

private:
    double c_;
};

struct MomentQuery {
    int n;
    PExponent p;
    double q;
    RealVector theta;
};

/// |a_i| sorted non-increasing.
RealVector rearrange_abs(const RealVector& a);

/// E ||G||_p^q = Gamma((n + q)/p) / Gamma(n/p), through log-Gamma.
double gamma_ratio_moment(int n, PExponent p, double q);

/// q^(1/p) ||(a*_1..a*_q)||_{p*} + sqrt(q) ||(a*_{q+1}..a*_n)||_2.
/// Throws std::invalid_argument for non-integer q or q < 1.
double gk_equiv(const RealVector& a, PExponent p, double q);

/// (Gamma(n/p) / Gamma((n+q)/p))^(1/q) gk_equiv(theta, p, q): the order of
/// magnitude of the q-th moment of <Y, theta> under the cone measure.
double cone_moment_estimate(const MomentQuery& query);

/// ((1/m) sum |s_i|^q)^(1/q).
double empirical_lq(std::span<const double> samples, double q);

/// max over integer q in [2, q_max] of empirical_lq(samples, q) / sqrt(q).
double psi2_estimate(std::span<const double> samples, int q_max);

/// Default moment cap for psi2_estimate: min(64, ceil(2 log2 m)).
int default_psi2_qmax(std::size_t m);

/// 2 exp(-eps^2 N / (8 c^2)).
double bernstein_bound(double eps, int N, double c);

}  // namespace lpoly
