#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

#include "lpoly/errors.hpp"
#include "lpoly/random_source.hpp"

namespace lpoly {

using RealVector = Eigen::VectorXd;

/// Index r of an l_r norm: either a finite r >= 1 or the max-norm.
class NormIndex {
public:
    static NormIndex finite(double r);
    static NormIndex max() noexcept { return NormIndex(); }

    bool is_max() const noexcept { return is_max_; }
    /// Finite index; +inf for the max-norm.
    double value() const noexcept { return is_max_ ? INFINITY : r_; }
    /// 1/r, read as 0 for the max-norm.
    double reciprocal() const noexcept { return is_max_ ? 0.0 : 1.0 / r_; }

private:
    NormIndex() noexcept = default;
    double r_ = 0.0;
    bool is_max_ = true;
};

/// Exponent p in [1, inf) together with its conjugate.
/// p = 1 has the max-norm as conjugate; p = inf is rejected.
class PExponent {
public:
    explicit PExponent(double p);

    double value() const noexcept { return p_; }
    NormIndex conjugate() const noexcept { return conj_; }
    NormIndex norm() const { return NormIndex::finite(p_); }
    operator NormIndex() const { return norm(); }

private:
    double p_;
    NormIndex conj_;
};

/// (sum |x_i|^r)^(1/r), or max |x_i| for the max-norm. Scaled by the largest
/// entry so that large r neither overflows nor underflows.
template <typename Derived>
double lp_norm(const Eigen::MatrixBase<Derived>& x, NormIndex r) {
    using std::abs;
    const double peak = x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff();
    if (r.is_max() || peak == 0.0) return peak;
    const double p = r.value();
    if (p == 1.0) return x.cwiseAbs().sum();
    if (p == 2.0) return peak * (x / peak).norm();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) acc += std::pow(abs(x(i)) / peak, p);
    return peak * std::pow(acc, 1.0 / p);
}

/// Point of the l_p unit sphere. Only produced by the samplers and the
/// Minkowski map, which guarantee | ||coords||_p - 1 | <= 1e-12.
class SpherePoint {
public:
    const RealVector& coords() const noexcept { return coords_; }
    const PExponent& p() const noexcept { return p_; }
    Eigen::Index dim() const noexcept { return coords_.size(); }

private:
    SpherePoint(RealVector coords, PExponent p) : coords_(std::move(coords)), p_(p) {}
    friend SpherePoint minkowski_map(const RealVector& x, PExponent p);

    RealVector coords_;
    PExponent p_;
};

/// Gamma(shape, 1). Shape < 1 goes through Gamma(a) = Gamma(a + 1) U^(1/a);
/// shape >= 1 uses Marsaglia-Tsang.
double sample_gamma(double shape, RandomSource& rng);

/// One draw from the density exp(-|t|^p) / (2 Gamma(1 + 1/p)).
double sample_gg_scalar(PExponent p, RandomSource& rng);

/// n independent generalized-Gaussian coordinates.
RealVector sample_gg_vector(int n, PExponent p, RandomSource& rng);

/// Cone measure of B_p^n via G / ||G||_p.
SpherePoint sample_cone(int n, PExponent p, RandomSource& rng);

/// Uniform law on B_p^n: U^(1/n) times a cone-measure point.
RealVector sample_uniform_ball(int n, PExponent p, RandomSource& rng);

/// x / ||x||_p. Throws DegenerateInputError for x = 0.
SpherePoint minkowski_map(const RealVector& x, PExponent p);

}  // namespace lpoly
