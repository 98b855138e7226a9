#include "lpoly/distributions.hpp"

#include <string>

namespace lpoly {

NormIndex NormIndex::finite(double r) {
    if (!(r >= 1.0) || !std::isfinite(r))
        throw std::invalid_argument("norm index must be finite and >= 1, got " + std::to_string(r));
    NormIndex idx;
    idx.r_ = r;
    idx.is_max_ = false;
    return idx;
}

PExponent::PExponent(double p) : p_(p), conj_(NormIndex::max()) {
    if (std::isnan(p) || p < 1.0) throw std::invalid_argument("p must satisfy p >= 1");
    if (std::isinf(p)) throw std::invalid_argument("p = inf is not supported");
    if (p > 1.0) conj_ = NormIndex::finite(p / (p - 1.0));
}

double sample_gamma(double shape, RandomSource& rng) {
    if (!(shape > 0.0)) throw std::invalid_argument("gamma shape must be positive");
    if (shape < 1.0) {
        const double boosted = sample_gamma(shape + 1.0, rng);
        return boosted * std::pow(rng.uniform_pos(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = rng.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform_pos();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double sample_gg_scalar(PExponent p, RandomSource& rng) {
    // |g| = W^(1/p) with W ~ Gamma(1/p). Writing W = V U^p, V ~ Gamma(1 + 1/p),
    // gives |g| = V^(1/p) U without forming U^p, which underflows for large p.
    const double inv_p = 1.0 / p.value();
    const double v = sample_gamma(1.0 + inv_p, rng);
    const double magnitude = std::pow(v, inv_p) * rng.uniform_pos();
    return rng.sign() * magnitude;
}

RealVector sample_gg_vector(int n, PExponent p, RandomSource& rng) {
    if (n < 1) throw std::invalid_argument("dimension must be >= 1");
    RealVector g(n);
    for (int i = 0; i < n; ++i) g(i) = sample_gg_scalar(p, rng);
    return g;
}

SpherePoint sample_cone(int n, PExponent p, RandomSource& rng) {
    for (;;) {
        RealVector g = sample_gg_vector(n, p, rng);
        if (lp_norm(g, p) > 0.0) return minkowski_map(g, p);
    }
}

RealVector sample_uniform_ball(int n, PExponent p, RandomSource& rng) {
    SpherePoint y = sample_cone(n, p, rng);
    const double radius = std::pow(rng.uniform(), 1.0 / n);
    return radius * y.coords();
}

SpherePoint minkowski_map(const RealVector& x, PExponent p) {
    const double r = lp_norm(x, p);
    if (!(r > 0.0) || !std::isfinite(r))
        throw DegenerateInputError("Minkowski map is undefined at the origin");
    return SpherePoint(x / r, p);
}

}  // namespace lpoly
