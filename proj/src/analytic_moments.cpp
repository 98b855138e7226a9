#include "lpoly/analytic_moments.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

namespace lpoly {

EquivalenceBand::EquivalenceBand(double c) : c_(c) {
    if (!(c >= 1.0) || !std::isfinite(c)) throw std::invalid_argument("equivalence band constant must be >= 1");
}

RealVector rearrange_abs(const RealVector& a) {
    RealVector out = a.cwiseAbs();
    std::sort(out.data(), out.data() + out.size(), std::greater<>());
    return out;
}

double gamma_ratio_moment(int n, PExponent p, double q) {
    if (n < 1) throw std::invalid_argument("gamma_ratio_moment: n must be >= 1");
    if (!(q >= 0.0)) throw std::invalid_argument("gamma_ratio_moment: q must be >= 0");
    const double pv = p.value();
    return std::exp(std::lgamma((n + q) / pv) - std::lgamma(n / pv));
}

double gk_equiv(const RealVector& a, PExponent p, double q) {
    if (!(q >= 1.0) || q != std::floor(q)) throw std::invalid_argument("gk_equiv: q must be an integer >= 1");
    const RealVector sorted = rearrange_abs(a);
    const auto size = sorted.size();
    const auto head = std::min<Eigen::Index>(static_cast<Eigen::Index>(q), size);
    const double head_norm = lp_norm(sorted.head(head), p.conjugate());
    const double tail_norm = sorted.tail(size - head).norm();
    return std::pow(q, 1.0 / p.value()) * head_norm + std::sqrt(q) * tail_norm;
}

double cone_moment_estimate(const MomentQuery& query) {
    if (query.n < 1 || query.theta.size() != query.n)
        throw std::invalid_argument("cone_moment_estimate: theta must have n coordinates");
    const double radial = gamma_ratio_moment(query.n, query.p, query.q);
    return std::pow(radial, -1.0 / query.q) * gk_equiv(query.theta, query.p, query.q);
}

double empirical_lq(std::span<const double> samples, double q) {
    if (samples.empty()) throw std::invalid_argument("empirical_lq: no samples");
    if (!(q >= 1.0)) throw std::invalid_argument("empirical_lq: q must be >= 1");
    // Scale by the largest magnitude so high orders stay finite.
    double peak = 0.0;
    for (double s : samples) peak = std::max(peak, std::abs(s));
    if (peak == 0.0) return 0.0;
    double acc = 0.0;
    for (double s : samples) acc += std::pow(std::abs(s) / peak, q);
    return peak * std::pow(acc / static_cast<double>(samples.size()), 1.0 / q);
}

double psi2_estimate(std::span<const double> samples, int q_max) {
    if (q_max < 2) throw std::invalid_argument("psi2_estimate: q_max must be >= 2");
    double best = 0.0;
    for (int q = 2; q <= q_max; ++q) best = std::max(best, empirical_lq(samples, q) / std::sqrt(static_cast<double>(q)));
    return best;
}

int default_psi2_qmax(std::size_t m) {
    if (m < 2) return 2;
    const int cap = static_cast<int>(std::ceil(2.0 * std::log2(static_cast<double>(m))));
    return std::clamp(cap, 2, 64);
}

double bernstein_bound(double eps, int N, double c) {
    if (!(eps >= 0.0) || N < 1 || !(c > 0.0)) throw std::invalid_argument("bernstein_bound: need eps >= 0, N >= 1, c > 0");
    return 2.0 * std::exp(-eps * eps * N / (8.0 * c * c));
}

}  // namespace lpoly
