#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "lpoly/polytope.hpp"

namespace lpoly {

namespace {

// Neumaier compensated sum, elementwise for Eigen types.
template <typename T>
struct CompensatedSum {
    T sum;
    T carry;

    explicit CompensatedSum(T zero) : sum(zero), carry(zero) {}

    void add(const T& x) {
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            double& s = sum.data()[i];
            const double v = x.data()[i];
            const double t = s + v;
            carry.data()[i] += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
            s = t;
        }
    }
    T value() const { return sum + carry; }
};

template <>
struct CompensatedSum<double> {
    double sum = 0.0;
    double carry = 0.0;

    explicit CompensatedSum(double zero) : sum(zero), carry(zero) {}

    void add(double x) {
        const double t = sum + x;
        carry += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + carry; }
};

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// Calls visit(indices) for every k-subset of {0, ..., count - 1} in
// lexicographic order.
template <typename Visit>
void for_each_combination(int count, int k, Visit&& visit) {
    if (k > count) return;
    std::vector<int> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    for (;;) {
        visit(idx);
        int i = k - 1;
        while (i >= 0 && idx[i] == count - k + i) --i;
        if (i < 0) return;
        ++idx[i];
        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

// Walks the sign patterns (+1, eps_2, ..., eps_k) in Gray-code order,
// maintaining sum eps_i cols_i; the global sign is fixed since every
// quantity evaluated on the sum is even.
template <typename Visit>
void for_each_sign_pattern(const Eigen::MatrixXd& cols, Visit&& visit) {
    const int k = static_cast<int>(cols.cols());
    RealVector sum = cols.rowwise().sum();
    std::vector<double> sign(k, 1.0);
    visit(sum);
    const std::uint64_t patterns = k > 0 ? (std::uint64_t{1} << (k - 1)) : 1;
    for (std::uint64_t g = 1; g < patterns; ++g) {
        const int flip = std::countr_zero(g) + 1;
        sign[flip] = -sign[flip];
        sum += (2.0 * sign[flip]) * cols.col(flip);
        visit(sum);
    }
}

}  // namespace

std::vector<Simplex> triangulate(const SymmetricPolytope& polytope) {
    const int n = polytope.dim();
    const auto& pts = polytope.points();
    const auto& rank = polytope.canonical_rank();
    std::vector<Simplex> cells;
    cells.reserve(polytope.facets().size());

    auto make_cell = [&](const std::vector<int>& idx) {
        Simplex s;
        s.verts.resize(n, n);
        for (int i = 0; i < n; ++i) s.verts.col(i) = pts.col(idx[i]);
        return s;
    };

    for (const Facet& facet : polytope.facets()) {
        if (facet.pieces.size() == 1) {
            cells.push_back(make_cell(facet.pieces.front()));
            continue;
        }
        const int apex = *std::min_element(facet.vertices.begin(), facet.vertices.end(),
                                           [&](int a, int b) { return rank[a] < rank[b]; });
        // Boundary ridges of the piece complex triangulate the facet boundary.
        std::map<std::vector<int>, int> ridges;
        for (const auto& piece : facet.pieces) {
            for (int skip = 0; skip < n; ++skip) {
                std::vector<int> ridge;
                ridge.reserve(n - 1);
                for (int i = 0; i < n; ++i)
                    if (i != skip) ridge.push_back(piece[i]);
                std::sort(ridge.begin(), ridge.end());
                ++ridges[ridge];
            }
        }
        for (const auto& [ridge, uses] : ridges) {
            if (uses != 1) continue;
            if (std::find(ridge.begin(), ridge.end(), apex) != ridge.end()) continue;
            std::vector<int> idx{apex};
            idx.insert(idx.end(), ridge.begin(), ridge.end());
            Simplex s = make_cell(idx);
            // Skip ridges whose sub-facet already contains the apex.
            const double hadamard = s.verts.colwise().norm().prod();
            if (std::abs(s.verts.determinant()) <= 1e-9 * hadamard) continue;
            cells.push_back(std::move(s));
        }
    }
    return cells;
}

double simplex_volume(const Simplex& s) {
    const auto n = s.verts.cols();
    return std::abs(s.verts.determinant()) / std::tgamma(static_cast<double>(n) + 1.0);
}

Eigen::MatrixXd simplex_second_moment(const Simplex& s) {
    const double n = static_cast<double>(s.verts.cols());
    const RealVector sum = s.verts.rowwise().sum();
    const Eigen::MatrixXd kernel = s.verts * s.verts.transpose() + sum * sum.transpose();
    return (simplex_volume(s) / ((n + 1.0) * (n + 2.0))) * kernel;
}

BodySummary body_summary(const SymmetricPolytope& polytope) {
    return body_summary(polytope, simplex_second_moment);
}

BodySummary body_summary(const SymmetricPolytope& polytope, const SecondMomentFn& second_moment) {
    const int n = polytope.dim();
    CompensatedSum<double> volume(0.0);
    CompensatedSum<RealVector> first(RealVector::Zero(n));
    CompensatedSum<Eigen::MatrixXd> second(Eigen::MatrixXd::Zero(n, n));
    for (const Simplex& s : triangulate(polytope)) {
        const double vol = simplex_volume(s);
        volume.add(vol);
        first.add((vol / (n + 1.0)) * s.verts.rowwise().sum());
        second.add(second_moment(s));
    }
    BodySummary out;
    out.volume = volume.value();
    if (!(out.volume > 0.0)) throw DegeneracyError("polytope has zero volume");
    out.barycenter = first.value() / out.volume;
    out.covariance = second.value() / out.volume - out.barycenter * out.barycenter.transpose();
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
    return out;
}

double isotropic_constant(const BodySummary& body, int n) {
    if (body.covariance.rows() != n || body.covariance.cols() != n)
        throw std::invalid_argument("covariance does not match dimension");
    if (!(body.volume > 0.0)) throw DegeneracyError("body has non-positive volume");
    Eigen::LLT<Eigen::MatrixXd> chol(body.covariance);
    if (chol.info() != Eigen::Success) throw DegeneracyError("covariance is not positive definite");
    const auto diag = chol.matrixLLT().diagonal();
    if ((diag.array() <= 0.0).any()) throw DegeneracyError("covariance is not positive definite");
    const double log_det = 2.0 * diag.array().log().sum();
    return std::exp(log_det / (2.0 * n) - std::log(body.volume) / n);
}

double euclidean_ball_isotropic_constant(int n) {
    const double dn = n;
    const double log_vol = 0.5 * dn * std::log(std::numbers::pi) - std::lgamma(0.5 * dn + 1.0);
    return std::exp(-0.5 * std::log(dn + 2.0) - log_vol / dn);
}

bool contains(const SymmetricPolytope& polytope, const RealVector& x, double tolerance) {
    for (const Facet& f : polytope.facets())
        if (f.normal.dot(x) > f.offset + tolerance) return false;
    return true;
}

McEstimate mc_integral_l1(const SymmetricPolytope& polytope, RandomSource& rng, int m) {
    const std::vector<Simplex> cells = triangulate(polytope);
    return mc_integral_l1(cells, rng, m);
}

McEstimate mc_integral_l1(std::span<const Simplex> cells, RandomSource& rng, int m) {
    if (m < 1000) throw std::invalid_argument("mc_integral_l1 needs at least 1000 samples");
    if (cells.empty()) throw std::invalid_argument("mc_integral_l1 needs at least one simplex");
    std::vector<double> cumulative(cells.size());
    double total = 0.0;
    for (std::size_t i = 0; i < cells.size(); ++i) cumulative[i] = total += simplex_volume(cells[i]);

    const int n = static_cast<int>(cells.front().verts.rows());
    std::vector<double> weight(n + 1);
    double mean = 0.0, m2 = 0.0;
    for (int k = 1; k <= m; ++k) {
        const double target = rng.uniform() * total;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
        if (it == cumulative.end()) --it;
        const Simplex& s = cells[static_cast<std::size_t>(it - cumulative.begin())];
        // Normalized exponential spacings are Dirichlet(1, ..., 1), the
        // barycentric coordinates of a uniform point; slot 0 is the origin.
        double wsum = 0.0;
        for (double& w : weight) wsum += w = rng.exponential();
        RealVector x = RealVector::Zero(n);
        for (int i = 0; i < n; ++i) x += (weight[i + 1] / wsum) * s.verts.col(i);
        const double value = x.lpNorm<1>();
        const double delta = value - mean;
        mean += delta / k;
        m2 += delta * (value - mean);
    }
    return {mean, std::sqrt(m2 / (m - 1.0) / m)};
}

double subset_sup_bound(const SymmetricPolytope& polytope) {
    const int n = polytope.dim();
    const int count = polytope.num_generators();
    if (n > kMaxHullDim || count > kMaxSubsetGenerators)
        throw CapabilityError("subset enumeration capped at N <= 24, n <= 8 (C(" + std::to_string(count) + "," +
                              std::to_string(n) + ") = " + std::to_string(binomial(count, n)) + ")");
    const Eigen::MatrixXd& gens = polytope.generators();
    const RealVector sq = gens.colwise().squaredNorm().transpose();
    double best = 0.0;
    Eigen::MatrixXd cols(n, n);
    for_each_combination(count, n, [&](const std::vector<int>& idx) {
        double norms = 0.0;
        for (int i = 0; i < n; ++i) {
            cols.col(i) = gens.col(idx[i]);
            norms += sq(idx[i]);
        }
        double widest = 0.0;
        for_each_sign_pattern(cols, [&](const RealVector& sum) { widest = std::max(widest, sum.squaredNorm()); });
        best = std::max(best, norms + widest);
    });
    return best / ((n + 1.0) * (n + 2.0));
}

double facet_l1_bound(const SymmetricPolytope& polytope) {
    const int n = polytope.dim();
    if (n > kMaxHullDim) throw CapabilityError("facet sign enumeration capped at n <= 8");
    const auto& pts = polytope.points();
    double best = 0.0;
    Eigen::MatrixXd cols(n, n);
    for (const Facet& facet : polytope.facets()) {
        if (!facet.simplicial(n))
            throw CapabilityError("facet with " + std::to_string(facet.vertices.size()) + " vertices is not simplicial");
        for (int i = 0; i < n; ++i) cols.col(i) = pts.col(facet.vertices[i]);
        for_each_sign_pattern(cols, [&](const RealVector& sum) { best = std::max(best, sum.lpNorm<1>()); });
    }
    return (1.0 + std::numbers::sqrt2) / n * best;
}

}  // namespace lpoly
