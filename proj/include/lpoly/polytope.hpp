#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "lpoly/distributions.hpp"
#include "lpoly/errors.hpp"
#include "lpoly/random_source.hpp"

namespace lpoly {

inline constexpr int kMaxHullDim = 8;
inline constexpr int kMaxSubsetGenerators = 24;

struct HullOptions {
    /// Visibility/coplanarity threshold, relative to the largest point norm.
    double tolerance = 1e-9;
};

struct Facet {
    RealVector normal;  // unit, outward
    double offset = 0.0;
    /// Indices into SymmetricPolytope::points() of the extreme points on this facet.
    std::vector<int> vertices;
    /// Simplicial pieces (n point indices each) left by the incremental
    /// construction. A single piece when the facet is a simplex.
    std::vector<std::vector<int>> pieces;

    bool simplicial(int n) const noexcept { return static_cast<int>(vertices.size()) == n; }
};

/// conv{+-X_1, ..., +-X_N}. Column 2i of points() is X_i and column 2i + 1 is -X_i.
class SymmetricPolytope {
public:
    int dim() const noexcept { return static_cast<int>(generators_.rows()); }
    int num_generators() const noexcept { return static_cast<int>(generators_.cols()); }
    const Eigen::MatrixXd& generators() const noexcept { return generators_; }
    const Eigen::MatrixXd& points() const noexcept { return points_; }
    const std::vector<int>& vertices() const noexcept { return vertices_; }
    const std::vector<Facet>& facets() const noexcept { return facets_; }
    /// Rank of each point in lexicographic coordinate order.
    const std::vector<int>& canonical_rank() const noexcept { return canonical_rank_; }

    /// Number of distinct edges, counted from facet pieces after merging (n = 3 only).
    int count_edges() const;

private:
    friend SymmetricPolytope build_hull(const Eigen::MatrixXd& generators, const HullOptions& options);

    Eigen::MatrixXd generators_;
    Eigen::MatrixXd points_;
    std::vector<int> vertices_;
    std::vector<Facet> facets_;
    std::vector<int> canonical_rank_;
};

/// Simplex with one vertex at the origin; columns of verts are v_1..v_n.
struct Simplex {
    Eigen::MatrixXd verts;
};

struct BodySummary {
    double volume = 0.0;
    RealVector barycenter;
    Eigen::MatrixXd covariance;
};

struct McEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

/// Generators are the columns of `generators` (n x N). Requires 2 <= n <= 8.
SymmetricPolytope build_hull(const Eigen::MatrixXd& generators, const HullOptions& options = {});
SymmetricPolytope build_hull(const std::vector<RealVector>& generators, const HullOptions& options = {});

/// Origin cones over a fan triangulation of every facet.
std::vector<Simplex> triangulate(const SymmetricPolytope& polytope);

double simplex_volume(const Simplex& s);

/// Integral of x x^T over conv{0, v_1, ..., v_n}.
Eigen::MatrixXd simplex_second_moment(const Simplex& s);

using SecondMomentFn = std::function<Eigen::MatrixXd(const Simplex&)>;

BodySummary body_summary(const SymmetricPolytope& polytope);
/// Same, with the per-simplex second moment supplied by the caller.
BodySummary body_summary(const SymmetricPolytope& polytope, const SecondMomentFn& second_moment);

/// det(Cov)^(1/2n) / vol^(1/n).
double isotropic_constant(const BodySummary& body, int n);

/// Isotropic constant of the Euclidean unit ball, the minimum over convex bodies.
double euclidean_ball_isotropic_constant(int n);

bool contains(const SymmetricPolytope& polytope, const RealVector& x, double tolerance = 1e-9);

/// Monte Carlo mean of ||x||_1 under the uniform law on the polytope.
McEstimate mc_integral_l1(const SymmetricPolytope& polytope, RandomSource& rng, int m);
/// Same over an explicit list of origin simplices (chosen with probability
/// proportional to volume, point from Dirichlet barycentric weights).
McEstimate mc_integral_l1(std::span<const Simplex> cells, RandomSource& rng, int m);

/// Largest per-facet second-moment kernel over sign-consistent n-subsets of generators.
double subset_sup_bound(const SymmetricPolytope& polytope);

/// max over facets and sign patterns of (1 + sqrt 2)/n ||sum eps_i X_i||_1.
double facet_l1_bound(const SymmetricPolytope& polytope);

}  // namespace lpoly
