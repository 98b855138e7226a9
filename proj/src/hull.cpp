// Beneath-beyond convex hull of a centrally symmetric point set.
//
// The hull starts as the cross-polytope over n linearly independent
// generators, which already contains the origin in its interior. Every facet
// hyperplane therefore has positive offset and is recovered by solving
// A w = 1 for the matrix A of its vertex rows. Points are inserted one at a
// time; a facet is visible when the point lies beyond it by more than the
// tolerance. Coplanar simplicial facets are merged at the end.

#include <algorithm>
#include <array>
#include <numeric>
#include <string>
#include <unordered_map>

#include <Eigen/LU>

#include "lpoly/polytope.hpp"

namespace lpoly {

namespace {

using SmallVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxHullDim, 1>;
using SmallMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxHullDim, kMaxHullDim>;

struct WorkFacet {
    std::array<int, kMaxHullDim> v{};
    std::array<int, kMaxHullDim> nb{};  // nb[k] shares the ridge that omits v[k]
    SmallVec normal;
    double offset = 0.0;
    int visible_round = -1;
    bool alive = true;
};

using RidgeKey = std::array<int, kMaxHullDim - 1>;

struct RidgeHash {
    std::size_t operator()(const RidgeKey& key) const noexcept {
        std::uint64_t h = 0;
        for (int idx : key) h = mix64(h ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(idx)));
        return static_cast<std::size_t>(h);
    }
};

class HullBuilder {
public:
    HullBuilder(const Eigen::MatrixXd& points, double eps) : pts_(points), n_(static_cast<int>(points.rows())), eps_(eps) {}

    void seed_cross_polytope(const std::vector<int>& basis) {
        const int count = 1 << n_;
        facets_.resize(count);
        for (int s = 0; s < count; ++s) {
            WorkFacet& f = facets_[s];
            for (int k = 0; k < n_; ++k) {
                f.v[k] = 2 * basis[k] + ((s >> k) & 1);
                f.nb[k] = s ^ (1 << k);
            }
            set_plane(f);
        }
    }

    void insert(int q, int round) {
        const auto x = pts_.col(q);
        std::vector<int> visible;
        for (int id = 0; id < static_cast<int>(facets_.size()); ++id) {
            WorkFacet& f = facets_[id];
            if (!f.alive) continue;
            if (f.normal.dot(x) - f.offset > eps_) {
                f.visible_round = round;
                visible.push_back(id);
            }
        }
        if (visible.empty()) return;

        std::unordered_map<RidgeKey, std::pair<int, int>, RidgeHash> open;
        for (int fid : visible) {
            for (int k = 0; k < n_; ++k) {
                const int gid = facets_[fid].nb[k];
                if (facets_[gid].visible_round == round) continue;

                WorkFacet h;
                h.v = facets_[fid].v;
                h.v[k] = q;
                h.nb.fill(-1);
                h.nb[k] = gid;
                set_plane(h);
                const int hid = allocate(std::move(h));

                WorkFacet& g = facets_[gid];
                for (int j = 0; j < n_; ++j) {
                    if (g.nb[j] == fid) {
                        g.nb[j] = hid;
                        break;
                    }
                }
                for (int j = 0; j < n_; ++j) {
                    if (j == k) continue;
                    const RidgeKey key = ridge_key(facets_[hid].v, j);
                    auto it = open.find(key);
                    if (it == open.end()) {
                        open.emplace(key, std::make_pair(hid, j));
                    } else {
                        facets_[hid].nb[j] = it->second.first;
                        facets_[it->second.first].nb[it->second.second] = hid;
                        open.erase(it);
                    }
                }
            }
        }
        if (!open.empty()) throw DegeneracyError("hull update left an unmatched ridge (numerically degenerate input)");
        for (int fid : visible) {
            facets_[fid].alive = false;
            free_.push_back(fid);
        }
    }

    const std::vector<WorkFacet>& facets() const noexcept { return facets_; }

private:
    void set_plane(WorkFacet& f) const {
        SmallMat a(n_, n_);
        for (int i = 0; i < n_; ++i) a.row(i) = pts_.col(f.v[i]).transpose();
        const SmallVec w = a.partialPivLu().solve(SmallVec::Ones(n_));
        const double len = w.norm();
        if (!std::isfinite(len) || !(len > 0.0)) throw DegeneracyError("facet hyperplane through a singular vertex set");
        f.normal = w / len;
        f.offset = 1.0 / len;
    }

    int allocate(WorkFacet&& f) {
        if (!free_.empty()) {
            const int id = free_.back();
            free_.pop_back();
            facets_[id] = std::move(f);
            return id;
        }
        facets_.push_back(std::move(f));
        return static_cast<int>(facets_.size()) - 1;
    }

    RidgeKey ridge_key(const std::array<int, kMaxHullDim>& v, int skip) const {
        RidgeKey key;
        key.fill(-1);
        int m = 0;
        for (int i = 0; i < n_; ++i)
            if (i != skip) key[m++] = v[i];
        std::sort(key.begin(), key.begin() + m);
        return key;
    }

    const Eigen::MatrixXd& pts_;
    int n_;
    double eps_;
    std::vector<WorkFacet> facets_;
    std::vector<int> free_;
};

// Greedy pivoted Gram-Schmidt over the generators.
std::vector<int> independent_basis(const Eigen::MatrixXd& generators, double threshold) {
    const int n = static_cast<int>(generators.rows());
    const int count = static_cast<int>(generators.cols());
    Eigen::MatrixXd residual = generators;
    std::vector<int> basis;
    std::vector<char> used(count, 0);
    for (int step = 0; step < n; ++step) {
        int best = -1;
        double best_norm = threshold;
        for (int j = 0; j < count; ++j) {
            if (used[j]) continue;
            const double r = residual.col(j).norm();
            if (r > best_norm) {
                best_norm = r;
                best = j;
            }
        }
        if (best < 0) break;
        used[best] = 1;
        basis.push_back(best);
        const RealVector u = residual.col(best) / best_norm;
        for (int j = 0; j < count; ++j)
            if (!used[j]) residual.col(j) -= u.dot(residual.col(j)) * u;
    }
    return basis;
}

struct DisjointSets {
    explicit DisjointSets(int count) : parent(count) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
    std::vector<int> parent;
};

}  // namespace

SymmetricPolytope build_hull(const Eigen::MatrixXd& generators, const HullOptions& options) {
    const int n = static_cast<int>(generators.rows());
    const int count = static_cast<int>(generators.cols());
    if (n > kMaxHullDim) throw CapabilityError("hull dimension " + std::to_string(n) + " exceeds cap " + std::to_string(kMaxHullDim));
    if (n < 2) throw CapabilityError("hull dimension must be at least 2");
    if (!generators.allFinite()) throw std::invalid_argument("generators must be finite");

    SymmetricPolytope poly;
    poly.generators_ = generators;
    poly.points_.resize(n, 2 * count);
    for (int i = 0; i < count; ++i) {
        poly.points_.col(2 * i) = generators.col(i);
        poly.points_.col(2 * i + 1) = -generators.col(i);
    }

    const double scale = count == 0 ? 0.0 : poly.points_.colwise().norm().maxCoeff();
    const double eps = options.tolerance * scale;
    const std::vector<int> basis = independent_basis(generators, eps);
    if (static_cast<int>(basis.size()) < n) throw DegeneracyError("generators do not span R^" + std::to_string(n));

    HullBuilder builder(poly.points_, eps);
    builder.seed_cross_polytope(basis);
    std::vector<char> in_basis(count, 0);
    for (int b : basis) in_basis[b] = 1;
    int round = 0;
    for (int i = 0; i < count; ++i) {
        if (in_basis[i]) continue;
        builder.insert(2 * i, round++);
        builder.insert(2 * i + 1, round++);
    }

    // Merge adjacent coplanar simplicial facets.
    const auto& work = builder.facets();
    const int slots = static_cast<int>(work.size());
    DisjointSets sets(slots);
    for (int f = 0; f < slots; ++f) {
        if (!work[f].alive) continue;
        for (int k = 0; k < n; ++k) {
            const int g = work[f].nb[k];
            if (g < f) continue;
            int opposite = -1;
            for (int j = 0; j < n; ++j)
                if (work[g].nb[j] == f) opposite = work[g].v[j];
            if (std::abs(work[f].normal.dot(poly.points_.col(opposite)) - work[f].offset) <= eps) sets.unite(f, g);
        }
    }

    std::vector<int> group_of(slots, -1);
    std::vector<std::vector<int>> groups;
    for (int f = 0; f < slots; ++f) {
        if (!work[f].alive) continue;
        const int root = sets.find(f);
        if (group_of[root] < 0) {
            group_of[root] = static_cast<int>(groups.size());
            groups.emplace_back();
        }
        groups[group_of[root]].push_back(f);
    }

    for (const auto& members : groups) {
        Facet facet;
        RealVector normal = RealVector::Zero(n);
        for (int f : members) {
            normal += work[f].normal;
            facet.pieces.emplace_back(work[f].v.begin(), work[f].v.begin() + n);
            facet.vertices.insert(facet.vertices.end(), work[f].v.begin(), work[f].v.begin() + n);
        }
        std::sort(facet.vertices.begin(), facet.vertices.end());
        facet.vertices.erase(std::unique(facet.vertices.begin(), facet.vertices.end()), facet.vertices.end());
        if (members.size() == 1) {
            facet.normal = work[members.front()].normal;
            facet.offset = work[members.front()].offset;
        } else {
            facet.normal = normal.normalized();
            double total = 0.0;
            for (int v : facet.vertices) total += facet.normal.dot(poly.points_.col(v));
            facet.offset = total / static_cast<double>(facet.vertices.size());
        }
        poly.facets_.push_back(std::move(facet));
    }

    // Boundary points that are not extreme can only sit on merged facets. A
    // point is extreme iff the normals of the facets through it span R^n.
    std::vector<std::vector<int>> incident(2 * count);
    for (int fi = 0; fi < static_cast<int>(poly.facets_.size()); ++fi)
        for (int v : poly.facets_[fi].vertices) incident[v].push_back(fi);
    std::vector<char> extreme(2 * count, 1);
    for (const Facet& facet : poly.facets_) {
        if (static_cast<int>(facet.vertices.size()) == n) continue;
        for (int v : facet.vertices) {
            const auto& around = incident[v];
            Eigen::MatrixXd normals(static_cast<Eigen::Index>(around.size()), n);
            for (std::size_t r = 0; r < around.size(); ++r) normals.row(static_cast<Eigen::Index>(r)) = poly.facets_[around[r]].normal.transpose();
            Eigen::FullPivLU<Eigen::MatrixXd> lu(normals);
            lu.setThreshold(1e-7);
            if (lu.rank() < n) extreme[v] = 0;
        }
    }
    for (Facet& facet : poly.facets_)
        std::erase_if(facet.vertices, [&](int v) { return !extreme[v]; });

    for (const Facet& facet : poly.facets_) poly.vertices_.insert(poly.vertices_.end(), facet.vertices.begin(), facet.vertices.end());
    std::sort(poly.vertices_.begin(), poly.vertices_.end());
    poly.vertices_.erase(std::unique(poly.vertices_.begin(), poly.vertices_.end()), poly.vertices_.end());

    std::vector<int> order(2 * count);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        for (int r = 0; r < n; ++r) {
            const double pa = poly.points_(r, a), pb = poly.points_(r, b);
            if (pa != pb) return pa < pb;
        }
        return a < b;
    });
    poly.canonical_rank_.assign(2 * count, 0);
    for (int r = 0; r < 2 * count; ++r) poly.canonical_rank_[order[r]] = r;
    return poly;
}

SymmetricPolytope build_hull(const std::vector<RealVector>& generators, const HullOptions& options) {
    if (generators.empty()) throw DegeneracyError("no generators");
    const auto n = generators.front().size();
    Eigen::MatrixXd cols(n, static_cast<Eigen::Index>(generators.size()));
    for (std::size_t i = 0; i < generators.size(); ++i) {
        if (generators[i].size() != n) throw std::invalid_argument("generators have mixed dimensions");
        cols.col(static_cast<Eigen::Index>(i)) = generators[i];
    }
    return build_hull(cols, options);
}

int SymmetricPolytope::count_edges() const {
    if (dim() != 3) throw CapabilityError("edge counting is implemented for n = 3");
    std::vector<std::pair<int, int>> edges;
    for (const Facet& facet : facets_) {
        // Polygon edges join consecutive extreme vertices; with extreme
        // vertices only, the boundary of the piece fan has the same endpoints.
        std::vector<std::pair<int, int>> segments;
        for (const auto& piece : facet.pieces)
            for (int a = 0; a < 3; ++a) {
                int u = piece[a], w = piece[(a + 1) % 3];
                if (u > w) std::swap(u, w);
                segments.emplace_back(u, w);
            }
        std::sort(segments.begin(), segments.end());
        for (std::size_t i = 0; i < segments.size();) {
            std::size_t j = i;
            while (j < segments.size() && segments[j] == segments[i]) ++j;
            if (j - i == 1) edges.push_back(segments[i]);
            i = j;
        }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return static_cast<int>(edges.size());
}

}  // namespace lpoly
