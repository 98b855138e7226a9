#include "lpoly/verify.hpp"

#include <chrono>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "lpoly/analytic_moments.hpp"
#include "lpoly/harness.hpp"

namespace lpoly {

namespace {

constexpr double kPGrid[] = {1.0, 1.5, 2.0, 3.0, 5.0};
constexpr double kQGrid[] = {1.0, 2.0, 4.0};

struct RunningStats {
    long count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++count;
        const double d = x - mean;
        mean += d / static_cast<double>(count);
        m2 += d * (x - mean);
    }
    double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
    double std_error() const { return std::sqrt(variance() / static_cast<double>(count)); }
};

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
    RunningStats sa, sb;
    for (double x : a) sa.add(x);
    for (double x : b) sb.add(x);
    double cov = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) cov += (a[i] - sa.mean) * (b[i] - sb.mean);
    cov /= static_cast<double>(a.size() - 1);
    return cov / std::sqrt(sa.variance() * sb.variance());
}

double abs_moment_of_gg(double p, double q) {
    return std::exp(std::lgamma((q + 1.0) / p) - std::lgamma(1.0 / p));
}

RealVector random_unit(int n, RandomSource& rng) {
    RealVector v(n);
    for (int i = 0; i < n; ++i) v(i) = rng.normal();
    return v.normalized();
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

template <typename Body>
CheckResult timed(std::string name, Body&& body) {
    const auto start = std::chrono::steady_clock::now();
    CheckResult out;
    out.name = std::move(name);
    try {
        body(out);
    } catch (const std::exception& e) {
        out.passed = false;
        out.detail += std::string(out.detail.empty() ? "" : "; ") + "exception: " + e.what();
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

// Accumulates the worst cell and a failure count for the detail line.
struct Tally {
    int cells = 0;
    int failures = 0;
    std::string first_failure;

    void record(bool ok, const std::string& what) {
        ++cells;
        if (!ok && failures++ == 0) first_failure = what;
    }
    void finish(CheckResult& out) const {
        out.passed = failures == 0;
        out.detail = std::to_string(cells - failures) + "/" + std::to_string(cells) + " cells pass";
        if (failures) out.detail += "; first failure: " + first_failure;
    }
};

}  // namespace

bool VerifyReport::all_passed() const {
    for (const auto& c : checks)
        if (!c.passed) return false;
    return true;
}

std::string VerifyReport::to_json() const {
    nlohmann::ordered_json doc;
    doc["passed"] = all_passed();
    auto arr = nlohmann::ordered_json::array();
    for (const auto& c : checks)
        arr.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}, {"seconds", c.seconds}});
    doc["checks"] = arr;
    return doc.dump(2);
}

RandomCase draw_random_case(RandomSource& rng, int max_n) {
    RandomCase c;
    c.p = kPGrid[rng.below(std::size(kPGrid))];
    c.n = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_n - 1)));
    const int upper = std::max(c.n + 1, std::min(12, static_cast<int>(std::floor(std::exp(std::sqrt(c.n))))));
    c.N = c.n + 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(upper - c.n)));
    const PExponent p(c.p);
    c.generators.resize(c.n, c.N);
    for (int i = 0; i < c.N; ++i) c.generators.col(i) = sample_cone(c.n, p, rng).coords();
    return c;
}

CheckResult check_sampler_moments(const VerifyOptions& opt) {
    return timed("sampler_moments", [&](CheckResult& out) {
        Tally tally;
        for (double pv : kPGrid) {
            RandomSource rng(opt.seed, 1000 + static_cast<std::uint64_t>(pv * 10));
            const PExponent p(pv);
            std::vector<double> draws(static_cast<std::size_t>(opt.samples));
            for (double& d : draws) d = sample_gg_scalar(p, rng);
            for (double q : kQGrid) {
                RunningStats st;
                for (double d : draws) st.add(std::pow(std::abs(d), q));
                const double expected = abs_moment_of_gg(pv, q);
                tally.record(std::abs(st.mean - expected) <= 4.0 * st.std_error(),
                             "p=" + fmt(pv) + " q=" + fmt(q) + " mean=" + fmt(st.mean) + " expected=" + fmt(expected));
            }
            RunningStats positive;
            for (double d : draws) positive.add(d > 0.0 ? 1.0 : 0.0);
            tally.record(std::abs(positive.mean - 0.5) <= 4.0 * positive.std_error(), "sign balance p=" + fmt(pv));
        }
        tally.finish(out);
    });
}

CheckResult check_radial_identity(const VerifyOptions& opt) {
    return timed("radial_identity", [&](CheckResult& out) {
        Tally tally;
        const int m = std::max(1000, opt.samples / 5);
        for (double pv : kPGrid) {
            const PExponent p(pv);
            for (int n = 2; n <= 8; ++n) {
                RandomSource rng(opt.seed, 2000 + static_cast<std::uint64_t>(pv * 10) * 16 + n);
                std::vector<double> norms(static_cast<std::size_t>(m));
                for (double& r : norms) r = lp_norm(sample_gg_vector(n, p, rng), p);
                for (double q : kQGrid) {
                    RunningStats st;
                    for (double r : norms) st.add(std::pow(r, q));
                    const double expected = gamma_ratio_moment(n, p, q);
                    tally.record(std::abs(st.mean - expected) <= 4.0 * st.std_error(),
                                 "p=" + fmt(pv) + " n=" + std::to_string(n) + " q=" + fmt(q));
                }
            }
        }
        tally.finish(out);
    });
}

CheckResult check_cone_normalization(const VerifyOptions& opt) {
    return timed("cone_normalization", [&](CheckResult& out) {
        Tally tally;
        for (double pv : kPGrid) {
            const PExponent p(pv);
            const int n = 6;
            RandomSource rng(opt.seed, 3000 + static_cast<std::uint64_t>(pv * 10));
            const RealVector theta = random_unit(n, rng);
            std::vector<double> radius, projection;
            long off_sphere = 0;
            for (int k = 0; k < opt.samples; ++k) {
                const RealVector g = sample_gg_vector(n, p, rng);
                const double r = lp_norm(g, p);
                if (r == 0.0) continue;
                const SpherePoint y = minkowski_map(g, p);
                if (std::abs(lp_norm(y.coords(), p) - 1.0) > 1e-12) ++off_sphere;
                radius.push_back(r);
                projection.push_back(y.coords().dot(theta));
            }
            tally.record(off_sphere == 0, "p=" + fmt(pv) + " points off the sphere: " + std::to_string(off_sphere));
            const double rho = correlation(radius, projection);
            tally.record(std::abs(rho) <= 4.0 / std::sqrt(static_cast<double>(radius.size())),
                         "p=" + fmt(pv) + " corr(||G||, <Y,theta>)=" + fmt(rho));
        }
        tally.finish(out);
    });
}

CheckResult check_pushforward_law(const VerifyOptions& opt) {
    return timed("pushforward_law", [&](CheckResult& out) {
        Tally tally;
        for (double pv : kPGrid) {
            const PExponent p(pv);
            const int n = 4;
            RandomSource rng(opt.seed, 4000 + static_cast<std::uint64_t>(pv * 10));
            const RealVector theta = random_unit(n, rng);
            for (double q : {1.0, 2.0}) {
                RunningStats mapped, direct;
                for (int k = 0; k < opt.samples / 2; ++k) {
                    RealVector u = sample_uniform_ball(n, p, rng);
                    if (lp_norm(u, p) == 0.0) continue;
                    mapped.add(std::pow(std::abs(minkowski_map(u, p).coords().dot(theta)), q));
                    direct.add(std::pow(std::abs(sample_cone(n, p, rng).coords().dot(theta)), q));
                }
                const double se = std::hypot(mapped.std_error(), direct.std_error());
                tally.record(std::abs(mapped.mean - direct.mean) <= 4.0 * se, "p=" + fmt(pv) + " q=" + fmt(q));
            }
        }
        tally.finish(out);
    });
}

CheckResult check_exact_goldens(const SecondMomentFn& second_moment) {
    return timed("exact_goldens", [&](CheckResult& out) {
        Tally tally;
        for (int n = 2; n <= 7; ++n) {
            const SymmetricPolytope cross = build_hull(Eigen::MatrixXd::Identity(n, n));
            const double vol = body_summary(cross, second_moment).volume;
            const double expected = std::pow(2.0, n) / std::tgamma(n + 1.0);
            tally.record(std::abs(vol / expected - 1.0) <= 1e-10, "cross-polytope volume n=" + std::to_string(n));
        }
        const SymmetricPolytope b12 = build_hull(Eigen::MatrixXd::Identity(2, 2));
        const BodySummary body = body_summary(b12, second_moment);
        tally.record((body.covariance - Eigen::MatrixXd::Identity(2, 2) / 6.0).cwiseAbs().maxCoeff() <= 1e-10,
                     "B_1^2 covariance");
        const double target = 1.0 / std::sqrt(12.0);
        bool l_ok = false;
        try {
            l_ok = std::abs(isotropic_constant(body, 2) - target) <= 1e-8;
        } catch (const DegeneracyError&) {
        }
        tally.record(l_ok, "isotropic constant of B_1^2");
        Eigen::MatrixXd cube(3, 4);
        cube << 1, 1, 1, -1, 1, 1, -1, 1, 1, -1, 1, 1;
        bool cube_ok = false;
        try {
            cube_ok = std::abs(isotropic_constant(body_summary(build_hull(cube), second_moment), 3) - target) <= 1e-8;
        } catch (const DegeneracyError&) {
        }
        tally.record(cube_ok, "isotropic constant of the cube");
        tally.finish(out);
    });
}

CheckResult check_subset_bound(const VerifyOptions& opt, const SecondMomentFn& second_moment) {
    return timed("subset_sup_bound", [&](CheckResult& out) {
        Tally tally;
        // Attained with equality on B_1^2.
        const SymmetricPolytope b12 = build_hull(Eigen::MatrixXd::Identity(2, 2));
        const double b12_trace = body_summary(b12, second_moment).covariance.trace();
        tally.record(std::abs(b12_trace - subset_sup_bound(b12)) <= 1e-12, "B_1^2 equality case, trace=" + fmt(b12_trace));
        RandomSource rng(opt.seed, 5000);
        for (int k = 0; k < opt.polytopes; ++k) {
            const RandomCase c = draw_random_case(rng);
            const SymmetricPolytope hull = build_hull(c.generators);
            const double trace = body_summary(hull, second_moment).covariance.trace();
            const double bound = subset_sup_bound(hull);
            tally.record(trace <= bound * (1.0 + 1e-12), "case " + std::to_string(k) + " trace=" + fmt(trace) + " bound=" + fmt(bound));
        }
        tally.finish(out);
    });
}

CheckResult check_facet_l1_bound(const VerifyOptions& opt) {
    return timed("facet_l1_bound", [&](CheckResult& out) {
        Tally tally;
        RandomSource rng(opt.seed, 6000);
        for (int k = 0; k < opt.polytopes; ++k) {
            const RandomCase c = draw_random_case(rng);
            const SymmetricPolytope hull = build_hull(c.generators);
            const McEstimate l1 = mc_integral_l1(hull, rng, opt.mc_samples);
            const double bound = facet_l1_bound(hull);
            tally.record(l1.estimate <= bound + 3.0 * l1.std_error,
                         "case " + std::to_string(k) + " l1=" + fmt(l1.estimate) + " bound=" + fmt(bound));
        }
        tally.finish(out);
    });
}

CheckResult check_coupling(const VerifyOptions& opt) {
    return timed("coupling", [&](CheckResult& out) {
        Tally tally;
        RandomSource rng(opt.seed, 7000);
        for (int k = 0; k < opt.polytopes; ++k) {
            const double pv = kPGrid[rng.below(std::size(kPGrid))];
            const int n = 2 + static_cast<int>(rng.below(4));
            const int N = n + 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n + 1)));
            const CouplingResult res = verify_coupling(PExponent(pv), n, N, rng);
            tally.record(res.ok, "case " + std::to_string(k) + " vol(K_N)=" + fmt(res.cone_body.volume) +
                                     " vol(ball hull)=" + fmt(res.ball_body.volume));
        }
        tally.finish(out);
    });
}

CheckResult check_gk_equivalence(const VerifyOptions& opt) {
    return timed("gk_equivalence", [&](CheckResult& out) {
        Tally tally;
        const EquivalenceBand band(opt.band);
        const int m = std::max(1000, opt.samples / 5);
        for (double pv : {1.0, 1.5, 2.0, 3.0}) {
            const PExponent p(pv);
            for (int n : {4, 8}) {
                RandomSource rng(opt.seed, 8000 + static_cast<std::uint64_t>(pv * 10) * 16 + n);
                for (int trial = 0; trial < 3; ++trial) {
                    RealVector a(n);
                    for (int i = 0; i < n; ++i) a(i) = rng.normal();
                    std::vector<double> dots(static_cast<std::size_t>(m));
                    for (double& d : dots) d = a.dot(sample_gg_vector(n, p, rng));
                    for (int q : {2, 4, 8}) {
                        const double ratio = empirical_lq(dots, q) / gk_equiv(a, p, q);
                        tally.record(band.contains(ratio), "p=" + fmt(pv) + " n=" + std::to_string(n) +
                                                               " q=" + std::to_string(q) + " ratio=" + fmt(ratio));
                    }
                }
            }
        }
        tally.finish(out);
    });
}

CheckResult check_cone_moment_equivalence(const VerifyOptions& opt) {
    return timed("cone_moment_equivalence", [&](CheckResult& out) {
        Tally tally;
        const EquivalenceBand band(opt.band);
        const int m = std::max(1000, opt.samples / 5);
        for (double pv : {1.0, 1.5, 2.0, 3.0}) {
            const PExponent p(pv);
            for (int n : {4, 8}) {
                RandomSource rng(opt.seed, 9000 + static_cast<std::uint64_t>(pv * 10) * 16 + n);
                for (int trial = 0; trial < 3; ++trial) {
                    RealVector theta(n);
                    for (int i = 0; i < n; ++i) theta(i) = rng.normal();
                    std::vector<double> dots(static_cast<std::size_t>(m));
                    for (double& d : dots) d = theta.dot(sample_cone(n, p, rng).coords());
                    for (int q : {2, 4, 8}) {
                        const double ratio = empirical_lq(dots, q) / cone_moment_estimate({n, p, double(q), theta});
                        tally.record(band.contains(ratio), "p=" + fmt(pv) + " n=" + std::to_string(n) +
                                                               " q=" + std::to_string(q) + " ratio=" + fmt(ratio));
                    }
                }
            }
        }
        for (int n = 2; n <= 10; ++n) {
            RealVector e1 = RealVector::Zero(n);
            e1(0) = 1.0;
            const double ratio = (1.0 / std::sqrt(n)) / cone_moment_estimate({n, PExponent(2.0), 2.0, e1});
            tally.record(band.contains(ratio), "exact sphere moment n=" + std::to_string(n) + " ratio=" + fmt(ratio));
        }
        tally.finish(out);
    });
}

CheckResult check_psi2_uniformity(const VerifyOptions& opt) {
    return timed("psi2_uniformity", [&](CheckResult& out) {
        Tally tally;
        const int qmax = default_psi2_qmax(static_cast<std::size_t>(opt.samples));
        for (double pv : {1.0, 1.5, 2.0, 3.0, 5.0}) {
            const PExponent p(pv);
            double lo = INFINITY, hi = 0.0;
            for (int n = 2; n <= 10; ++n) {
                RandomSource rng(opt.seed, 10000 + static_cast<std::uint64_t>(pv * 10) * 16 + n);
                RealVector theta(n);
                double scale;
                if (pv >= 2.0) {
                    theta = random_unit(n, rng);
                    scale = std::pow(n, 1.0 / pv);
                } else {
                    for (int i = 0; i < n; ++i) theta(i) = rng.sign();
                    scale = 1.0 / std::pow(n, 0.5 - 1.0 / pv);
                }
                std::vector<double> s(static_cast<std::size_t>(opt.samples));
                for (double& v : s) v = scale * theta.dot(sample_cone(n, p, rng).coords());
                const double est = psi2_estimate(s, qmax);
                lo = std::min(lo, est);
                hi = std::max(hi, est);
            }
            tally.record(hi / lo <= 3.0, "p=" + fmt(pv) + " spread=" + fmt(hi / lo));
        }
        tally.finish(out);
    });
}

CheckResult check_bernstein_tail(const VerifyOptions& opt) {
    return timed("bernstein_tail", [&](CheckResult& out) {
        Tally tally;
        // Rademacher summands: E exp(xi^2 / c^2) = 2 exactly at c = 1/sqrt(ln 2).
        const double c = 1.0 / std::sqrt(std::numbers::ln2);
        RandomSource rng(opt.seed, 11000);
        const int reps = std::max(10000, opt.samples / 5);
        for (int N : {20, 100}) {
            std::vector<double> sums(static_cast<std::size_t>(reps));
            for (double& s : sums) {
                s = 0.0;
                for (int i = 0; i < N; ++i) s += rng.sign();
            }
            for (double eps : {0.1, 0.2, 0.3, 0.4, 0.5}) {
                long exceed = 0;
                for (double s : sums)
                    if (std::abs(s) > eps * N) ++exceed;
                const double freq = static_cast<double>(exceed) / reps;
                const double bound = bernstein_bound(eps, N, c);
                const double se = std::sqrt(std::max(bound, 1e-12) * (1.0 - std::min(bound, 1.0)) / reps);
                tally.record(freq <= bound + 3.0 * se, "N=" + std::to_string(N) + " eps=" + fmt(eps) +
                                                           " freq=" + fmt(freq) + " bound=" + fmt(bound));
            }
        }
        tally.finish(out);
    });
}

CheckResult check_determinism(const VerifyOptions& opt) {
    return timed("determinism", [&](CheckResult& out) {
        ExperimentConfig cfg;
        cfg.p_grid = {1.0, 2.0};
        cfg.n_grid = {3, 4};
        cfg.n_rule = PointCountRule::from_tag("2n");
        cfg.trials = 3;
        cfg.master_seed = opt.seed;
        cfg.mc_samples = 1000;
        std::string runs[2];
        for (int w = 0; w < 2; ++w) {
            cfg.parallel_workers = w == 0 ? 1 : std::max(2, opt.workers);
            std::ostringstream os;
            write_records_csv(os, run_grid(cfg).records);
            runs[w] = os.str();
        }
        out.passed = runs[0] == runs[1];
        out.detail = out.passed ? "CSV identical across worker counts" : "CSV differs across worker counts";
    });
}

VerifyReport verify_suite(const VerifyOptions& opt) {
    VerifyReport report;
    report.checks.push_back(check_sampler_moments(opt));
    report.checks.push_back(check_radial_identity(opt));
    report.checks.push_back(check_cone_normalization(opt));
    report.checks.push_back(check_pushforward_law(opt));
    report.checks.push_back(check_exact_goldens());
    report.checks.push_back(check_subset_bound(opt));
    report.checks.push_back(check_facet_l1_bound(opt));
    report.checks.push_back(check_coupling(opt));
    report.checks.push_back(check_gk_equivalence(opt));
    report.checks.push_back(check_cone_moment_equivalence(opt));
    report.checks.push_back(check_psi2_uniformity(opt));
    report.checks.push_back(check_bernstein_tail(opt));
    report.checks.push_back(check_determinism(opt));
    return report;
}

}  // namespace lpoly
