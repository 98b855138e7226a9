#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lpoly/polytope.hpp"

namespace lpoly {

struct VerifyOptions {
    std::uint64_t seed = 20240611;
    /// Draws per distributional cell.
    int samples = 100000;
    /// Random polytopes per inequality suite.
    int polytopes = 100;
    int mc_samples = 4000;
    double band = 10.0;
    int workers = 2;
};

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct VerifyReport {
    std::vector<CheckResult> checks;

    bool all_passed() const;
    std::string to_json() const;
};

// Individual checks. Every check is deterministic given the options.
CheckResult check_sampler_moments(const VerifyOptions& opt);
CheckResult check_radial_identity(const VerifyOptions& opt);
CheckResult check_cone_normalization(const VerifyOptions& opt);
CheckResult check_pushforward_law(const VerifyOptions& opt);
CheckResult check_exact_goldens(const SecondMomentFn& second_moment = simplex_second_moment);
CheckResult check_subset_bound(const VerifyOptions& opt, const SecondMomentFn& second_moment = simplex_second_moment);
CheckResult check_facet_l1_bound(const VerifyOptions& opt);
CheckResult check_coupling(const VerifyOptions& opt);
CheckResult check_gk_equivalence(const VerifyOptions& opt);
CheckResult check_cone_moment_equivalence(const VerifyOptions& opt);
CheckResult check_psi2_uniformity(const VerifyOptions& opt);
CheckResult check_bernstein_tail(const VerifyOptions& opt);
CheckResult check_determinism(const VerifyOptions& opt);

/// Runs every check above, continuing past failures.
VerifyReport verify_suite(const VerifyOptions& opt);

/// Generators of a random polytope for the inequality suites: p from
/// {1, 1.5, 2, 3, 5}, n in [2, max_n], N in [n + 1, max(n + 1, min(exp(sqrt n), 12))].
struct RandomCase {
    double p;
    int n;
    int N;
    Eigen::MatrixXd generators;
};
RandomCase draw_random_case(RandomSource& rng, int max_n = 5);

}  // namespace lpoly
