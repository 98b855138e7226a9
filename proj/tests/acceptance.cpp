// Acceptance battery: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "lpoly/analytic_moments.hpp"
#include "lpoly/harness.hpp"
#include "lpoly/verify.hpp"
#include "oracles.hpp"

using namespace lpoly;

namespace {

constexpr std::uint64_t kSeed = 20240611;
const std::vector<double> kPGrid{1.0, 1.5, 2.0, 3.0, 5.0};
const std::vector<double> kQGrid{1.0, 2.0, 4.0};

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Largest |mean - target| / SE over the checks in one criterion.
struct ZTracker {
    double worst = 0.0;
    int checks = 0;
    int over = 0;
    void add(double z, double limit) {
        ++checks;
        worst = std::max(worst, z);
        if (!(z <= limit)) ++over;
    }
};

Outcome sampler_moments() {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    ZTracker z;
    const int m = 100000;
    for (double pv : kPGrid) {
        RandomSource rng(kSeed, 100 + static_cast<std::uint64_t>(pv * 10));
        std::vector<double> g(m);
        for (double& x : g) x = std::abs(sample_gg_scalar(PExponent(pv), rng));
        for (double q : kQGrid) {
            std::vector<double> powq(m);
            for (int i = 0; i < m; ++i) powq[i] = std::pow(g[i], q);
            const auto r = oracle::mean_se(powq);
            z.add(std::abs(r.mean - oracle::gg_abs_moment(pv, q)) / r.se, 4.0);
        }
    }
    const double secs = seconds_since(t0);
    out.pass = z.over == 0 && secs < 10.0;
    out.detail << z.checks << " cells, max z " << z.worst << ", " << secs << " s";
    return out;
}

Outcome radial_identity() {
    Outcome out;
    ZTracker z;
    const int m = 100000;
    for (double pv : kPGrid)
        for (int n = 2; n <= 8; ++n) {
            RandomSource rng(kSeed, 200 + static_cast<std::uint64_t>(pv * 10) * 16 + n);
            std::vector<double> r(m);
            for (double& x : r) x = lp_norm(sample_gg_vector(n, PExponent(pv), rng), PExponent(pv));
            for (double q : kQGrid) {
                std::vector<double> powq(m);
                for (int i = 0; i < m; ++i) powq[i] = std::pow(r[i], q);
                const auto s = oracle::mean_se(powq);
                z.add(std::abs(s.mean - gamma_ratio_moment(n, PExponent(pv), q)) / s.se, 4.0);
            }
        }
    out.pass = z.over == 0;
    out.detail << z.checks << " cells, max z " << z.worst;
    return out;
}

Outcome cone_normalization() {
    Outcome out;
    const int m = 1000000;
    double worst_dev = 0.0, worst_corr = 0.0;
    long bad = 0;
    for (double pv : kPGrid) {
        const PExponent p(pv);
        RandomSource rng(kSeed, 300 + static_cast<std::uint64_t>(pv * 10));
        for (int k = 0; k < m; ++k) {
            const SpherePoint y = sample_cone(2 + k % 7, p, rng);
            const double dev = std::abs(lp_norm(y.coords(), p) - 1.0);
            worst_dev = std::max(worst_dev, dev);
            if (dev > 1e-12) ++bad;
        }
        const int n = 4;
        RealVector theta(n);
        for (int i = 0; i < n; ++i) theta(i) = rng.normal();
        theta.normalize();
        std::vector<double> radius(m), proj(m);
        for (int k = 0; k < m; ++k) {
            const RealVector g = sample_gg_vector(n, p, rng);
            radius[k] = lp_norm(g, p);
            proj[k] = (g / radius[k]).dot(theta);
        }
        worst_corr = std::max(worst_corr, std::abs(oracle::correlation(radius, proj)));
    }
    out.pass = bad == 0 && worst_corr <= 4.0 / std::sqrt(1.0 * m);
    out.detail << bad << " of " << kPGrid.size() * m << " draws off the sphere (max dev " << worst_dev
               << "), max |corr| " << worst_corr << " vs " << 4.0 / std::sqrt(1.0 * m);
    return out;
}

Outcome exact_goldens() {
    Outcome out;
    double worst_vol = 0.0;
    for (int n = 2; n <= 7; ++n) {
        const BodySummary b = body_summary(build_hull(Eigen::MatrixXd::Identity(n, n)));
        worst_vol = std::max(worst_vol, std::abs(b.volume * std::tgamma(n + 1.0) / std::pow(2.0, n) - 1.0));
    }
    const BodySummary cross = body_summary(build_hull(Eigen::MatrixXd::Identity(2, 2)));
    const double cov_err = (cross.covariance - Eigen::Matrix2d::Identity() / 6).cwiseAbs().maxCoeff();
    Eigen::MatrixXd cube(3, 4);
    cube << 1, 1, 1, -1, 1, 1, -1, 1, 1, -1, 1, 1;
    const double target = 1.0 / std::sqrt(12.0);
    const double l_cube = std::abs(isotropic_constant(body_summary(build_hull(cube)), 3) - target);
    const double l_cross = std::abs(isotropic_constant(cross, 2) - target);
    out.pass = worst_vol <= 1e-10 && cov_err <= 1e-10 && l_cube <= 1e-8 && l_cross <= 1e-8;
    out.detail << "vol rel err " << worst_vol << ", cov err " << cov_err << ", L errs " << l_cube << " / " << l_cross;
    return out;
}

Outcome brute_force_oracle() {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    RandomSource rng(kSeed, 500);
    ZTracker z, confirm;
    const int m = 200000;
    for (int t = 0; t < 50; ++t) {
        const int n = 2 + t % 2;
        const int N = n + 1 + static_cast<int>(rng.below(4));
        const PExponent p(kPGrid[rng.below(kPGrid.size())]);
        Eigen::MatrixXd g(n, N);
        for (int j = 0; j < N; ++j) g.col(j) = sample_cone(n, p, rng).coords();
        const BodySummary body = body_summary(build_hull(g));
        // Flat list: volume first, then the upper triangle of the covariance.
        const auto deviations = [&](const oracle::RejectionSummary& ref) {
            std::vector<double> zs{std::abs(body.volume - ref.volume.mean) / ref.volume.se};
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j) zs.push_back(std::abs(body.covariance(i, j) - ref.cov_mean(i, j)) / ref.cov_se(i, j));
            return zs;
        };
        const std::vector<double> first = deviations(oracle::rejection_summary(g, rng, m));
        for (double v : first) z.add(v, 3.0);
        // A comparison beyond 3 SE is re-run once on an independent stream
        // with 16x the samples (SE / 4). Bias survives this; noise does not.
        if (std::any_of(first.begin(), first.end(), [](double v) { return v > 3.0; })) {
            RandomSource fresh(kSeed, 550 + static_cast<std::uint64_t>(t));
            const std::vector<double> again = deviations(oracle::rejection_summary(g, fresh, 16 * m));
            for (std::size_t k = 0; k < first.size(); ++k)
                if (first[k] > 3.0) confirm.add(again[k], 3.0);
        }
    }
    const double secs = seconds_since(t0);
    out.pass = confirm.over == 0 && secs < 60.0;
    out.detail << z.checks << " comparisons on 50 polytopes, " << z.over << " beyond 3 SE (max z " << z.worst
               << "; about " << z.checks * 0.0027 << " expected by chance), " << confirm.over << " of " << confirm.checks
               << " confirmed at 16x samples (max z " << confirm.worst << "), " << secs << " s";
    return out;
}

Outcome inequality_suites() {
    Outcome out;
    RandomSource rng(kSeed, 600);
    int subset_fail = 0, facet_fail = 0, coupling_fail = 0, failed_trials = 0, facet_skipped = 0;
    for (int t = 0; t < 500; ++t) {
        const RandomCase rc = draw_random_case(rng, 6);
        RandomSource trial_rng = rng.split(static_cast<std::uint64_t>(t));
        const TrialRecord rec = run_trial(PExponent(rc.p), rc.n, rc.N, trial_rng, 4000);
        if (!rec.ok) {
            ++failed_trials;
            continue;
        }
        if (!rec.subset_bound || !rec.subset_inequality_holds()) ++subset_fail;
        if (!rec.facet_bound)
            ++facet_skipped;
        else if (!rec.facet_inequality_holds())
            ++facet_fail;
        const CouplingResult c = verify_coupling(PExponent(rc.p), rc.n, rc.N, trial_rng);
        if (!rec.coupling_ok || !c.inclusion_ok || !c.volume_ok) ++coupling_fail;
    }
    out.pass = subset_fail == 0 && facet_fail == 0 && coupling_fail == 0 && failed_trials == 0 && facet_skipped == 0;
    out.detail << "500 trials: subset fails " << subset_fail << ", facet fails " << facet_fail << " (skipped "
               << facet_skipped << "), coupling fails " << coupling_fail << ", degenerate " << failed_trials;
    return out;
}

Outcome moment_equivalences() {
    Outcome out;
    VerifyOptions opt;
    opt.seed = kSeed;
    opt.samples = 500000;  // m = 10^5 per cell
    const CheckResult gk = check_gk_equivalence(opt);
    const CheckResult cone = check_cone_moment_equivalence(opt);
    out.pass = gk.passed && cone.passed;
    out.detail << "gk: " << gk.detail << "; cone: " << cone.detail;
    return out;
}

Outcome psi2_uniformity() {
    Outcome out;
    VerifyOptions opt;
    opt.seed = kSeed;
    opt.samples = 100000;
    const CheckResult r = check_psi2_uniformity(opt);
    out.pass = r.passed;
    out.detail << r.detail;
    return out;
}

Outcome desk_scale_stability() {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg;
    cfg.p_grid = {1.0, 1.5, 2.0, 3.0};
    cfg.n_grid = {4, 5, 6, 7, 8};
    cfg.n_rule = PointCountRule::from_tag("cap_exp_sqrt_n");
    cfg.trials = 200;
    cfg.master_seed = kSeed;
    cfg.mc_samples = 1000;
    cfg.parallel_workers = 1;
    const GridResult result = run_grid(cfg);
    const double secs = seconds_since(t0);

    double l_lo = INFINITY, l_hi = 0, v_lo = INFINITY, v_hi = 0, m_lo = INFINITY, m_hi = 0;
    int failed = 0;
    for (const ReportRow& row : result.report) {
        failed += row.failed;
        l_lo = std::min(l_lo, row.L_max);
        l_hi = std::max(l_hi, row.L_max);
        v_lo = std::min(v_lo, row.min_volume_stat);
        v_hi = std::max(v_hi, row.min_volume_stat);
        if (row.p >= 2.0) {
            m_lo = std::min(m_lo, row.max_moment_stat);
            m_hi = std::max(m_hi, row.max_moment_stat);
        }
    }
    const double l_spread = l_hi / l_lo, v_spread = v_hi / v_lo, m_spread = m_hi / m_lo;
    out.pass = result.report.size() == 20 && failed == 0 && l_spread <= 2.0 && v_spread <= 3.0 && m_spread <= 3.0 &&
               v_lo > 0.0 && secs < 900.0;
    out.detail << result.report.size() << " cells, L_max spread " << l_spread << " [" << l_lo << ", " << l_hi
               << "], volume stat spread " << v_spread << ", moment stat spread " << m_spread << ", " << secs << " s";
    std::ostringstream table;
    write_report_csv(table, result.report);
    std::fprintf(stderr, "%s", table.str().c_str());
    return out;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome cli_determinism() {
    Outcome out;
    const auto dir = std::filesystem::temp_directory_path() / "lpoly_acceptance";
    std::filesystem::create_directories(dir);
    const auto config = dir / "config.json";
    {
        std::ofstream c(config);
        c << R"({"p_grid": [1.0, 1.5, 2.0, 3.0], "n_grid": [2, 3, 4, 5], "N_rule": "2n", "trials": 5,)"
          << R"( "master_seed": 99, "mc_samples": 2000, "output_format": "csv"})";
    }
    std::vector<std::string> outputs;
    int status = 0;
    for (int workers : {1, 4}) {
        const auto path = dir / ("run_w" + std::to_string(workers) + ".csv");
        const std::string cmd = std::string(LPOLY_CLI_PATH) + " experiment --config " + config.string() +
                                " --workers " + std::to_string(workers) + " --out " + path.string() + " 2>/dev/null";
        status |= std::system(cmd.c_str());
        outputs.push_back(slurp(path));
    }
    std::filesystem::remove_all(dir);
    out.pass = status == 0 && !outputs[0].empty() && outputs[0] == outputs[1];
    out.detail << "workers 1 vs 4: " << outputs[0].size() << " and " << outputs[1].size() << " bytes, "
               << (outputs[0] == outputs[1] ? "identical" : "different");
    return out;
}

}  // namespace

// Optional arguments select criteria by number; default runs all.
int main(int argc, char** argv) {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"sampler moments", sampler_moments},
        {"radial identity", radial_identity},
        {"cone normalization and independence", cone_normalization},
        {"exact geometry goldens", exact_goldens},
        {"brute-force oracle equivalence", brute_force_oracle},
        {"exact inequality suites", inequality_suites},
        {"moment equivalences", moment_equivalences},
        {"psi2 uniformity", psi2_uniformity},
        {"desk-scale stability", desk_scale_stability},
        {"cli determinism", cli_determinism},
    };
    int failures = 0;
    std::vector<bool> selected(criteria.size(), argc <= 1);
    for (int a = 1; a < argc; ++a) {
        const int k = std::atoi(argv[a]);
        if (k >= 1 && k <= static_cast<int>(criteria.size())) selected[static_cast<std::size_t>(k - 1)] = true;
    }
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (!selected[i]) continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << "exception: " << e.what();
        }
        if (!o.pass) ++failures;
        std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.str().c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
