#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lpoly/harness.hpp"
#include "lpoly/verify.hpp"

using namespace lpoly;

namespace {

std::string records_csv(const GridResult& r) {
    std::ostringstream out;
    write_records_csv(out, r.records);
    return out.str();
}

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.p_grid = {1.0, 2.0, 3.0};
    cfg.n_grid = {2, 3};
    cfg.n_rule = PointCountRule::from_tag("2n");
    cfg.trials = 3;
    cfg.master_seed = 77;
    cfg.mc_samples = 1000;
    return cfg;
}

}  // namespace

TEST_SUITE("experiment_harness") {

TEST_CASE("regime check") {
    CHECK(check_regime(9, 20));
    CHECK_FALSE(check_regime(9, 21));
    CHECK_FALSE(check_regime(4, 4));
    CHECK(check_regime(4, 5));
}

TEST_CASE("point count rules") {
    CHECK(PointCountRule::from_tag("n+1").counts(5) == std::vector<int>{6});
    CHECK(PointCountRule::from_tag("2n").counts(5) == std::vector<int>{10});
    CHECK(PointCountRule::from_tag("cap_exp_sqrt_n").counts(4) == std::vector<int>{7});
    CHECK(PointCountRule::from_tag("cap_exp_sqrt_n").counts(2) == std::vector<int>{4});
    CHECK(PointCountRule::explicit_list({4, 9}).counts(3) == std::vector<int>{4, 9});
    CHECK_THROWS(PointCountRule::from_tag("3n"));
}

TEST_CASE("trial stream hash is stable") {
    CHECK(trial_stream(2.0, 3, 4, 0) == trial_stream(2.0, 3, 4, 0));
    CHECK(trial_stream(2.0, 3, 4, 0) != trial_stream(2.0, 3, 4, 1));
    CHECK(trial_stream(2.0, 3, 4, 0) != trial_stream(2.0000000000000004, 3, 4, 0));
}

TEST_CASE("single trial is deterministic and satisfies the inequalities") {
    RandomSource a(5, trial_stream(2.0, 2, 3, 0)), b(5, trial_stream(2.0, 2, 3, 0));
    const TrialRecord r1 = run_trial(PExponent(2), 2, 3, a, 2000);
    const TrialRecord r2 = run_trial(PExponent(2), 2, 3, b, 2000);
    std::ostringstream s1, s2;
    write_records_csv(s1, {r1});
    write_records_csv(s2, {r2});
    CHECK(s1.str() == s2.str());
    REQUIRE(r1.ok);
    CHECK(r1.subset_inequality_holds());
    CHECK(r1.facet_inequality_holds());
    CHECK(r1.coupling_ok);
    CHECK(r1.L >= euclidean_ball_isotropic_constant(2));
}

TEST_CASE("coupling") {
    RandomSource rng(6, 0);
    for (double p : {1.0, 1.5, 3.0})
        for (int t = 0; t < 10; ++t) {
            const CouplingResult c = verify_coupling(PExponent(p), 3, 6, rng);
            CHECK(c.ok);
            CHECK(c.inclusion_ok);
            CHECK(c.cone_body.volume >= c.ball_body.volume);
        }
    // Points already on the sphere: both bodies coincide.
    const std::vector<RealVector> on_sphere{Eigen::Vector2d(0.6, 0.8), Eigen::Vector2d(-0.8, 0.6)};
    const CouplingResult same = couple_points(on_sphere, PExponent(2));
    CHECK(same.ok);
    CHECK(std::abs(same.cone_body.volume - same.ball_body.volume) <= 1e-10 * same.ball_body.volume);
}

TEST_CASE("grid output is independent of worker count") {
    ExperimentConfig cfg = small_config();
    cfg.parallel_workers = 1;
    const GridResult one = run_grid(cfg);
    cfg.parallel_workers = 3;
    const GridResult three = run_grid(cfg);
    CHECK(one.records.size() == 18);
    CHECK(records_csv(one) == records_csv(three));
    CHECK(one.report.size() == 6);
    for (const ReportRow& row : one.report) {
        CHECK(row.count == 3);
        CHECK(row.subset_pass == row.subset_checked);
        CHECK(row.facet_pass == row.facet_checked);
        CHECK(row.coupling_pass == row.count);
    }
}

TEST_CASE("adding grid cells does not reshuffle existing trials") {
    ExperimentConfig cfg = small_config();
    cfg.p_grid = {2.0};
    const GridResult base = run_grid(cfg);
    cfg.p_grid = {1.0, 2.0};
    const GridResult wider = run_grid(cfg);
    std::ostringstream a, b;
    write_records_csv(a, base.records);
    std::vector<TrialRecord> subset;
    for (const auto& r : wider.records)
        if (r.p == 2.0) subset.push_back(r);
    write_records_csv(b, subset);
    CHECK(a.str() == b.str());
}

TEST_CASE("csv layout") {
    ExperimentConfig cfg = small_config();
    cfg.p_grid = {2.0};
    cfg.n_grid = {2};
    cfg.trials = 1;
    const std::string csv = records_csv(run_grid(cfg));
    const std::string header = csv.substr(0, csv.find('\n'));
    CHECK(header.rfind("schema_version,p,n,N,trial_index,seed_stream,status,failure,L,", 0) == 0);
    CHECK(header.find("wall_time_ms") == std::string::npos);
    const std::string row = csv.substr(csv.find('\n') + 1);
    CHECK(row.rfind("1,2,2,4,0,", 0) == 0);
    CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("empty grid gives empty output") {
    ExperimentConfig cfg;
    cfg.mc_samples = 1000;
    const GridResult r = run_grid(cfg);
    CHECK(r.records.empty());
    CHECK(r.report.empty());
}

TEST_CASE("config parsing") {
    const ExperimentConfig cfg = parse_config(R"({"p_grid": [1, 2.5], "n_grid": [3, 4], "N_rule": "2n", "trials": 4,
        "master_seed": 9, "mc_samples": 2000, "band": 8, "parallel_workers": 2, "output_format": "json"})");
    CHECK(cfg.p_grid == std::vector<double>{1.0, 2.5});
    CHECK(cfg.n_rule.kind() == PointCountRule::Kind::TwoN);
    CHECK(cfg.output_format == OutputFormat::Json);
    CHECK(parse_config(R"({"N_rule": [5, 6]})").n_rule.counts(3) == std::vector<int>{5, 6});
    CHECK_THROWS_WITH_AS(parse_config(R"({"trails": 3})"), doctest::Contains("trails"), std::invalid_argument);
    CHECK_THROWS(parse_config("[1, 2]"));
    CHECK_THROWS(parse_config(R"({"output_format": "xml"})"));
    CHECK_THROWS(load_config("/nonexistent/config.json"));

    ExperimentConfig bad;
    bad.n_grid = {9};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad.n_grid = {3};
    bad.mc_samples = 10;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("write_outputs creates sidecars and names the path on failure") {
    ExperimentConfig cfg = small_config();
    cfg.p_grid = {2.0};
    cfg.n_grid = {2};
    cfg.trials = 1;
    const GridResult r = run_grid(cfg);
    const auto dir = std::filesystem::temp_directory_path() / "lpoly_harness_test";
    std::filesystem::create_directories(dir);
    cfg.output_path = (dir / "run.csv").string();
    write_outputs(cfg, r);
    CHECK(std::filesystem::exists(dir / "run.csv"));
    CHECK(std::filesystem::exists(dir / "run.csv.report.csv"));
    CHECK(std::filesystem::exists(dir / "run.csv.timing.csv"));
    cfg.output_format = OutputFormat::Json;
    cfg.output_path = (dir / "run.json").string();
    write_outputs(cfg, r);
    std::ifstream in(dir / "run.json");
    std::string first;
    in >> first;
    CHECK(first == "[");
    std::filesystem::remove_all(dir);

    cfg.output_path = "/nonexistent_dir/out.csv";
    CHECK_THROWS_WITH(write_outputs(cfg, r), doctest::Contains("/nonexistent_dir/out.csv"));
}

TEST_CASE("verify suite mutation sanity") {
    VerifyOptions opt;
    opt.polytopes = 20;
    CHECK(check_subset_bound(opt).passed);
    CHECK(check_exact_goldens().passed);
    const SecondMomentFn wrong = [](const Simplex& s) {
        const Eigen::VectorXd sum = s.verts.rowwise().sum();
        const double scale = simplex_volume(s) / ((s.verts.rows() + 1.0) * (s.verts.rows() + 2.0));
        return Eigen::MatrixXd(scale * (s.verts * s.verts.transpose() - sum * sum.transpose()));
    };
    CHECK_FALSE(check_subset_bound(opt, wrong).passed);
    CHECK_FALSE(check_exact_goldens(wrong).passed);
}

TEST_CASE("determinism check") {
    VerifyOptions opt;
    CHECK(check_determinism(opt).passed);
    CHECK(check_coupling(opt).passed);
}

}
