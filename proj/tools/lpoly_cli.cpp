// lpoly: random l_p-sphere polytopes from the command line.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lpoly/analytic_moments.hpp"
#include "lpoly/harness.hpp"
#include "lpoly/verify.hpp"

namespace {

using namespace lpoly;

// One generator per line, whitespace-separated; blank lines and '#' comments skipped.
Eigen::MatrixXd read_vertex_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open vertex file " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        std::vector<double> row;
        std::string tok;
        while (ls >> tok) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(tok, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != tok.size()) throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad number '" + tok + "'");
            row.push_back(v);
        }
        if (row.empty()) continue;
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected " +
                                     std::to_string(rows.front().size()) + " coordinates");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("vertex file " + path + " has no points");
    Eigen::MatrixXd gens(static_cast<Eigen::Index>(rows.front().size()), static_cast<Eigen::Index>(rows.size()));
    for (std::size_t j = 0; j < rows.size(); ++j)
        for (std::size_t i = 0; i < rows[j].size(); ++i) gens(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[j][i];
    return gens;
}

void print_point(std::ostream& out, const RealVector& x) {
    for (Eigen::Index i = 0; i < x.size(); ++i) out << (i ? " " : "") << format_double(x(i));
    out << '\n';
}

RealVector parse_theta(const std::string& text, int n) {
    RealVector theta(n);
    std::stringstream ss(text);
    std::string tok;
    int i = 0;
    while (std::getline(ss, tok, ',')) {
        if (i >= n) throw std::invalid_argument("--theta has more than n entries");
        theta(i++) = std::stod(tok);
    }
    if (i != n) throw std::invalid_argument("--theta needs exactly n comma-separated entries");
    return theta;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Random polytopes with vertices on l_p spheres"};
    app.require_subcommand(1);

    // Shared flag storage; each subcommand registers the ones it uses.
    std::vector<double> p_values{2.0};
    std::vector<int> n_values{3};
    std::vector<int> num_points;
    int trials = 1;
    std::uint64_t seed = 1;
    int mc_samples = 10000;
    double band = 10.0;
    int workers = 1;
    std::string out_path;
    std::string format = "csv";
    std::string config_path;

    auto* sample = app.add_subcommand("sample", "Emit cone, ball or generalized-Gaussian draws, one point per line");
    std::string kind = "cone";
    sample->add_option("--kind", kind, "cone | ball | gg")->check(CLI::IsMember({"cone", "ball", "gg"}));
    double sample_p = 2.0;
    int sample_n = 3, sample_count = 10;
    sample->add_option("--p", sample_p, "exponent p >= 1");
    sample->add_option("--n", sample_n, "dimension");
    sample->add_option("--num-points", sample_count, "number of draws");
    sample->add_option("--seed", seed, "master seed");

    auto* hull = app.add_subcommand("hull", "Vertex file -> facet and volume report");
    std::string hull_file;
    hull->add_option("file", hull_file, "generator file")->required()->check(CLI::ExistingFile);
    hull->add_option("--format", format, "text | json")->check(CLI::IsMember({"text", "json", "csv"}));

    auto* iso = app.add_subcommand("isoconst", "Vertex file -> isotropic constant");
    std::string iso_file;
    iso->add_option("file", iso_file, "generator file")->required()->check(CLI::ExistingFile);

    auto* moments = app.add_subcommand("moments", "Closed-form moment oracles for given n, p, q, theta");
    double mom_p = 2.0, mom_q = 2.0;
    int mom_n = 3;
    std::string theta_text;
    moments->add_option("--p", mom_p, "exponent p >= 1");
    moments->add_option("--n", mom_n, "dimension");
    moments->add_option("--q", mom_q, "moment order");
    moments->add_option("--theta", theta_text, "comma-separated direction (default e_1)");

    auto* experiment = app.add_subcommand("experiment", "Run a (p, n, N) grid of trials");
    experiment->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    experiment->add_option("--p", p_values, "p grid");
    experiment->add_option("--n", n_values, "n grid");
    experiment->add_option("--num-points", num_points, "explicit N values (default n+1)");
    experiment->add_option("--trials", trials, "trials per cell");
    experiment->add_option("--seed", seed, "master seed");
    experiment->add_option("--mc-samples", mc_samples, "Monte Carlo samples for the l1 mean");
    experiment->add_option("--band", band, "equivalence band C");
    experiment->add_option("--workers", workers, "worker threads");
    experiment->add_option("--out", out_path, "output path");
    experiment->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));

    auto* verify = app.add_subcommand("verify", "Run the invariant battery; nonzero exit on failure");
    VerifyOptions vopt;
    verify->add_option("--seed", vopt.seed, "master seed");
    verify->add_option("--mc-samples", vopt.samples, "draws per distributional cell");
    verify->add_option("--trials", vopt.polytopes, "random polytopes per inequality suite");
    verify->add_option("--band", vopt.band, "equivalence band C");
    verify->add_option("--workers", vopt.workers, "workers for the determinism check");
    verify->add_option("--out", out_path, "write the JSON report here as well");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sample) {
            const PExponent p(sample_p);
            RandomSource rng(seed, 0);
            for (int k = 0; k < sample_count; ++k) {
                if (kind == "cone")
                    print_point(std::cout, sample_cone(sample_n, p, rng).coords());
                else if (kind == "ball")
                    print_point(std::cout, sample_uniform_ball(sample_n, p, rng));
                else
                    print_point(std::cout, sample_gg_vector(sample_n, p, rng));
            }
            return 0;
        }
        if (*hull) {
            const SymmetricPolytope poly = build_hull(read_vertex_file(hull_file));
            const BodySummary body = body_summary(poly);
            if (format == "json") {
                nlohmann::ordered_json doc;
                doc["dim"] = poly.dim();
                doc["generators"] = poly.num_generators();
                doc["vertices"] = poly.vertices().size();
                doc["facets"] = poly.facets().size();
                doc["volume"] = body.volume;
                auto facets = nlohmann::ordered_json::array();
                for (const Facet& f : poly.facets())
                    facets.push_back({{"normal", std::vector<double>(f.normal.data(), f.normal.data() + f.normal.size())},
                                      {"offset", f.offset},
                                      {"vertices", f.vertices}});
                doc["facet_list"] = facets;
                std::cout << doc.dump(2) << '\n';
            } else {
                std::cout << "dim " << poly.dim() << "\ngenerators " << poly.num_generators() << "\nvertices "
                          << poly.vertices().size() << "\nfacets " << poly.facets().size() << "\nvolume "
                          << format_double(body.volume) << '\n';
                for (const Facet& f : poly.facets()) {
                    std::cout << "facet offset " << format_double(f.offset) << " normal";
                    for (Eigen::Index i = 0; i < f.normal.size(); ++i) std::cout << ' ' << format_double(f.normal(i));
                    std::cout << " vertices";
                    for (int v : f.vertices) std::cout << ' ' << (v % 2 ? "-" : "+") << v / 2;
                    std::cout << '\n';
                }
            }
            return 0;
        }
        if (*iso) {
            const SymmetricPolytope poly = build_hull(read_vertex_file(iso_file));
            const BodySummary body = body_summary(poly);
            std::cout << "L " << format_double(isotropic_constant(body, poly.dim())) << "\nvolume "
                      << format_double(body.volume) << "\ntrace_cov " << format_double(body.covariance.trace()) << '\n';
            return 0;
        }
        if (*moments) {
            const PExponent p(mom_p);
            RealVector theta = RealVector::Zero(mom_n);
            if (theta_text.empty())
                theta(0) = 1.0;
            else
                theta = parse_theta(theta_text, mom_n);
            std::cout << "gamma_ratio_moment " << format_double(gamma_ratio_moment(mom_n, p, mom_q)) << '\n';
            if (mom_q >= 1.0 && mom_q == std::floor(mom_q)) {
                std::cout << "gk_equiv " << format_double(gk_equiv(theta, p, mom_q)) << '\n';
                std::cout << "cone_moment_estimate " << format_double(cone_moment_estimate({mom_n, p, mom_q, theta})) << '\n';
            }
            std::cout << "volume_unit_ball "
                      << format_double(std::exp(mom_n * std::log(2.0 * std::tgamma(1.0 + 1.0 / mom_p)) -
                                                std::lgamma(1.0 + mom_n / mom_p)))
                      << '\n';
            return 0;
        }
        if (*experiment) {
            ExperimentConfig cfg;
            if (!config_path.empty()) {
                cfg = load_config(config_path);
            } else {
                cfg.p_grid = p_values;
                cfg.n_grid = n_values;
                if (!num_points.empty()) cfg.n_rule = PointCountRule::explicit_list(num_points);
                cfg.trials = trials;
                cfg.master_seed = seed;
                cfg.mc_samples = mc_samples;
                cfg.band = band;
                cfg.parallel_workers = workers;
                cfg.output_format = format == "json" ? OutputFormat::Json : OutputFormat::Csv;
            }
            // Command-line overrides for the most common knobs.
            if (experiment->count("--workers")) cfg.parallel_workers = workers;
            if (experiment->count("--out")) cfg.output_path = out_path;
            if (experiment->count("--format")) cfg.output_format = format == "json" ? OutputFormat::Json : OutputFormat::Csv;
            cfg.validate();
            const GridResult result = run_grid(cfg);
            if (cfg.output_path.empty()) {
                cfg.output_format == OutputFormat::Json ? write_records_json(std::cout, result.records)
                                                        : write_records_csv(std::cout, result.records);
            } else {
                write_outputs(cfg, result);
                write_report_csv(std::cerr, result.report);
            }
            return 0;
        }
        if (*verify) {
            const VerifyReport report = verify_suite(vopt);
            const std::string text = report.to_json();
            std::cout << text << '\n';
            if (!out_path.empty()) {
                std::ofstream out(out_path);
                out << text << '\n';
                if (!out) throw std::runtime_error("failed to write " + out_path);
            }
            return report.all_passed() ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
