#include "lpoly/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace lpoly {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Configuration

PointCountRule PointCountRule::explicit_list(std::vector<int> values) {
    PointCountRule rule;
    rule.kind_ = Kind::Explicit;
    rule.values_ = std::move(values);
    return rule;
}

PointCountRule PointCountRule::from_tag(std::string_view tag) {
    PointCountRule rule;
    if (tag == "n+1")
        rule.kind_ = Kind::NPlusOne;
    else if (tag == "2n")
        rule.kind_ = Kind::TwoN;
    else if (tag == "cap_exp_sqrt_n")
        rule.kind_ = Kind::CapExpSqrtN;
    else
        throw std::invalid_argument("unknown N_rule tag '" + std::string(tag) + "'");
    return rule;
}

std::vector<int> PointCountRule::counts(int n) const {
    switch (kind_) {
        case Kind::Explicit: return values_;
        case Kind::NPlusOne: return {n + 1};
        case Kind::TwoN: return {2 * n};
        case Kind::CapExpSqrtN: return {std::max(n + 1, static_cast<int>(std::floor(std::exp(std::sqrt(n)))))};
    }
    return {};
}

std::string PointCountRule::describe() const {
    switch (kind_) {
        case Kind::NPlusOne: return "n+1";
        case Kind::TwoN: return "2n";
        case Kind::CapExpSqrtN: return "cap_exp_sqrt_n";
        case Kind::Explicit: break;
    }
    std::string s;
    for (int v : values_) s += (s.empty() ? "" : ",") + std::to_string(v);
    return "[" + s + "]";
}

void ExperimentConfig::validate() const {
    for (double p : p_grid)
        if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("p_grid entries must be finite and >= 1");
    for (int n : n_grid)
        if (n < 2 || n > kMaxHullDim) throw std::invalid_argument("n_grid entries must lie in [2, 8]");
    if (n_rule.kind() == PointCountRule::Kind::Explicit)
        for (int N : n_rule.counts(0))
            if (N < 1) throw std::invalid_argument("explicit N values must be >= 1");
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (mc_samples < 1000) throw std::invalid_argument("mc_samples must be >= 1000");
    if (!(band >= 1.0)) throw std::invalid_argument("band must be >= 1");
    if (parallel_workers < 1) throw std::invalid_argument("parallel_workers must be >= 1");
}

ExperimentConfig parse_config(std::string_view json_text) {
    const json doc = json::parse(json_text);
    if (!doc.is_object()) throw std::invalid_argument("config must be a JSON object");
    static const std::set<std::string> known{"p_grid", "n_grid", "N_rule", "trials", "master_seed", "mc_samples",
                                             "band", "parallel_workers", "output_path", "output_format"};
    for (const auto& [key, value] : doc.items())
        if (!known.count(key)) throw std::invalid_argument("unknown config key '" + key + "'");

    ExperimentConfig cfg;
    if (doc.contains("p_grid")) cfg.p_grid = doc.at("p_grid").get<std::vector<double>>();
    if (doc.contains("n_grid")) cfg.n_grid = doc.at("n_grid").get<std::vector<int>>();
    if (doc.contains("N_rule")) {
        const auto& rule = doc.at("N_rule");
        cfg.n_rule = rule.is_string() ? PointCountRule::from_tag(rule.get<std::string>())
                                      : PointCountRule::explicit_list(rule.get<std::vector<int>>());
    }
    if (doc.contains("trials")) cfg.trials = doc.at("trials").get<int>();
    if (doc.contains("master_seed")) cfg.master_seed = doc.at("master_seed").get<std::uint64_t>();
    if (doc.contains("mc_samples")) cfg.mc_samples = doc.at("mc_samples").get<int>();
    if (doc.contains("band")) cfg.band = doc.at("band").get<double>();
    if (doc.contains("parallel_workers")) cfg.parallel_workers = doc.at("parallel_workers").get<int>();
    if (doc.contains("output_path")) cfg.output_path = doc.at("output_path").get<std::string>();
    if (doc.contains("output_format")) {
        const auto fmt = doc.at("output_format").get<std::string>();
        if (fmt == "csv")
            cfg.output_format = OutputFormat::Csv;
        else if (fmt == "json")
            cfg.output_format = OutputFormat::Json;
        else
            throw std::invalid_argument("output_format must be csv or json");
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

// ---------------------------------------------------------------------------
// Trials

bool check_regime(int n, int N) {
    return N >= n + 1 && static_cast<double>(N) <= std::exp(std::sqrt(static_cast<double>(n)));
}

std::uint64_t trial_stream(double p, int n, int N, int trial_index) {
    std::uint64_t h = mix64(std::bit_cast<std::uint64_t>(p));
    h = mix64(h ^ static_cast<std::uint64_t>(n));
    h = mix64(h ^ static_cast<std::uint64_t>(N));
    return mix64(h ^ static_cast<std::uint64_t>(trial_index));
}

bool TrialRecord::subset_inequality_holds() const {
    return ok && subset_bound && trace_cov <= *subset_bound * (1.0 + 1e-12);
}

bool TrialRecord::facet_inequality_holds() const {
    return ok && facet_bound && l1_mean <= *facet_bound + 3.0 * l1_se;
}

namespace {

RealVector draw_nonzero_ball_point(int n, PExponent p, RandomSource& rng) {
    for (;;) {
        RealVector y = sample_uniform_ball(n, p, rng);
        if (lp_norm(y, p) > 0.0) return y;
    }
}

void note_skip(std::string& skipped, const std::string& entry) {
    if (!skipped.empty()) skipped += ';';
    skipped += entry;
}

}  // namespace

TrialRecord run_trial(PExponent p, int n, int N, RandomSource& rng, int mc_samples) {
    const auto start = std::chrono::steady_clock::now();
    TrialRecord rec;
    rec.p = p.value();
    rec.n = n;
    rec.N = N;
    rec.seed_stream = rng.stream_index();
    rec.regime_ok = check_regime(n, N);

    // Cone-measure points as Minkowski images of uniform ball points, so the
    // coupling inclusion can be checked on the same draw.
    std::vector<RealVector> ys;
    Eigen::MatrixXd xs(n, N);
    for (int i = 0; i < N; ++i) {
        ys.push_back(draw_nonzero_ball_point(n, p, rng));
        xs.col(i) = minkowski_map(ys.back(), p).coords();
    }

    try {
        const SymmetricPolytope hull = build_hull(xs);
        const BodySummary body = body_summary(hull);
        rec.L = isotropic_constant(body, n);
        rec.vol_radius = std::pow(body.volume, 1.0 / n);
        rec.trace_cov = body.covariance.trace();
        const McEstimate l1 = mc_integral_l1(hull, rng, mc_samples);
        rec.l1_mean = l1.estimate;
        rec.l1_se = l1.std_error;
        if (N <= kMaxSubsetGenerators)
            rec.subset_bound = subset_sup_bound(hull);
        else
            note_skip(rec.skipped, "subset_bound:N>24");
        try {
            rec.facet_bound = facet_l1_bound(hull);
        } catch (const CapabilityError&) {
            note_skip(rec.skipped, "facet_bound:non-simplicial facet");
        }
        rec.coupling_ok = std::all_of(ys.begin(), ys.end(), [&](const RealVector& y) {
            return contains(hull, y) && contains(hull, RealVector(-y));
        });
        rec.ok = true;
    } catch (const DegeneracyError& e) {
        rec.ok = false;
        rec.failure = e.what();
    }
    rec.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

CouplingResult couple_points(const std::vector<RealVector>& ball_points, PExponent p) {
    std::vector<RealVector> cone_points;
    cone_points.reserve(ball_points.size());
    for (const RealVector& y : ball_points) cone_points.push_back(minkowski_map(y, p).coords());

    const SymmetricPolytope cone_hull = build_hull(cone_points);
    const SymmetricPolytope ball_hull = build_hull(ball_points);
    CouplingResult out;
    out.cone_body = body_summary(cone_hull);
    out.ball_body = body_summary(ball_hull);
    out.inclusion_ok = std::all_of(ball_points.begin(), ball_points.end(), [&](const RealVector& y) {
        return contains(cone_hull, y) && contains(cone_hull, RealVector(-y));
    });
    out.volume_ok = out.cone_body.volume >= out.ball_body.volume * (1.0 - 1e-10);
    out.ok = out.inclusion_ok && out.volume_ok;
    return out;
}

CouplingResult verify_coupling(PExponent p, int n, int N, RandomSource& rng) {
    std::vector<RealVector> ys;
    ys.reserve(N);
    for (int i = 0; i < N; ++i) ys.push_back(draw_nonzero_ball_point(n, p, rng));
    return couple_points(ys, p);
}

// ---------------------------------------------------------------------------
// Grid

namespace {

struct TrialTask {
    double p;
    int n;
    int N;
    int trial;
};

double quantile(std::vector<double> values, double q) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

}  // namespace

GridResult run_grid(const ExperimentConfig& config) {
    config.validate();
    std::vector<TrialTask> tasks;
    for (double p : config.p_grid)
        for (int n : config.n_grid)
            for (int N : config.n_rule.counts(n))
                for (int t = 0; t < config.trials; ++t) tasks.push_back({p, n, N, t});
    std::sort(tasks.begin(), tasks.end(), [](const TrialTask& a, const TrialTask& b) {
        return std::tie(a.p, a.n, a.N, a.trial) < std::tie(b.p, b.n, b.N, b.trial);
    });
    tasks.erase(std::unique(tasks.begin(), tasks.end(),
                            [](const TrialTask& a, const TrialTask& b) {
                                return a.p == b.p && a.n == b.n && a.N == b.N && a.trial == b.trial;
                            }),
                tasks.end());

    GridResult result;
    result.records.resize(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            const TrialTask& task = tasks[i];
            RandomSource rng(config.master_seed, trial_stream(task.p, task.n, task.N, task.trial));
            TrialRecord rec = run_trial(PExponent(task.p), task.n, task.N, rng, config.mc_samples);
            rec.trial_index = task.trial;
            result.records[i] = std::move(rec);
        }
    };
    const int workers = std::min<int>(config.parallel_workers, std::max<std::size_t>(tasks.size(), 1));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    result.report = aggregate(result.records);
    return result;
}

std::vector<ReportRow> aggregate(const std::vector<TrialRecord>& records) {
    std::vector<ReportRow> rows;
    std::size_t i = 0;
    while (i < records.size()) {
        std::size_t j = i;
        while (j < records.size() && records[j].p == records[i].p && records[j].n == records[i].n &&
               records[j].N == records[i].N)
            ++j;
        ReportRow row;
        row.p = records[i].p;
        row.n = records[i].n;
        row.N = records[i].N;
        const double log_ratio = std::log(2.0 * row.N / row.n);
        std::vector<double> ls;
        double min_vol = INFINITY, max_mom = 0.0;
        for (std::size_t k = i; k < j; ++k) {
            const TrialRecord& r = records[k];
            ++row.count;
            if (r.regime_ok) ++row.regime_ok;
            if (!r.ok) {
                ++row.failed;
                continue;
            }
            ls.push_back(r.L);
            min_vol = std::min(min_vol, r.vol_radius * std::pow(row.n, 0.5 + 1.0 / row.p) / std::sqrt(log_ratio));
            max_mom = std::max(max_mom, r.trace_cov * std::pow(row.n, 2.0 / row.p) / log_ratio);
            if (r.subset_bound) {
                ++row.subset_checked;
                if (r.subset_inequality_holds()) ++row.subset_pass;
            }
            if (r.facet_bound) {
                ++row.facet_checked;
                if (r.facet_inequality_holds()) ++row.facet_pass;
            }
            if (r.coupling_ok) ++row.coupling_pass;
        }
        if (!ls.empty()) {
            double sum = 0.0;
            for (double l : ls) sum += l;
            row.L_mean = sum / static_cast<double>(ls.size());
            row.L_max = *std::max_element(ls.begin(), ls.end());
            row.L_q50 = quantile(ls, 0.5);
            row.L_q90 = quantile(ls, 0.9);
            row.min_volume_stat = min_vol;
            row.max_moment_stat = max_mom;
        }
        rows.push_back(row);
        i = j;
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Output

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

// Quotes a CSV text cell when it contains a separator or quote.
std::string text_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

json record_json(const TrialRecord& r) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["p"] = r.p;
    j["n"] = r.n;
    j["N"] = r.N;
    j["trial_index"] = r.trial_index;
    j["seed_stream"] = r.seed_stream;
    j["status"] = r.ok ? "ok" : "failed";
    j["failure"] = r.failure;
    j["L"] = r.L;
    j["vol_radius"] = r.vol_radius;
    j["trace_cov"] = r.trace_cov;
    j["l1_mean"] = r.l1_mean;
    j["l1_se"] = r.l1_se;
    j["subset_bound"] = r.subset_bound ? json(*r.subset_bound) : json(nullptr);
    j["facet_bound"] = r.facet_bound ? json(*r.facet_bound) : json(nullptr);
    j["skipped"] = r.skipped;
    j["coupling_ok"] = r.coupling_ok;
    j["regime_ok"] = r.regime_ok;
    return j;
}

json row_json(const ReportRow& r) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["p"] = r.p;
    j["n"] = r.n;
    j["N"] = r.N;
    j["count"] = r.count;
    j["failed"] = r.failed;
    j["L_mean"] = r.L_mean;
    j["L_max"] = r.L_max;
    j["L_q50"] = r.L_q50;
    j["L_q90"] = r.L_q90;
    j["min_volume_stat"] = r.min_volume_stat;
    j["max_moment_stat"] = r.max_moment_stat;
    j["subset_pass"] = r.subset_pass;
    j["subset_checked"] = r.subset_checked;
    j["facet_pass"] = r.facet_pass;
    j["facet_checked"] = r.facet_checked;
    j["coupling_pass"] = r.coupling_pass;
    j["regime_ok"] = r.regime_ok;
    return j;
}

}  // namespace

void write_records_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
    out << "schema_version,p,n,N,trial_index,seed_stream,status,failure,L,vol_radius,trace_cov,l1_mean,l1_se,"
           "subset_bound,facet_bound,skipped,coupling_ok,regime_ok\n";
    for (const TrialRecord& r : records) {
        out << kSchemaVersion << ',' << format_double(r.p) << ',' << r.n << ',' << r.N << ',' << r.trial_index << ','
            << r.seed_stream << ',' << (r.ok ? "ok" : "failed") << ',' << text_cell(r.failure) << ','
            << format_double(r.L) << ',' << format_double(r.vol_radius) << ',' << format_double(r.trace_cov) << ','
            << format_double(r.l1_mean) << ',' << format_double(r.l1_se) << ',' << opt(r.subset_bound) << ','
            << opt(r.facet_bound) << ',' << text_cell(r.skipped) << ',' << (r.coupling_ok ? "true" : "false") << ','
            << (r.regime_ok ? "true" : "false") << '\n';
    }
}

void write_records_json(std::ostream& out, const std::vector<TrialRecord>& records) {
    json arr = json::array();
    for (const TrialRecord& r : records) arr.push_back(record_json(r));
    out << arr.dump(2) << '\n';
}

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& report) {
    out << "schema_version,p,n,N,count,failed,L_mean,L_max,L_q50,L_q90,min_volume_stat,max_moment_stat,"
           "subset_pass,subset_checked,facet_pass,facet_checked,coupling_pass,regime_ok\n";
    for (const ReportRow& r : report) {
        out << kSchemaVersion << ',' << format_double(r.p) << ',' << r.n << ',' << r.N << ',' << r.count << ','
            << r.failed << ',' << format_double(r.L_mean) << ',' << format_double(r.L_max) << ','
            << format_double(r.L_q50) << ',' << format_double(r.L_q90) << ',' << format_double(r.min_volume_stat)
            << ',' << format_double(r.max_moment_stat) << ',' << r.subset_pass << ',' << r.subset_checked << ','
            << r.facet_pass << ',' << r.facet_checked << ',' << r.coupling_pass << ',' << r.regime_ok << '\n';
    }
}

void write_report_json(std::ostream& out, const std::vector<ReportRow>& report) {
    json arr = json::array();
    for (const ReportRow& r : report) arr.push_back(row_json(r));
    out << arr.dump(2) << '\n';
}

void write_timing_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
    out << "p,n,N,trial_index,wall_time_ms\n";
    for (const TrialRecord& r : records)
        out << format_double(r.p) << ',' << r.n << ',' << r.N << ',' << r.trial_index << ','
            << format_double(r.wall_time_ms) << '\n';
}

void write_outputs(const ExperimentConfig& config, const GridResult& result) {
    if (config.output_path.empty()) throw std::invalid_argument("output_path is empty");
    const bool as_json = config.output_format == OutputFormat::Json;
    const std::string ext = as_json ? "json" : "csv";
    std::vector<std::string> errors;
    auto emit = [&](const std::string& path, auto&& body) {
        std::ofstream out(path, std::ios::binary);
        if (out) body(out);
        out.flush();
        if (!out) errors.push_back(path);
    };
    emit(config.output_path, [&](std::ostream& o) {
        as_json ? write_records_json(o, result.records) : write_records_csv(o, result.records);
    });
    emit(config.output_path + ".report." + ext, [&](std::ostream& o) {
        as_json ? write_report_json(o, result.report) : write_report_csv(o, result.report);
    });
    emit(config.output_path + ".timing.csv", [&](std::ostream& o) { write_timing_csv(o, result.records); });
    if (!errors.empty()) {
        std::string msg = "failed to write";
        for (const auto& e : errors) msg += " " + e;
        throw std::runtime_error(msg);
    }
}

}  // namespace lpoly
