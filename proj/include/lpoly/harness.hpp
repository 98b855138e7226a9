#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lpoly/distributions.hpp"
#include "lpoly/polytope.hpp"

namespace lpoly {

inline constexpr int kSchemaVersion = 1;

/// How many points N to use for a given dimension n.
class PointCountRule {
public:
    enum class Kind { Explicit, NPlusOne, TwoN, CapExpSqrtN };

    static PointCountRule explicit_list(std::vector<int> values);
    /// "n+1", "2n" or "cap_exp_sqrt_n" (floor(exp(sqrt n))).
    static PointCountRule from_tag(std::string_view tag);

    Kind kind() const noexcept { return kind_; }
    std::vector<int> counts(int n) const;
    std::string describe() const;

private:
    Kind kind_ = Kind::NPlusOne;
    std::vector<int> values_;
};

enum class OutputFormat { Csv, Json };

struct ExperimentConfig {
    std::vector<double> p_grid;
    std::vector<int> n_grid;
    PointCountRule n_rule = PointCountRule::from_tag("n+1");
    int trials = 1;
    std::uint64_t master_seed = 0;
    int mc_samples = 10000;
    double band = 10.0;
    int parallel_workers = 1;
    std::string output_path;
    OutputFormat output_format = OutputFormat::Csv;

    /// Throws std::invalid_argument on any out-of-range field.
    void validate() const;
};

/// Parses the JSON config; unknown keys are rejected.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::string& path);

struct TrialRecord {
    double p = 0.0;
    int n = 0;
    int N = 0;
    int trial_index = 0;
    std::uint64_t seed_stream = 0;
    bool ok = false;
    std::string failure;  // empty on success
    double L = 0.0;
    double vol_radius = 0.0;
    double trace_cov = 0.0;
    double l1_mean = 0.0;
    double l1_se = 0.0;
    std::optional<double> subset_bound;
    std::optional<double> facet_bound;
    std::string skipped;  // "field:reason" entries separated by ';'
    bool coupling_ok = false;
    bool regime_ok = false;
    double wall_time_ms = 0.0;

    bool subset_inequality_holds() const;
    bool facet_inequality_holds() const;
};

struct ReportRow {
    double p = 0.0;
    int n = 0;
    int N = 0;
    int count = 0;
    int failed = 0;
    double L_mean = 0.0;
    double L_max = 0.0;
    double L_q50 = 0.0;
    double L_q90 = 0.0;
    /// min over trials of vol_radius n^(1/2 + 1/p) / sqrt(log(2N/n)).
    double min_volume_stat = 0.0;
    /// max over trials of trace_cov n^(2/p) / log(2N/n).
    double max_moment_stat = 0.0;
    int subset_pass = 0;
    int subset_checked = 0;
    int facet_pass = 0;
    int facet_checked = 0;
    int coupling_pass = 0;
    int regime_ok = 0;
};

struct GridResult {
    std::vector<TrialRecord> records;
    std::vector<ReportRow> report;
};

/// n + 1 <= N <= exp(sqrt n).
bool check_regime(int n, int N);

/// Stream index of one trial: mix64 chained over p's bit pattern, n, N and the
/// trial index, so adding grid cells never reshuffles existing trials.
std::uint64_t trial_stream(double p, int n, int N, int trial_index);

/// One polytope K_N with N cone-measure points, measured end to end.
TrialRecord run_trial(PExponent p, int n, int N, RandomSource& rng, int mc_samples = 10000);

struct CouplingResult {
    bool ok = false;
    bool inclusion_ok = false;
    bool volume_ok = false;
    BodySummary cone_body;  // K_N = conv{+-mu(Y_i)}
    BodySummary ball_body;  // conv{+-Y_i}
};

/// Builds both polytopes from the given uniform points Y_i.
CouplingResult couple_points(const std::vector<RealVector>& ball_points, PExponent p);
/// Draws Y_i uniform in B_p^n (resampling zeros) and couples them.
CouplingResult verify_coupling(PExponent p, int n, int N, RandomSource& rng);

GridResult run_grid(const ExperimentConfig& config);

std::vector<ReportRow> aggregate(const std::vector<TrialRecord>& records);

void write_records_csv(std::ostream& out, const std::vector<TrialRecord>& records);
void write_records_json(std::ostream& out, const std::vector<TrialRecord>& records);
void write_report_csv(std::ostream& out, const std::vector<ReportRow>& report);
void write_report_json(std::ostream& out, const std::vector<ReportRow>& report);
void write_timing_csv(std::ostream& out, const std::vector<TrialRecord>& records);

/// Writes records to config.output_path, the report to "<path>.report.<ext>"
/// and wall times to "<path>.timing.csv". Throws std::runtime_error naming
/// the path on I/O failure.
void write_outputs(const ExperimentConfig& config, const GridResult& result);

/// printf("%.17g").
std::string format_double(double x);

}  // namespace lpoly
