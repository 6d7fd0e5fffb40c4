#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "pfscale/bench/sample.hpp"
#include "pfscale/netmodel/generator.hpp"

namespace pfscale::bench {

class BenchError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct CaseParams {
    std::uint64_t seed = 1;
    double p = 2.0;  // UpsilonSolve
    /// FixedPointPF load step, as fractions of nominal load. The stored
    /// loads of a network are taken to be at stored_load_level.
    double load_from = 0.6;
    double load_to = 0.3;
    double stored_load_level = 0.6;
    double tol = 1e-6;
    int max_iter = 100;
};

/// Exactly one of generator, network_file or upsilon_n selects the input.
struct BenchCase {
    std::string case_id;
    Subject subject = Subject::YbusSolve;
    std::int64_t n = 0;    // filled in by plan_campaign / run_case
    std::int64_t nnz = 0;  // of the matrix that is factorized
    CaseParams params;
    std::optional<net::GeneratorSpec> generator;
    std::optional<std::filesystem::path> network_file;
    std::int32_t upsilon_n = 0;
};

struct RunOptions {
    int repetitions = 10;
    int warmup = 1;
    /// Cases whose median falls below this are re-timed with every run
    /// averaged over inner_loop_count executions.
    double inner_loop_threshold = 100e-6;
    int inner_loop_count = 10;
};

/// Seconds per phase of one timed run; t_seconds is their sum.
struct PhaseTimes {
    double order_factor = 0.0;
    double solve = 0.0;

    double total() const { return order_factor + solve; }
};

struct CaseResult {
    std::vector<BenchSample> samples;
    std::vector<PhaseTimes> phases;     // per timed run
    std::vector<double> outer_seconds;  // wall time around each timed run
    bool inner_loop = false;
    std::string error;  // non-empty iff the case failed
    /// Solution of the last timed execution (real results embedded).
    std::vector<std::complex<double>> last_solution;
};

/// Builds the inputs (untimed), runs the warm-up, then the timed runs.
/// A solver failure yields a single failed sample instead of an exception.
CaseResult run_case_detailed(const BenchCase& c, const RunOptions& options = {});
std::vector<BenchSample> run_case(const BenchCase& c, const RunOptions& options = {});

/// Log-spaced target sizes, rounded to integers.
struct SizeGrid {
    double min = 300.0;
    double max = 100000.0;
    int count = 15;

    std::vector<std::int64_t> values() const;
};

struct CampaignSpec {
    std::vector<Subject> subjects;
    SizeGrid sizes;
    /// Network files for the network subjects; generated networks are used
    /// when empty.
    std::vector<std::filesystem::path> networks;
    RunOptions run;
    std::uint64_t seed = 1;
    CaseParams params;
    net::PhaseMix phase_mix;
    net::ImpedanceProfile impedance;
    net::LoadDensity load_density;
};

nlohmann::json to_json(const CampaignSpec& spec);
CampaignSpec campaign_from_json(const nlohmann::json& doc);
CampaignSpec load_campaign(const std::filesystem::path& path);

/// Cases in ascending n (ties keep subject order). Deterministic in the spec.
std::vector<BenchCase> plan_campaign(const CampaignSpec& spec);

struct CampaignSummary {
    std::size_t cases = 0;
    std::vector<std::string> failed_cases;
    std::vector<std::string> inner_loop_cases;
};

using SampleSink = std::function<void(const BenchSample&)>;

/// Runs every planned case in order, streaming samples to sink as each case
/// completes.
CampaignSummary run_campaign(const CampaignSpec& spec, const SampleSink& sink);

void write_samples_header(std::ostream& os);
void write_sample(std::ostream& os, const BenchSample& s);
std::vector<BenchSample> read_samples(std::istream& is);

}  // namespace pfscale::bench
