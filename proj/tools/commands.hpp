#pragma once

#include <certbayes/certbayes.hpp>

#include <json.hpp>

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace certbayes::cli {

using json = nlohmann::json;

enum class Kind { Real, Int, Text, RealList, TextList, PriorVariance, Seeds };

struct OptionSpec
{
    std::string name; // flag name without the leading dashes; also the config-file key
    Kind kind;
    json fallback;    // null means "no default"
    std::string help;
};

const std::vector<OptionSpec>& options_for(const std::string& command);

/// Normalizes a raw flag or config-file value to the option's JSON type.
json convert_value(const OptionSpec& spec, const json& raw);

/**
 * Defaults, then the config file, then explicit flags. Unknown config keys
 * are rejected. The result carries "command" and the list of explicitly set
 * keys under "explicit".
 */
json resolve_config(const std::string& command, const json& file_config, const json& flag_values);

/// Base seed: CERTBAYES_SEED when set, else 0.
std::uint64_t default_seed();

std::vector<std::uint64_t> seed_list(const json& cfg);

std::string sha256_hex(const std::string& bytes);

struct GenDataResult
{
    std::vector<std::string> files;
};
GenDataResult cmd_gen_data(const json& cfg);

struct CertifyResult
{
    json output;
    bool all_ok = true;
};
CertifyResult cmd_certify(const json& cfg);

struct MetricRow
{
    std::uint64_t seed;
    std::string posterior; // "bayes" or "robust"
    double delta_hat;
    double risk;
    double std_error;
};

struct FitEvalResult
{
    std::vector<MetricRow> rows;
    json diagnostics;
    json summary;
};
FitEvalResult cmd_fit_eval(const json& cfg);

struct SweepRow
{
    Eigen::Index n;
    std::uint64_t seed;
    TheoremId theorem;
    bool precondition_ok;
    double bound;     // NaN when a precondition fails
    double risk;      // Monte Carlo expected test risk, log-normalizer omitted
    double risk_se;
};

struct SweepResult
{
    std::vector<SweepRow> rows;
    json summary;
};
SweepResult cmd_sweep(const json& cfg);

std::string metrics_csv(const FitEvalResult& r);
std::string sweep_csv(const SweepResult& r);

} // namespace certbayes::cli
