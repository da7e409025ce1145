#include "commands.hpp"

#include <certbayes/io.hpp>

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

namespace certbayes::cli {

namespace {

std::vector<OptionSpec> common_options()
{
    return {{"seed", Kind::Int, nullptr, "base seed (default: CERTBAYES_SEED or 0)"},
            {"out", Kind::Text, nullptr, "output path"}};
}

std::vector<OptionSpec> with_common(std::vector<OptionSpec> specific)
{
    auto out = common_options();
    out.insert(out.end(), specific.begin(), specific.end());
    return out;
}

std::string trim(std::string s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_commas(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double parse_plain_real(const std::string& s, const std::string& what)
{
    std::string_view v = s;
    if (!v.empty() && v.front() == '+') v.remove_prefix(1);
    double out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    detail::require(!v.empty() && ec == std::errc() && ptr == v.data() + v.size() && std::isfinite(out),
                    ErrorCode::InvalidArgument, what + ": cannot parse '" + s + "' as a number");
    return out;
}

/// Accepts plain numbers and fractions such as 1/9.
double parse_real(const std::string& raw, const std::string& what)
{
    const std::string s = trim(raw);
    const auto slash = s.find('/');
    if (slash == std::string::npos) return parse_plain_real(s, what);
    const double num = parse_plain_real(trim(s.substr(0, slash)), what);
    const double den = parse_plain_real(trim(s.substr(slash + 1)), what);
    detail::require(den != 0, ErrorCode::InvalidArgument, what + ": division by zero in '" + s + "'");
    return num / den;
}

long long parse_int(const std::string& raw, const std::string& what)
{
    const std::string s = trim(raw);
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    detail::require(!s.empty() && ec == std::errc() && ptr == s.data() + s.size(), ErrorCode::InvalidArgument,
                    what + ": cannot parse '" + s + "' as an integer");
    return out;
}

json real_value(const json& raw, const std::string& what)
{
    if (raw.is_number()) return raw.get<double>();
    detail::require(raw.is_string(), ErrorCode::InvalidArgument, what + ": expected a number");
    return parse_real(raw.get<std::string>(), what);
}

json int_value(const json& raw, const std::string& what)
{
    if (raw.is_number_integer()) return raw.get<long long>();
    if (raw.is_number()) {
        const double v = raw.get<double>();
        detail::require(v == std::floor(v), ErrorCode::InvalidArgument, what + ": expected an integer");
        return static_cast<long long>(v);
    }
    detail::require(raw.is_string(), ErrorCode::InvalidArgument, what + ": expected an integer");
    return parse_int(raw.get<std::string>(), what);
}

const OptionSpec& find_option(const std::string& command, const std::string& key)
{
    for (const auto& spec : options_for(command))
        if (spec.name == key) return spec;
    throw Error(ErrorCode::InvalidArgument, "unknown option '" + key + "' for command '" + command + "'");
}

bool has(const json& cfg, const std::string& key) { return cfg.contains(key) && !cfg.at(key).is_null(); }

double real(const json& cfg, const std::string& key)
{
    detail::require(has(cfg, key), ErrorCode::InvalidArgument, "--" + key + " is required");
    return cfg.at(key).get<double>();
}

long long integer(const json& cfg, const std::string& key)
{
    detail::require(has(cfg, key), ErrorCode::InvalidArgument, "--" + key + " is required");
    return cfg.at(key).get<long long>();
}

std::string text(const json& cfg, const std::string& key)
{
    detail::require(has(cfg, key), ErrorCode::InvalidArgument, "--" + key + " is required");
    return cfg.at(key).get<std::string>();
}

double prior_variance(const json& cfg, Eigen::Index d)
{
    const json& v = cfg.at("sigma-p-sq");
    if (v.is_string()) return 1.0 / double(d); // "1/d"
    return v.get<double>();
}

HmcConfig hmc_config(const json& cfg, std::uint64_t seed)
{
    HmcConfig h;
    h.n_samples = int(integer(cfg, "hmc-samples"));
    h.n_warmup = int(integer(cfg, "hmc-warmup"));
    h.leapfrog_steps = int(integer(cfg, "leapfrog"));
    h.seed = seed;
    h.validate();
    return h;
}

CoefficientSet coefficient_set(const json& cfg)
{
    const std::string c = text(cfg, "coefficients");
    if (c == "derived") return CoefficientSet::Derived;
    if (c == "published") return CoefficientSet::AsPublished;
    throw Error(ErrorCode::InvalidArgument, "--coefficients must be 'derived' or 'published', got '" + c + "'");
}

std::vector<TheoremId> theorem_list(const json& cfg)
{
    std::vector<TheoremId> out;
    for (const auto& t : cfg.at("theorem")) {
        const std::string s = t.get<std::string>();
        if (s == "all") {
            for (TheoremId id : all_theorems)
                if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
            continue;
        }
        const TheoremId id = theorem_from_string(s);
        if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
    }
    detail::require(!out.empty(), ErrorCode::InvalidArgument, "no theorem selected");
    return out;
}

TargetColumn target_column(const json& cfg)
{
    const std::string t = text(cfg, "target");
    if (!t.empty() && std::all_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; }))
        return std::size_t(std::stoull(t));
    return t;
}

std::string read_file_bytes(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    detail::require(bool(in), ErrorCode::Io, "cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string dataset_bytes(const Dataset<double>& data)
{
    return io::to_json(data).dump();
}

std::optional<json> synthetic_sidecar(const std::string& data_path)
{
    const std::string side = data_path + ".json";
    if (!std::filesystem::exists(side)) return std::nullopt;
    json j = io::read_json_file(side);
    if (j.value("kind", std::string()) != "synthetic") return std::nullopt;
    return j;
}

/// Runs fn(i) for i in [0, count) on up to `jobs` threads; rethrows the lowest-index failure.
template <typename Fn>
void parallel_for(std::size_t count, int jobs, Fn fn)
{
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int threads = std::clamp<int>(jobs, 1, int(std::max<std::size_t>(count, 1)));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

std::string test_path_for(const std::string& out)
{
    const std::filesystem::path p(out);
    return (p.parent_path() / (p.stem().string() + "_test" + p.extension().string())).string();
}

json summarize(const std::vector<double>& values)
{
    const double n = double(values.size());
    double mean = 0;
    for (double v : values) mean += v / n;
    double var = 0;
    for (double v : values) var += (v - mean) * (v - mean);
    const double sd = values.size() > 1 ? std::sqrt(var / (n - 1)) : 0.0;
    return {{"mean", mean}, {"sd", sd}, {"count", values.size()}};
}

} // namespace

const std::vector<OptionSpec>& options_for(const std::string& command)
{
    static const std::vector<OptionSpec> gen_data = with_common({
        {"n", Kind::Int, 100, "number of rows"},
        {"d", Kind::Int, 5, "number of features"},
        {"n-test", Kind::Int, 0, "also write a test set of this size (same theta*)"},
        {"sigma-x-sq", Kind::Real, 1.0, "feature variance"},
        {"sigma-sq", Kind::Real, 1.0 / 9.0, "label noise variance"},
        {"theta-star-norm-sq", Kind::Real, 0.5, "squared norm of the true parameter"},
    });
    static const std::vector<OptionSpec> certify = with_common({
        {"data", Kind::Text, nullptr, "CSV file; omit to generate synthetic data"},
        {"target", Kind::Text, "y", "target column name or 0-based index"},
        {"n", Kind::Int, 100, "synthetic rows when --data is omitted"},
        {"d", Kind::Int, 5, "synthetic features when --data is omitted"},
        {"sigma-sq", Kind::Real, nullptr, "noise variance (default: from the data sidecar, else 1)"},
        {"sigma-p-sq", Kind::PriorVariance, 0.01, "prior variance, or 1/d"},
        {"sigma-x-sq", Kind::Real, nullptr, "feature variance (required for plug-in data)"},
        {"theta-star-norm-sq", Kind::Real, nullptr, "|theta*|^2 (required for plug-in data)"},
        {"delta", Kind::Real, 0.0, "training perturbation radius"},
        {"delta-hat", Kind::Real, 0.0, "test perturbation radius"},
        {"beta", Kind::Real, 0.05, "confidence parameter"},
        {"theorem", Kind::TextList, json::array({"all"}), "certificates to compute"},
        {"coefficients", Kind::Text, "derived", "derived or published normalizer coefficients"},
    });
    static const std::vector<OptionSpec> fit_eval = with_common({
        {"data", Kind::Text, nullptr, "training (or full) CSV; omit for synthetic data"},
        {"test", Kind::Text, nullptr, "test CSV; omit to split --data 70/30 per seed"},
        {"target", Kind::Text, "y", "target column name or 0-based index"},
        {"n", Kind::Int, 100, "synthetic training rows"},
        {"d", Kind::Int, 5, "synthetic features"},
        {"n-test", Kind::Int, 10000, "synthetic test rows"},
        {"sigma-x-sq", Kind::Real, 1.0, "synthetic feature variance"},
        {"theta-star-norm-sq", Kind::Real, 0.5, "synthetic |theta*|^2"},
        {"sigma-sq", Kind::Real, nullptr, "noise variance (default 1/9 synthetic, 1 for CSV data)"},
        {"sigma-p-sq", Kind::PriorVariance, 0.01, "prior variance, or 1/d"},
        {"delta", Kind::Real, 0.1, "training radius of the robust posterior"},
        {"delta-hat", Kind::RealList, json::array({0.1}), "test radii to evaluate (0 is always included)"},
        {"seeds", Kind::Seeds, 1, "seed count, or an explicit comma list"},
        {"train-fraction", Kind::Real, 0.7, "train share when splitting --data"},
        {"standardize", Kind::Text, "auto", "auto, true or false"},
        {"hmc-samples", Kind::Int, 4000, "retained HMC draws"},
        {"hmc-warmup", Kind::Int, 2000, "HMC warmup iterations"},
        {"leapfrog", Kind::Int, 32, "leapfrog steps per trajectory"},
        {"mc-draws", Kind::Int, 4000, "exact posterior draws for adversarial risk"},
        {"jobs", Kind::Int, 1, "parallel seeds"},
    });
    static const std::vector<OptionSpec> sweep = with_common({
        {"d", Kind::Int, 5, "features"},
        {"n-grid", Kind::RealList, json::array({10, 100, 1000, 10000}), "training sizes"},
        {"n-test", Kind::Int, 10000, "test rows per cell"},
        {"sigma-x-sq", Kind::Real, 1.0, "feature variance"},
        {"sigma-sq", Kind::Real, 1.0 / 9.0, "noise variance"},
        {"theta-star-norm-sq", Kind::Real, 0.5, "|theta*|^2"},
        {"sigma-p-sq", Kind::PriorVariance, 0.01, "prior variance, or 1/d"},
        {"delta", Kind::Real, 0.01, "training radius"},
        {"delta-hat", Kind::Real, 0.01, "test radius"},
        {"beta", Kind::Real, 0.05, "confidence parameter"},
        {"theorem", Kind::TextList, json::array({"bayes-std", "bayes-adv", "robust-std", "robust-adv-matched"}),
         "certificates to compute"},
        {"coefficients", Kind::Text, "derived", "derived or published normalizer coefficients"},
        {"seeds", Kind::Seeds, 40, "seed count, or an explicit comma list"},
        {"hmc-samples", Kind::Int, 1000, "retained HMC draws"},
        {"hmc-warmup", Kind::Int, 500, "HMC warmup iterations"},
        {"leapfrog", Kind::Int, 16, "leapfrog steps per trajectory"},
        {"mc-draws", Kind::Int, 2000, "exact posterior draws for adversarial risk"},
        {"jobs", Kind::Int, 1, "parallel cells"},
    });
    static const std::vector<OptionSpec> none;
    if (command == "gen-data") return gen_data;
    if (command == "certify") return certify;
    if (command == "fit-eval") return fit_eval;
    if (command == "sweep") return sweep;
    return none;
}

json convert_value(const OptionSpec& spec, const json& raw)
{
    const std::string what = "--" + spec.name;
    if (raw.is_null()) return nullptr;
    switch (spec.kind) {
        case Kind::Real: return real_value(raw, what);
        case Kind::Int: return int_value(raw, what);
        case Kind::Text: return raw.is_string() ? raw : json(raw.dump());
        case Kind::PriorVariance:
            if (raw.is_string() && trim(raw.get<std::string>()) == "1/d") return "1/d";
            return real_value(raw, what);
        case Kind::RealList: {
            json out = json::array();
            if (raw.is_array()) {
                for (const auto& v : raw) out.push_back(real_value(v, what));
            } else if (raw.is_string()) {
                for (const auto& s : split_commas(raw.get<std::string>())) out.push_back(parse_real(s, what));
            } else {
                out.push_back(real_value(raw, what));
            }
            return out;
        }
        case Kind::TextList: {
            json out = json::array();
            if (raw.is_array()) {
                for (const auto& v : raw) out.push_back(v.get<std::string>());
            } else {
                for (const auto& s : split_commas(raw.get<std::string>())) out.push_back(s);
            }
            return out;
        }
        case Kind::Seeds: {
            if (raw.is_array()) {
                json out = json::array();
                for (const auto& v : raw) out.push_back(int_value(v, what));
                return out;
            }
            if (raw.is_string() && raw.get<std::string>().find(',') != std::string::npos) {
                json out = json::array();
                for (const auto& s : split_commas(raw.get<std::string>())) out.push_back(parse_int(s, what));
                return out;
            }
            return int_value(raw, what);
        }
    }
    return raw;
}

std::uint64_t default_seed()
{
    if (const char* env = std::getenv("CERTBAYES_SEED"))
        return std::uint64_t(parse_int(env, "CERTBAYES_SEED"));
    return 0;
}

json resolve_config(const std::string& command, const json& file_config, const json& flag_values)
{
    const auto& specs = options_for(command);
    detail::require(!specs.empty(), ErrorCode::InvalidArgument, "unknown command '" + command + "'");
    json cfg = json::object();
    for (const auto& spec : specs) cfg[spec.name] = spec.fallback;
    cfg["seed"] = default_seed();

    std::set<std::string> explicit_keys;
    auto overlay = [&](const json& layer) {
        if (layer.is_null()) return;
        detail::require(layer.is_object(), ErrorCode::InvalidArgument, "config must be a JSON object");
        for (const auto& [key, value] : layer.items()) {
            const OptionSpec& spec = find_option(command, key);
            cfg[key] = convert_value(spec, value);
            explicit_keys.insert(key);
        }
    };
    overlay(file_config);
    overlay(flag_values);
    cfg["command"] = command;
    cfg["explicit"] = explicit_keys;
    return cfg;
}

std::vector<std::uint64_t> seed_list(const json& cfg)
{
    const std::uint64_t base = std::uint64_t(integer(cfg, "seed"));
    const json& s = cfg.at("seeds");
    std::vector<std::uint64_t> out;
    if (s.is_array()) {
        for (const auto& v : s) out.push_back(std::uint64_t(v.get<long long>()));
    } else {
        const long long count = s.get<long long>();
        detail::require(count >= 1, ErrorCode::InvalidArgument, "--seeds must be >= 1");
        for (long long i = 0; i < count; ++i) out.push_back(base + std::uint64_t(i));
    }
    detail::require(!out.empty(), ErrorCode::InvalidArgument, "empty seed list");
    return out;
}

std::string sha256_hex(const std::string& bytes)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    detail::require(EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) == 1, ErrorCode::Io,
                    "SHA-256 computation failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return os.str();
}

GenDataResult cmd_gen_data(const json& cfg)
{
    SyntheticSpec spec;
    spec.n = Eigen::Index(integer(cfg, "n"));
    spec.d = Eigen::Index(integer(cfg, "d"));
    spec.sigma_x_sq = real(cfg, "sigma-x-sq");
    spec.sigma_sq = real(cfg, "sigma-sq");
    spec.theta_star_norm_sq = real(cfg, "theta-star-norm-sq");
    spec.seed = std::uint64_t(integer(cfg, "seed"));
    spec.validate();
    const std::string out = text(cfg, "out");
    const long long n_test = integer(cfg, "n-test");
    detail::require(n_test >= 0, ErrorCode::InvalidArgument, "--n-test must be >= 0");

    Dataset<double> train, test;
    Eigen::VectorXd theta;
    if (n_test > 0) {
        auto s = generate_synthetic_split(spec, Eigen::Index(n_test));
        train = std::move(s.train);
        test = std::move(s.test);
        theta = std::move(s.theta_star);
    } else {
        auto s = generate_synthetic(spec);
        train = std::move(s.data);
        theta = std::move(s.theta_star);
    }

    const std::string digest = sha256_hex(cfg.dump());
    GenDataResult result;
    auto emit = [&](const std::string& path, const Dataset<double>& ds, const char* role) {
        write_csv(path, ds);
        json side = {{"kind", "synthetic"},
                     {"role", role},
                     {"spec", io::to_json(spec)},
                     {"rows", ds.n()},
                     {"theta_star", std::vector<double>(theta.data(), theta.data() + theta.size())},
                     {"config", cfg},
                     {"inputs_digest", digest},
                     {"content_sha256", sha256_hex(read_file_bytes(path))}};
        io::write_text_file(path + ".json", side.dump(2) + "\n");
        result.files.push_back(path);
        result.files.push_back(path + ".json");
    };
    emit(out, train, "train");
    if (n_test > 0) emit(test_path_for(out), test, "test");
    return result;
}

CertifyResult cmd_certify(const json& cfg)
{
    Dataset<double> data;
    std::optional<json> spec; // synthetic provenance, when known
    std::string material;
    std::string source;
    if (has(cfg, "data")) {
        source = text(cfg, "data");
        data = load_csv(source, target_column(cfg));
        material = read_file_bytes(source);
        if (auto side = synthetic_sidecar(source)) spec = side->at("spec");
    } else {
        SyntheticSpec s;
        s.n = Eigen::Index(integer(cfg, "n"));
        s.d = Eigen::Index(integer(cfg, "d"));
        s.seed = std::uint64_t(integer(cfg, "seed"));
        if (has(cfg, "sigma-sq")) s.sigma_sq = real(cfg, "sigma-sq");
        if (has(cfg, "sigma-x-sq")) s.sigma_x_sq = real(cfg, "sigma-x-sq");
        if (has(cfg, "theta-star-norm-sq")) s.theta_star_norm_sq = real(cfg, "theta-star-norm-sq");
        data = generate_synthetic(s).data;
        spec = io::to_json(s);
        material = dataset_bytes(data);
        source = "synthetic";
    }
    const bool plug_in = !spec.has_value();

    auto pick = [&](const std::string& key, const char* spec_key, std::optional<double> fallback) -> double {
        if (has(cfg, key)) return real(cfg, key);
        if (spec) return spec->at(spec_key).get<double>();
        detail::require(fallback.has_value(), ErrorCode::InvalidArgument,
                        "--" + key + " is required for data without a synthetic sidecar; "
                        "population quantities are never estimated from the data");
        return *fallback;
    };
    const NoiseModel noise(pick("sigma-sq", "sigma_sq", 1.0));
    const DataDistributionSpec dist(pick("sigma-x-sq", "sigma_x_sq", std::nullopt),
                                    pick("theta-star-norm-sq", "theta_star_norm_sq", std::nullopt));
    const IsotropicPrior prior(prior_variance(cfg, data.d()));
    const PerturbationBudget budget(real(cfg, "delta"), real(cfg, "delta-hat"));
    const double beta = real(cfg, "beta");
    CertificateOptions opts;
    opts.coefficients = coefficient_set(cfg);

    json resolved = cfg;
    resolved["resolved"] = {{"sigma_sq", noise.sigma_sq},
                            {"sigma_p_sq", prior.sigma_p_sq},
                            {"sigma_x_sq", dist.sigma_x_sq},
                            {"theta_star_norm_sq", dist.theta_star_norm_sq}};
    const std::string digest = sha256_hex(material + "\n" + resolved.dump());

    CertifyResult result;
    json reports = json::array();
    for (TheoremId id : theorem_list(cfg)) {
        CertificateReport rep = certify_report(id, data, noise, prior, dist, budget, beta, opts);
        rep.inputs_digest = digest;
        rep.plug_in = plug_in;
        result.all_ok = result.all_ok && rep.precondition_ok;
        reports.push_back(io::to_json(rep));
    }
    result.output = {{"config", resolved},
                     {"inputs_digest", digest},
                     {"data", {{"source", source}, {"n", data.n()}, {"d", data.d()}, {"plug_in", plug_in}}},
                     {"reports", reports}};
    return result;
}

FitEvalResult cmd_fit_eval(const json& cfg)
{
    const auto seeds = seed_list(cfg);
    const bool have_data = has(cfg, "data");
    const bool have_test = has(cfg, "test");
    detail::require(!have_test || have_data, ErrorCode::InvalidArgument, "--test needs --data");
    const std::string standardize_mode = text(cfg, "standardize");
    detail::require(standardize_mode == "auto" || standardize_mode == "true" || standardize_mode == "false",
                    ErrorCode::InvalidArgument, "--standardize must be auto, true or false");
    const bool standardize =
        standardize_mode == "true" || (standardize_mode == "auto" && have_data && !have_test);

    std::optional<Dataset<double>> full, fixed_test;
    if (have_data) full = load_csv(text(cfg, "data"), target_column(cfg));
    if (have_test) fixed_test = load_csv(text(cfg, "test"), target_column(cfg));
    const NoiseModel noise(has(cfg, "sigma-sq") ? real(cfg, "sigma-sq") : (have_data ? 1.0 : 1.0 / 9.0));
    const double delta = real(cfg, "delta");
    detail::require_nonnegative(delta, "delta");
    std::vector<double> radii{0.0};
    for (const auto& v : cfg.at("delta-hat")) {
        const double r = v.get<double>();
        detail::require_nonnegative(r, "delta_hat");
        if (std::find(radii.begin(), radii.end(), r) == radii.end()) radii.push_back(r);
    }
    const int mc_draws = int(integer(cfg, "mc-draws"));

    struct SeedOutcome
    {
        std::vector<MetricRow> rows;
        json diag;
    };
    std::vector<SeedOutcome> outcomes(seeds.size());

    parallel_for(seeds.size(), int(integer(cfg, "jobs")), [&](std::size_t idx) {
        const std::uint64_t seed = seeds[idx];
        Dataset<double> train, test;
        if (have_data && have_test) {
            train = *full;
            test = *fixed_test;
        } else if (have_data) {
            auto [tr, te] = split(*full, SplitSpec{real(cfg, "train-fraction"), seed});
            train = std::move(tr);
            test = std::move(te);
        } else {
            SyntheticSpec s;
            s.n = Eigen::Index(integer(cfg, "n"));
            s.d = Eigen::Index(integer(cfg, "d"));
            s.sigma_x_sq = real(cfg, "sigma-x-sq");
            s.sigma_sq = noise.sigma_sq;
            s.theta_star_norm_sq = real(cfg, "theta-star-norm-sq");
            s.seed = seed;
            auto sp = generate_synthetic_split(s, Eigen::Index(integer(cfg, "n-test")));
            train = std::move(sp.train);
            test = std::move(sp.test);
        }
        if (standardize) {
            auto st = standardize_fit_transform(train, test);
            train = std::move(st.train);
            test = std::move(st.test);
        }
        const IsotropicPrior prior(prior_variance(cfg, train.d()));

        const auto bayes = bayes_posterior(train, noise, prior);
        const RobustGibbsTarget<double> target(train, noise, prior, delta);
        const auto samples = hmc_sample_model<double>(target, hmc_config(cfg, seed));

        SeedOutcome& o = outcomes[idx];
        for (double r : radii) {
            RiskOptions ro;
            ro.mc_draws = mc_draws;
            ro.seed = seed;
            const auto b = expected_risk(bayes, test, noise, r, ro);
            o.rows.push_back({seed, "bayes", r, b.value, b.std_error});
        }
        for (double r : radii) {
            const auto q = expected_risk(samples, test, noise, r);
            o.rows.push_back({seed, "robust", r, q.value, q.std_error});
        }
        o.diag = {{"seed", seed},
                  {"n_train", train.n()},
                  {"n_test", test.n()},
                  {"d", train.d()},
                  {"sigma_p_sq", prior.sigma_p_sq},
                  {"acceptance_rate", samples.acceptance_rate},
                  {"step_size", samples.step_size},
                  {"divergences", samples.divergences}};
    });

    FitEvalResult result;
    result.diagnostics = json::array();
    for (auto& o : outcomes) {
        result.rows.insert(result.rows.end(), o.rows.begin(), o.rows.end());
        result.diagnostics.push_back(o.diag);
    }
    result.summary = json::array();
    for (const char* post : {"bayes", "robust"}) {
        for (double r : radii) {
            std::vector<double> vals, ses;
            for (const auto& row : result.rows)
                if (row.posterior == post && row.delta_hat == r) {
                    vals.push_back(row.risk);
                    ses.push_back(row.std_error);
                }
            json s = summarize(vals);
            s["posterior"] = post;
            s["delta_hat"] = r;
            s["metric"] = r == 0 ? "nll" : "adv_nll";
            s["mean_mc_se"] = summarize(ses)["mean"];
            result.summary.push_back(s);
        }
    }
    return result;
}

SweepResult cmd_sweep(const json& cfg)
{
    const auto seeds = seed_list(cfg);
    const auto theorems = theorem_list(cfg);
    std::vector<Eigen::Index> grid;
    for (const auto& v : cfg.at("n-grid")) {
        const double n = v.get<double>();
        detail::require(n >= 1 && n == std::floor(n), ErrorCode::InvalidArgument, "--n-grid entries must be integers >= 1");
        grid.push_back(Eigen::Index(n));
    }
    detail::require(!grid.empty(), ErrorCode::InvalidArgument, "--n-grid is empty");
    const Eigen::Index d = Eigen::Index(integer(cfg, "d"));
    const NoiseModel noise(real(cfg, "sigma-sq"));
    const IsotropicPrior prior(prior_variance(cfg, d));
    const DataDistributionSpec dist(real(cfg, "sigma-x-sq"), real(cfg, "theta-star-norm-sq"));
    const PerturbationBudget budget(real(cfg, "delta"), real(cfg, "delta-hat"));
    const double beta = real(cfg, "beta");
    CertificateOptions opts;
    opts.coefficients = coefficient_set(cfg);
    const Eigen::Index n_test = Eigen::Index(integer(cfg, "n-test"));
    const int mc_draws = int(integer(cfg, "mc-draws"));
    const bool need_robust = std::any_of(theorems.begin(), theorems.end(), [](TheoremId t) { return is_robust(t); });

    const std::size_t cells = grid.size() * seeds.size();
    std::vector<std::vector<SweepRow>> per_cell(cells);
    parallel_for(cells, int(integer(cfg, "jobs")), [&](std::size_t idx) {
        const Eigen::Index n = grid[idx / seeds.size()];
        const std::uint64_t seed = seeds[idx % seeds.size()];
        SyntheticSpec s;
        s.n = n;
        s.d = d;
        s.sigma_x_sq = dist.sigma_x_sq;
        s.sigma_sq = noise.sigma_sq;
        s.theta_star_norm_sq = dist.theta_star_norm_sq;
        s.seed = seed;
        const auto sp = generate_synthetic_split(s, n_test);

        const auto bayes = bayes_posterior(sp.train, noise, prior);
        std::optional<SampleSet<double>> robust;
        if (need_robust) {
            const RobustGibbsTarget<double> target(sp.train, noise, prior, budget.delta_train);
            robust = hmc_sample_model<double>(target, hmc_config(cfg, seed));
        }
        RiskOptions ro;
        ro.include_log_normalizer = false;
        ro.mc_draws = mc_draws;
        ro.seed = seed;
        for (TheoremId id : theorems) {
            const CertificateReport rep = certify_report(id, sp.train, noise, prior, dist, budget, beta, opts);
            const double radius = is_adversarial(id) ? budget.delta_test : 0.0;
            const RiskEstimate risk = is_robust(id) ? expected_risk(*robust, sp.test, noise, radius, ro)
                                                    : expected_risk(bayes, sp.test, noise, radius, ro);
            per_cell[idx].push_back({n, seed, id, rep.precondition_ok, rep.bound_value, risk.value, risk.std_error});
        }
    });

    SweepResult result;
    for (auto& c : per_cell) result.rows.insert(result.rows.end(), c.begin(), c.end());
    result.summary = json::array();
    for (TheoremId id : theorems)
        for (Eigen::Index n : grid) {
            std::vector<double> bounds, risks;
            std::size_t holds = 0, total = 0, failed = 0;
            for (const auto& r : result.rows) {
                if (r.theorem != id || r.n != n) continue;
                ++total;
                if (!r.precondition_ok) {
                    ++failed;
                    continue;
                }
                bounds.push_back(r.bound);
                risks.push_back(r.risk);
                holds += r.bound >= r.risk ? 1 : 0;
            }
            result.summary.push_back({{"theorem", std::string(to_string(id))},
                                      {"n", n},
                                      {"rows", total},
                                      {"precondition_failures", failed},
                                      {"bound_holds", holds},
                                      {"bound", bounds.empty() ? json(nullptr) : summarize(bounds)},
                                      {"risk", risks.empty() ? json(nullptr) : summarize(risks)}});
        }
    return result;
}

std::string metrics_csv(const FitEvalResult& r)
{
    std::ostringstream os;
    os << "seed,posterior,delta_hat,risk,std_error\n";
    for (const auto& row : r.rows)
        os << row.seed << ',' << row.posterior << ',' << io::format_double(row.delta_hat) << ','
           << io::format_double(row.risk) << ',' << io::format_double(row.std_error) << '\n';
    return os.str();
}

std::string sweep_csv(const SweepResult& r)
{
    std::ostringstream os;
    os << "n,seed,theorem,precondition_ok,bound,empirical_risk,risk_se,bound_holds\n";
    for (const auto& row : r.rows) {
        os << row.n << ',' << row.seed << ',' << to_string(row.theorem) << ',' << (row.precondition_ok ? 1 : 0)
           << ',' << (row.precondition_ok ? io::format_double(row.bound) : std::string()) << ','
           << io::format_double(row.risk) << ',' << io::format_double(row.risk_se) << ','
           << (row.precondition_ok && row.bound >= row.risk ? 1 : 0) << '\n';
    }
    return os.str();
}

} // namespace certbayes::cli
