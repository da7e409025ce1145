#include <certbayes/io.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace certbayes::io {

namespace {

json number(double v)
{
    if (std::isnan(v)) return nullptr;
    return v;
}

double read_number(const json& j)
{
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    return j.get<double>();
}

json matrix_json(const Eigen::MatrixXd& m)
{
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(number(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_json(const Eigen::VectorXd& v)
{
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v[i]));
    return out;
}

Eigen::MatrixXd matrix_from(const json& j, Eigen::Index cols_hint = -1)
{
    const Eigen::Index rows = Eigen::Index(j.size());
    const Eigen::Index cols = rows > 0 ? Eigen::Index(j.at(0).size()) : std::max<Eigen::Index>(cols_hint, 0);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        detail::require(Eigen::Index(j.at(i).size()) == cols, ErrorCode::ParseError, "ragged matrix in JSON");
        for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = read_number(j.at(i).at(c));
    }
    return m;
}

Eigen::VectorXd vector_from(const json& j)
{
    Eigen::VectorXd v(Eigen::Index(j.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = read_number(j.at(i));
    return v;
}

const char* metric_name(MetricKind k)
{
    switch (k) {
        case MetricKind::Unit: return "unit";
        case MetricKind::Diagonal: return "diagonal";
        case MetricKind::Dense: return "dense";
    }
    return "dense";
}

MetricKind metric_from(const std::string& s)
{
    if (s == "unit") return MetricKind::Unit;
    if (s == "diagonal") return MetricKind::Diagonal;
    if (s == "dense") return MetricKind::Dense;
    throw Error(ErrorCode::InvalidArgument, "unknown metric '" + s + "'");
}

const char* coefficients_name(CoefficientSet c)
{
    return c == CoefficientSet::Derived ? "derived" : "published";
}

std::string csv_number(double v)
{
    return std::isnan(v) ? std::string() : format_double(v);
}

} // namespace

std::string format_double(double v)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

json to_json(const NoiseModel& v) { return {{"sigma_sq", v.sigma_sq}}; }
json to_json(const IsotropicPrior& v) { return {{"sigma_p_sq", v.sigma_p_sq}}; }
json to_json(const PerturbationBudget& v) { return {{"delta", v.delta_train}, {"delta_hat", v.delta_test}}; }

json to_json(const DataDistributionSpec& v)
{
    return {{"sigma_x_sq", v.sigma_x_sq}, {"theta_star_norm_sq", v.theta_star_norm_sq}};
}

json to_json(const Dataset<double>& v)
{
    return {{"n", v.n()}, {"d", v.d()}, {"X", matrix_json(v.X)}, {"Y", vector_json(v.Y)}};
}

json to_json(const GaussianPosterior<double>& v)
{
    return {{"mean", vector_json(v.mean)}, {"precision", matrix_json(v.precision.matrix())}};
}

json to_json(const SampleSet<double>& v)
{
    return {{"seed", v.seed},
            {"acceptance_rate", v.acceptance_rate},
            {"step_size", v.step_size},
            {"divergences", v.divergences},
            {"dim", v.dim()},
            {"draws", matrix_json(v.draws)}};
}

json to_json(const Precondition& v)
{
    return {{"name", v.name}, {"ok", v.ok}, {"detail", v.detail}, {"failure_kind", v.failure_kind}};
}

json to_json(const CertificateComponents& v)
{
    return {{"logdet_term", v.logdet_term},         {"quad_term", v.quad_term},
            {"v_logdet_term", v.v_logdet_term},     {"v_quad_term", v.v_quad_term},
            {"confidence_term", v.confidence_term}, {"cgf_term", v.cgf_term},
            {"extra_term", v.extra_term}};
}

json to_json(const CertificateReport& v)
{
    json pre = json::array();
    for (const auto& p : v.preconditions) pre.push_back(to_json(p));
    return {{"theorem_id", std::string(to_string(v.theorem_id))},
            {"bound_value", number(v.bound_value)},
            {"c", v.cgf_c},
            {"s_sq", v.cgf_s_sq},
            {"t", v.t},
            {"beta", v.beta},
            {"precondition_ok", v.precondition_ok},
            {"preconditions", pre},
            {"components", to_json(v.components)},
            {"coefficients", coefficients_name(v.coefficients)},
            {"formulation", v.formulation},
            {"inputs_digest", v.inputs_digest},
            {"plug_in", v.plug_in},
            {"status", v.plug_in ? "plug-in, not certified" : "certified"},
            {"n", v.n},
            {"d", v.d}};
}

json to_json(const HmcConfig& v)
{
    return {{"n_samples", v.n_samples},   {"n_warmup", v.n_warmup},
            {"leapfrog_steps", v.leapfrog_steps}, {"target_accept", v.target_accept},
            {"seed", v.seed},             {"metric", metric_name(v.metric)},
            {"step_jitter", v.step_jitter}};
}

json to_json(const SyntheticSpec& v)
{
    return {{"n", v.n},
            {"d", v.d},
            {"sigma_x_sq", v.sigma_x_sq},
            {"sigma_sq", v.sigma_sq},
            {"theta_star_norm_sq", v.theta_star_norm_sq},
            {"seed", v.seed}};
}

json to_json(const StandardizationStats& v)
{
    return {{"feature_mean", vector_json(v.feature_mean)},
            {"feature_sd", vector_json(v.feature_sd)},
            {"label_mean", v.label_mean},
            {"label_sd", v.label_sd},
            {"variance_divisor", v.divisor}};
}

template <> NoiseModel from_json<NoiseModel>(const json& j) { return NoiseModel(j.at("sigma_sq").get<double>()); }

template <> IsotropicPrior from_json<IsotropicPrior>(const json& j)
{
    return IsotropicPrior(j.at("sigma_p_sq").get<double>());
}

template <> PerturbationBudget from_json<PerturbationBudget>(const json& j)
{
    return PerturbationBudget(j.at("delta").get<double>(), j.at("delta_hat").get<double>());
}

template <> DataDistributionSpec from_json<DataDistributionSpec>(const json& j)
{
    return DataDistributionSpec(j.at("sigma_x_sq").get<double>(), j.at("theta_star_norm_sq").get<double>());
}

template <> Dataset<double> from_json<Dataset<double>>(const json& j)
{
    const Eigen::MatrixXd x = matrix_from(j.at("X"), j.value("d", Eigen::Index(-1)));
    const Eigen::VectorXd y = vector_from(j.at("Y"));
    return validate_dataset(x, y);
}

template <> GaussianPosterior<double> from_json<GaussianPosterior<double>>(const json& j)
{
    Eigen::VectorXd mean = vector_from(j.at("mean"));
    SpdMatrix<double> precision(matrix_from(j.at("precision")));
    detail::require_same_dim(mean.size(), precision.dim(), "posterior mean vs precision");
    return {std::move(mean), std::move(precision)};
}

template <> SampleSet<double> from_json<SampleSet<double>>(const json& j)
{
    SampleSet<double> s;
    s.draws = matrix_from(j.at("draws"), j.value("dim", Eigen::Index(-1)));
    s.seed = j.at("seed").get<std::uint64_t>();
    s.acceptance_rate = j.at("acceptance_rate").get<double>();
    s.step_size = j.at("step_size").get<double>();
    s.divergences = j.at("divergences").get<int>();
    return s;
}

template <> Precondition from_json<Precondition>(const json& j)
{
    return {j.at("name").get<std::string>(), j.at("ok").get<bool>(), j.at("detail").get<std::string>(),
            j.at("failure_kind").get<std::string>()};
}

template <> CertificateComponents from_json<CertificateComponents>(const json& j)
{
    CertificateComponents c;
    c.logdet_term = j.at("logdet_term").get<double>();
    c.quad_term = j.at("quad_term").get<double>();
    c.v_logdet_term = j.at("v_logdet_term").get<double>();
    c.v_quad_term = j.at("v_quad_term").get<double>();
    c.confidence_term = j.at("confidence_term").get<double>();
    c.cgf_term = j.at("cgf_term").get<double>();
    c.extra_term = j.at("extra_term").get<double>();
    return c;
}

template <> CertificateReport from_json<CertificateReport>(const json& j)
{
    CertificateReport r;
    r.theorem_id = theorem_from_string(j.at("theorem_id").get<std::string>());
    r.bound_value = read_number(j.at("bound_value"));
    r.cgf_c = j.at("c").get<double>();
    r.cgf_s_sq = j.at("s_sq").get<double>();
    r.t = j.at("t").get<double>();
    r.beta = j.at("beta").get<double>();
    r.precondition_ok = j.at("precondition_ok").get<bool>();
    for (const auto& p : j.at("preconditions")) r.preconditions.push_back(from_json<Precondition>(p));
    r.components = from_json<CertificateComponents>(j.at("components"));
    r.coefficients =
        j.at("coefficients").get<std::string>() == "published" ? CoefficientSet::AsPublished : CoefficientSet::Derived;
    r.formulation = j.at("formulation").get<std::string>();
    r.inputs_digest = j.at("inputs_digest").get<std::string>();
    r.plug_in = j.at("plug_in").get<bool>();
    r.n = j.at("n").get<Eigen::Index>();
    r.d = j.at("d").get<Eigen::Index>();
    return r;
}

template <> HmcConfig from_json<HmcConfig>(const json& j)
{
    HmcConfig c;
    c.n_samples = j.value("n_samples", c.n_samples);
    c.n_warmup = j.value("n_warmup", c.n_warmup);
    c.leapfrog_steps = j.value("leapfrog_steps", c.leapfrog_steps);
    c.target_accept = j.value("target_accept", c.target_accept);
    c.seed = j.value("seed", c.seed);
    c.metric = metric_from(j.value("metric", std::string("dense")));
    c.step_jitter = j.value("step_jitter", c.step_jitter);
    c.validate();
    return c;
}

template <> SyntheticSpec from_json<SyntheticSpec>(const json& j)
{
    SyntheticSpec s;
    s.n = j.value("n", s.n);
    s.d = j.value("d", s.d);
    s.sigma_x_sq = j.value("sigma_x_sq", s.sigma_x_sq);
    s.sigma_sq = j.value("sigma_sq", s.sigma_sq);
    s.theta_star_norm_sq = j.value("theta_star_norm_sq", s.theta_star_norm_sq);
    s.seed = j.value("seed", s.seed);
    s.validate();
    return s;
}

void write_draws_csv(const std::string& path, const SampleSet<double>& samples)
{
    std::ostringstream os;
    for (Eigen::Index j = 0; j < samples.dim(); ++j) os << (j ? "," : "") << "theta" << j + 1;
    os << '\n';
    for (Eigen::Index i = 0; i < samples.size(); ++i) {
        for (Eigen::Index j = 0; j < samples.dim(); ++j) os << (j ? "," : "") << format_double(samples.draws(i, j));
        os << '\n';
    }
    write_text_file(path, os.str());
}

std::string certificate_csv_header()
{
    return "theorem_id,bound_value,c,s_sq,t,beta,precondition_ok,n,d,coefficients,plug_in,inputs_digest";
}

std::string certificate_csv_row(const CertificateReport& r)
{
    std::ostringstream os;
    os << to_string(r.theorem_id) << ',' << csv_number(r.bound_value) << ',' << format_double(r.cgf_c) << ','
       << format_double(r.cgf_s_sq) << ',' << format_double(r.t) << ',' << format_double(r.beta) << ','
       << (r.precondition_ok ? 1 : 0) << ',' << r.n << ',' << r.d << ',' << coefficients_name(r.coefficients) << ','
       << (r.plug_in ? 1 : 0) << ',' << r.inputs_digest;
    return os.str();
}

json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    detail::require(bool(in), ErrorCode::Io, "cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, path + ": " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    detail::require(bool(out), ErrorCode::Io, "cannot write '" + path + "'");
    out << text;
    detail::require(bool(out), ErrorCode::Io, "write to '" + path + "' failed");
}

} // namespace certbayes::io
