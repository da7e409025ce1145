#pragma once

#include <certbayes/data.hpp>
#include <certbayes/hmc.hpp>
#include <certbayes/model.hpp>

#include <json.hpp>

#include <string>

namespace certbayes::io {

using json = nlohmann::json;

// Doubles are written in shortest round-trip form, so every finite value
// reads back bit-identically. NaN is written as null and read back as NaN.

json to_json(const NoiseModel& v);
json to_json(const IsotropicPrior& v);
json to_json(const PerturbationBudget& v);
json to_json(const DataDistributionSpec& v);
json to_json(const Dataset<double>& v);
json to_json(const GaussianPosterior<double>& v);
json to_json(const SampleSet<double>& v);
json to_json(const Precondition& v);
json to_json(const CertificateComponents& v);
json to_json(const CertificateReport& v);
json to_json(const HmcConfig& v);
json to_json(const SyntheticSpec& v);
json to_json(const StandardizationStats& v);

template <typename T>
T from_json(const json& j);

template <> NoiseModel from_json<NoiseModel>(const json& j);
template <> IsotropicPrior from_json<IsotropicPrior>(const json& j);
template <> PerturbationBudget from_json<PerturbationBudget>(const json& j);
template <> DataDistributionSpec from_json<DataDistributionSpec>(const json& j);
template <> Dataset<double> from_json<Dataset<double>>(const json& j);
template <> GaussianPosterior<double> from_json<GaussianPosterior<double>>(const json& j);
template <> SampleSet<double> from_json<SampleSet<double>>(const json& j);
template <> Precondition from_json<Precondition>(const json& j);
template <> CertificateComponents from_json<CertificateComponents>(const json& j);
template <> CertificateReport from_json<CertificateReport>(const json& j);
template <> HmcConfig from_json<HmcConfig>(const json& j);
template <> SyntheticSpec from_json<SyntheticSpec>(const json& j);

std::string format_double(double v);

/// One row per draw, columns theta1..thetad.
void write_draws_csv(const std::string& path, const SampleSet<double>& samples);

std::string certificate_csv_header();
std::string certificate_csv_row(const CertificateReport& rep);

json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

} // namespace certbayes::io
