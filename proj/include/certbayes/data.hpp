#pragma once

#include <certbayes/model.hpp>

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace certbayes {

/// x ~ N(0, sigma_x_sq I_d), y = x^T theta* + eps, eps ~ N(0, sigma_sq), |theta*|^2 fixed.
struct SyntheticSpec
{
    Eigen::Index n = 100;
    Eigen::Index d = 5;
    double sigma_x_sq = 1.0;
    double sigma_sq = 1.0 / 9.0;
    double theta_star_norm_sq = 0.5;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SyntheticData
{
    Dataset<double> data;
    Eigen::VectorXd theta_star;
};

struct SyntheticSplit
{
    Dataset<double> train;
    Dataset<double> test;
    Eigen::VectorXd theta_star;
};

/**
 * Draw order from one mt19937_64(seed) stream: theta* direction, then X
 * row by row, then the noise. theta* is uniform on the sphere of radius
 * sqrt(theta_star_norm_sq).
 */
SyntheticData generate_synthetic(const SyntheticSpec& spec);

/// Training set identical to generate_synthetic(spec); the test set continues the same stream.
SyntheticSplit generate_synthetic_split(const SyntheticSpec& spec, Eigen::Index n_test);

using TargetColumn = std::variant<std::string, std::size_t>;

struct CsvTable
{
    Dataset<double> data;
    std::vector<std::string> feature_names;
    std::string target_name;
    std::vector<std::string> skipped_columns; // columns with no numeric cell at all
};

/**
 * Comma-separated file with one header row. Features are every numeric
 * non-target column in file order; columns without a single numeric cell are
 * skipped. Empty or malformed numeric cells are a ParseError.
 */
CsvTable load_csv_table(const std::string& path, const TargetColumn& target);

inline Dataset<double> load_csv(const std::string& path, const TargetColumn& target)
{
    return load_csv_table(path, target).data;
}

/// Shortest round-trip formatting, so load_csv reproduces every double exactly.
void write_csv(const std::string& path, const Dataset<double>& data, std::vector<std::string> feature_names = {},
               const std::string& target_name = "y");

struct StandardizationStats
{
    Eigen::VectorXd feature_mean;
    Eigen::VectorXd feature_sd;
    double label_mean = 0;
    double label_sd = 1;
    std::string divisor = "n"; // population variance
};

struct Standardized
{
    Dataset<double> train;
    Dataset<double> test;
    StandardizationStats stats;
};

/// Zero mean, unit (population) variance for features and label, fitted on train only.
Standardized standardize_fit_transform(const Dataset<double>& train, const Dataset<double>& test);

struct SplitSpec
{
    double train_fraction = 0.7;
    std::uint64_t seed = 0;
};

/// Shuffled split; floor(n * fraction) rows go to train, the rest to test.
std::pair<Dataset<double>, Dataset<double>> split(const Dataset<double>& data, const SplitSpec& spec);

} // namespace certbayes
