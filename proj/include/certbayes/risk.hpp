#pragma once

#include <certbayes/model.hpp>
#include <certbayes/numerics.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace certbayes {

struct RiskOptions
{
    bool include_log_normalizer = true; // add (1/2) log(2 pi sigma^2) per point
    int mc_draws = 4000;                // for Gaussian posteriors when delta_test > 0
    std::uint64_t seed = 0;
    Eigen::Index chunk = 256;           // draws evaluated per matrix product
};

struct RiskEstimate
{
    double value = 0;
    double std_error = 0;
    Eigen::Index draws = 0; // 0 for an exact evaluation
};

namespace detail {

/// Mean per-point (adversarial) NLL on `test` for each row of `thetas`.
template <typename Scalar>
VectorX<Scalar> per_draw_risk(const MatrixX<Scalar>& thetas, const Dataset<Scalar>& test, const NoiseModel& noise,
                              Scalar delta, const RiskOptions& opts)
{
    require_same_dim(thetas.cols(), test.d(), "posterior dimension vs test features");
    const Scalar s2 = Scalar(noise.sigma_sq);
    const Scalar offset = opts.include_log_normalizer ? Scalar(0.5) * std::log(Scalar(2 * std::numbers::pi) * s2)
                                                      : Scalar(0);
    const Scalar m = Scalar(test.n());
    VectorX<Scalar> out(thetas.rows());
    const Eigen::Index chunk = std::max<Eigen::Index>(1, opts.chunk);
    for (Eigen::Index start = 0; start < thetas.rows(); start += chunk) {
        const Eigen::Index k = std::min(chunk, thetas.rows() - start);
        const auto block = thetas.middleRows(start, k);
        MatrixX<Scalar> r = test.X * block.transpose();
        r.colwise() -= test.Y;
        for (Eigen::Index j = 0; j < k; ++j) {
            const Scalar shift = delta * block.row(j).norm();
            const Scalar sq = (r.col(j).array().abs() + shift).square().sum();
            out[start + j] = sq / (Scalar(2) * s2 * m) + offset;
        }
    }
    return out;
}

/// Standard error of the mean by non-overlapping batch means (about sqrt(N) batches).
template <typename Scalar>
double batch_means_se(const VectorX<Scalar>& v)
{
    const Eigen::Index n = v.size();
    if (n < 2) return 0.0;
    const Eigen::Index batches = std::max<Eigen::Index>(2, Eigen::Index(std::sqrt(double(n))));
    const Eigen::Index size = n / batches;
    if (size < 1) return 0.0;
    Eigen::VectorXd means(batches);
    for (Eigen::Index b = 0; b < batches; ++b) means[b] = double(v.segment(b * size, size).mean());
    const double mu = means.mean();
    const double var = (means.array() - mu).square().sum() / double(batches - 1);
    return std::sqrt(var / double(batches));
}

template <typename Scalar>
double iid_se(const VectorX<Scalar>& v)
{
    const Eigen::Index n = v.size();
    if (n < 2) return 0.0;
    const double mu = double(v.mean());
    const double var = double((v.array() - Scalar(mu)).square().sum()) / double(n - 1);
    return std::sqrt(var / double(n));
}

} // namespace detail

/// Exact draws theta = mean + L^{-T} z from N(mean, precision^{-1}), precision = L L^T.
template <typename Scalar>
SampleSet<Scalar> draw_gaussian_posterior(const GaussianPosterior<Scalar>& post, int count, std::uint64_t seed)
{
    detail::require(count > 0, ErrorCode::InvalidArgument, "draw count must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    const Eigen::Index d = post.dim();
    MatrixX<Scalar> z(d, count);
    for (Eigen::Index j = 0; j < count; ++j)
        for (Eigen::Index i = 0; i < d; ++i) z(i, j) = Scalar(normal(rng));
    const MatrixX<Scalar> offsets = post.precision.llt().matrixU().solve(z);
    SampleSet<Scalar> out;
    out.draws = (offsets.colwise() + post.mean).transpose();
    out.seed = seed;
    out.acceptance_rate = 1;
    return out;
}

/// Posterior expected test risk from retained draws; batch-means standard error.
template <typename Scalar>
RiskEstimate expected_risk(const SampleSet<Scalar>& samples, const Dataset<Scalar>& test, const NoiseModel& noise,
                           Scalar delta_test, const RiskOptions& opts = {})
{
    detail::require_nonnegative(double(delta_test), "delta_hat");
    detail::require(samples.size() > 0, ErrorCode::Empty, "sample set has no draws");
    const VectorX<Scalar> v = detail::per_draw_risk(samples.draws, test, noise, delta_test, opts);
    return {double(v.mean()), detail::batch_means_se(v), v.size()};
}

/**
 * Posterior expected test risk of the exact Bayes posterior. Closed form at
 * delta_test = 0, where each point contributes
 * [(y - x^T mean)^2 + x^T precision^{-1} x] / (2 sigma^2); Monte Carlo otherwise.
 */
template <typename Scalar>
RiskEstimate expected_risk(const GaussianPosterior<Scalar>& post, const Dataset<Scalar>& test,
                           const NoiseModel& noise, Scalar delta_test, const RiskOptions& opts = {})
{
    detail::require_nonnegative(double(delta_test), "delta_hat");
    detail::require_same_dim(post.dim(), test.d(), "posterior dimension vs test features");
    if (delta_test > 0) {
        const auto draws = draw_gaussian_posterior(post, opts.mc_draws, opts.seed);
        const VectorX<Scalar> v = detail::per_draw_risk(draws.draws, test, noise, delta_test, opts);
        return {double(v.mean()), detail::iid_se(v), v.size()};
    }
    const Scalar s2 = Scalar(noise.sigma_sq);
    const VectorX<Scalar> r = test.Y - test.X * post.mean;
    const MatrixX<Scalar> w = post.precision.llt().matrixL().solve(test.X.transpose());
    const Scalar spread = w.squaredNorm(); // sum_i x_i^T precision^{-1} x_i
    const Scalar m = Scalar(test.n());
    Scalar value = (r.squaredNorm() + spread) / (Scalar(2) * s2 * m);
    if (opts.include_log_normalizer) value += Scalar(0.5) * std::log(Scalar(2 * std::numbers::pi) * s2);
    return {double(value), 0.0, 0};
}

} // namespace certbayes
