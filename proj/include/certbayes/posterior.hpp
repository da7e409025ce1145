#pragma once

#include <certbayes/adversarial_loss.hpp>
#include <certbayes/model.hpp>
#include <certbayes/numerics.hpp>

#include <Eigen/Dense>

#include <cmath>

namespace certbayes {

/// precision = X^T X / sigma^2 + I / sigma_p^2, mean = precision^{-1} X^T Y / sigma^2.
template <typename Scalar>
GaussianPosterior<Scalar> bayes_posterior(const Dataset<Scalar>& data, const NoiseModel& noise,
                                          const IsotropicPrior& prior)
{
    const Scalar s2 = Scalar(noise.sigma_sq);
    auto precision = shifted_gram(data.X, Scalar(1) / Scalar(prior.sigma_p_sq), Scalar(1) / s2, GramSide::Features);
    VectorX<Scalar> mean = precision.solve(data.X.transpose() * data.Y / s2);
    return {std::move(mean), std::move(precision)};
}

/**
 * Unnormalized log density of the robust Gibbs posterior,
 *
 *   -sum_i a_i^2 / (2 sigma^2) - |theta|^2 / (2 sigma_p^2),  a_i = |x_i^T theta - y_i| + delta |theta|,
 *
 * with theta-independent constants dropped. At the kinks the gradient uses
 * sign(0) = +1 for residuals and drops the delta term at theta = 0.
 */
template <typename Scalar>
class RobustGibbsTarget
{
public:
    using Vector = VectorX<Scalar>;

    RobustGibbsTarget(const Dataset<Scalar>& data, const NoiseModel& noise, const IsotropicPrior& prior,
                      Scalar delta)
        : data_(data),
          inv_s2_(Scalar(1) / Scalar(noise.sigma_sq)),
          inv_p2_(Scalar(1) / Scalar(prior.sigma_p_sq)),
          delta_(Scalar(detail::require_nonnegative(double(delta), "delta")))
    {}

    Eigen::Index dim() const noexcept { return data_.d(); }

    Scalar log_density(const Vector& theta) const
    {
        detail::check_theta(theta, data_);
        const Scalar shift = delta_ * theta.norm();
        const Scalar sq = ((data_.X * theta - data_.Y).array().abs() + shift).square().sum();
        return -Scalar(0.5) * inv_s2_ * sq - Scalar(0.5) * inv_p2_ * theta.squaredNorm();
    }

    Scalar value_and_gradient(const Vector& theta, Vector& grad) const
    {
        detail::check_theta(theta, data_);
        const Scalar norm = theta.norm();
        const Vector r = data_.X * theta - data_.Y;
        Vector as(r.size()); // a_i * s_i
        Scalar sum_a = 0, sum_a2 = 0;
        for (Eigen::Index i = 0; i < r.size(); ++i) {
            const Scalar a = std::abs(r[i]) + delta_ * norm;
            as[i] = r[i] < 0 ? -a : a;
            sum_a += a;
            sum_a2 += a * a;
        }
        grad.noalias() = -inv_s2_ * (data_.X.transpose() * as);
        if (norm > 0 && delta_ > 0) grad -= (inv_s2_ * delta_ * sum_a / norm) * theta;
        grad -= inv_p2_ * theta;
        return -Scalar(0.5) * inv_s2_ * sum_a2 - Scalar(0.5) * inv_p2_ * theta.squaredNorm();
    }

    Vector gradient(const Vector& theta) const
    {
        Vector g(theta.size());
        value_and_gradient(theta, g);
        return g;
    }

private:
    const Dataset<Scalar>& data_;
    Scalar inv_s2_;
    Scalar inv_p2_;
    Scalar delta_;
};

template <typename Scalar>
Scalar robust_log_density_unnorm(const VectorX<Scalar>& theta, const Dataset<Scalar>& data,
                                 const NoiseModel& noise, const IsotropicPrior& prior, Scalar delta)
{
    return RobustGibbsTarget<Scalar>(data, noise, prior, delta).log_density(theta);
}

template <typename Scalar>
VectorX<Scalar> robust_log_density_grad(const VectorX<Scalar>& theta, const Dataset<Scalar>& data,
                                        const NoiseModel& noise, const IsotropicPrior& prior, Scalar delta)
{
    return RobustGibbsTarget<Scalar>(data, noise, prior, delta).gradient(theta);
}

/// Gaussian log posterior up to a constant; the delta = 0 reference.
template <typename Scalar>
Scalar gaussian_log_density_unnorm(const GaussianPosterior<Scalar>& post, const VectorX<Scalar>& theta)
{
    const VectorX<Scalar> diff = theta - post.mean;
    return -Scalar(0.5) * diff.dot(post.precision.matrix() * diff);
}

} // namespace certbayes
