#pragma once

#include <certbayes/exponential_family.hpp>
#include <certbayes/model.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

namespace certbayes {

template <typename Scalar>
struct AdvLossValue
{
    Scalar value = 0;
    std::vector<int> signs;                    // s_i, one per point
    std::optional<MatrixX<Scalar>> perturbed;  // worst-case x~_i as rows, when requested
};

template <typename Scalar>
struct Perturbation
{
    VectorX<Scalar> x_tilde;
    int sign = 1;
    bool zero_parameter = false; // theta == 0: the adversary has no effect
};

namespace detail {

inline int sign_of(double r) noexcept { return r < 0 ? -1 : 1; }

template <typename Scalar>
void check_theta(const VectorX<Scalar>& theta, const Dataset<Scalar>& data)
{
    require_same_dim(theta.size(), data.d(), "theta length vs feature count");
}

// Shared by the clean and the adversarial loss so that delta = 0 gives the
// very same floating-point value.
template <typename Scalar>
Scalar gaussian_loss_from_residuals(const VectorX<Scalar>& r, Scalar shift, Scalar sigma_sq)
{
    const Scalar sq = (r.array().abs() + shift).square().sum();
    const Scalar n = Scalar(r.size());
    return Scalar(0.5) * n * std::log(Scalar(2 * std::numbers::pi) * sigma_sq) + sq / (Scalar(2) * sigma_sq);
}

} // namespace detail

/// (n/2) log(2 pi sigma^2) + |Y - X theta|^2 / (2 sigma^2)
template <typename Scalar>
Scalar gaussian_nll(const VectorX<Scalar>& theta, const Dataset<Scalar>& data, const NoiseModel& noise)
{
    detail::check_theta(theta, data);
    const VectorX<Scalar> r = data.X * theta - data.Y;
    return detail::gaussian_loss_from_residuals<Scalar>(r, Scalar(0), Scalar(noise.sigma_sq));
}

/**
 * Worst-case NLL over |x~_i - x_i| <= delta for every point:
 * (n/2) log(2 pi sigma^2) + sum_i (|r_i| + delta |theta|)^2 / (2 sigma^2).
 */
template <typename Scalar>
AdvLossValue<Scalar> gaussian_adv_nll(const VectorX<Scalar>& theta, const Dataset<Scalar>& data,
                                      const NoiseModel& noise, Scalar delta, bool with_points = false)
{
    detail::check_theta(theta, data);
    detail::require_nonnegative(double(delta), "delta");
    const VectorX<Scalar> r = data.X * theta - data.Y;
    const Scalar norm = theta.norm();

    AdvLossValue<Scalar> out;
    out.value = detail::gaussian_loss_from_residuals<Scalar>(r, delta * norm, Scalar(noise.sigma_sq));
    out.signs.resize(r.size());
    for (Eigen::Index i = 0; i < r.size(); ++i) out.signs[i] = detail::sign_of(r[i]);
    if (with_points) {
        MatrixX<Scalar> xt = data.X;
        if (norm > 0) {
            const VectorX<Scalar> dir = theta / norm;
            for (Eigen::Index i = 0; i < r.size(); ++i) xt.row(i) += (delta * out.signs[i]) * dir.transpose();
        }
        out.perturbed = std::move(xt);
    }
    return out;
}

/// x~ = x + delta * sign(theta^T x - y) * theta / |theta|.
template <typename Scalar>
Perturbation<Scalar> gaussian_adv_perturbation(const VectorX<Scalar>& theta, const VectorX<Scalar>& x, Scalar y,
                                               Scalar delta)
{
    detail::require_same_dim(theta.size(), x.size(), "theta length vs x length");
    detail::require_nonnegative(double(delta), "delta");
    Perturbation<Scalar> out;
    out.sign = detail::sign_of(theta.dot(x) - y);
    const Scalar norm = theta.norm();
    if (norm == 0) {
        out.x_tilde = x;
        out.zero_parameter = true;
        return out;
    }
    out.x_tilde = x + (delta * out.sign / norm) * theta;
    return out;
}

/**
 * Adversarial exponential-family NLL of one point, evaluated in the direct
 * form max_s psi(eta_s) - y eta_s - base_log_measure(y) with
 * eta_s = theta^T x + s delta |theta|. s = +1 wins ties.
 */
template <typename Scalar>
AdvLossValue<Scalar> expfam_adv_nll_point(const VectorX<Scalar>& theta, const VectorX<Scalar>& x, Scalar y,
                                          Scalar delta, const ExponentialFamily& fam, bool with_points = false)
{
    detail::require_same_dim(theta.size(), x.size(), "theta length vs x length");
    detail::require_nonnegative(double(delta), "delta");
    const Scalar eta = theta.dot(x);
    const Scalar norm = theta.norm();
    const Scalar plus = expfam_nll(fam, eta + delta * norm, y);
    const Scalar minus = expfam_nll(fam, eta - delta * norm, y);

    AdvLossValue<Scalar> out;
    const int s = minus > plus ? -1 : 1;
    out.value = s > 0 ? plus : minus;
    out.signs = {s};
    if (with_points) {
        VectorX<Scalar> xt = x;
        if (norm > 0) xt += (delta * s / norm) * theta;
        out.perturbed = MatrixX<Scalar>(xt.transpose());
    }
    return out;
}

/// Sum of expfam_adv_nll_point over the dataset.
template <typename Scalar>
AdvLossValue<Scalar> expfam_adv_nll(const VectorX<Scalar>& theta, const Dataset<Scalar>& data, Scalar delta,
                                    const ExponentialFamily& fam)
{
    detail::check_theta(theta, data);
    AdvLossValue<Scalar> out;
    out.signs.reserve(data.n());
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        const VectorX<Scalar> xi = data.X.row(i).transpose();
        auto p = expfam_adv_nll_point<Scalar>(theta, xi, data.Y[i], delta, fam);
        out.value += p.value;
        out.signs.push_back(p.signs[0]);
    }
    return out;
}

template <typename Scalar>
struct LossSandwich
{
    Scalar lower;
    Scalar upper;
};

/**
 * Quadratic bounds around the Gaussian adversarial loss, from
 * a^2 + b^2 <= (a + b)^2 <= 2a^2 + 2b^2 for a, b >= 0.
 */
template <typename Scalar>
LossSandwich<Scalar> adv_loss_sandwich(const VectorX<Scalar>& theta, const Dataset<Scalar>& data,
                                       const NoiseModel& noise, Scalar delta)
{
    detail::check_theta(theta, data);
    detail::require_nonnegative(double(delta), "delta");
    const VectorX<Scalar> r = data.X * theta - data.Y;
    const Scalar s2 = Scalar(noise.sigma_sq);
    const Scalar n = Scalar(data.n());
    const Scalar c = Scalar(0.5) * n * std::log(Scalar(2 * std::numbers::pi) * s2);
    const Scalar base = r.squaredNorm() + n * theta.squaredNorm() * delta * delta;
    return {c + base / (Scalar(2) * s2), c + Scalar(2) * base / (Scalar(2) * s2)};
}

} // namespace certbayes
