#pragma once

#include <certbayes/errors.hpp>
#include <certbayes/model.hpp>

#include <cmath>
#include <functional>
#include <numbers>
#include <string>

namespace certbayes {

/**
 * One-parameter exponential family in natural parameter eta:
 *
 *   log p(y | eta) = y * eta - psi(eta) + base_log_measure(y)
 *
 * so the negative log-likelihood is psi(eta) - y*eta - base_log_measure(y).
 * Custom families must supply base_log_measure themselves.
 */
struct ExponentialFamily
{
    std::string name;
    std::function<double(double)> psi;
    std::function<double(double)> psi_grad;
    std::function<double(double)> base_log_measure;
};

/// psi(eta) = sigma^2 eta^2 / 2; the mean is sigma^2 eta.
inline ExponentialFamily gaussian_family(double sigma_sq = 1.0)
{
    detail::require_positive(sigma_sq, "sigma_sq");
    const double log_norm = 0.5 * std::log(2.0 * std::numbers::pi * sigma_sq);
    return {"gaussian",
            [sigma_sq](double eta) { return 0.5 * sigma_sq * eta * eta; },
            [sigma_sq](double eta) { return sigma_sq * eta; },
            [sigma_sq, log_norm](double y) { return -y * y / (2.0 * sigma_sq) - log_norm; }};
}

inline double log1pexp(double x)
{
    return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline ExponentialFamily bernoulli_family()
{
    return {"bernoulli",
            [](double eta) { return log1pexp(eta); },
            [](double eta) {
                return eta >= 0 ? 1.0 / (1.0 + std::exp(-eta)) : std::exp(eta) / (1.0 + std::exp(eta));
            },
            [](double) { return 0.0; }};
}

inline ExponentialFamily poisson_family()
{
    return {"poisson",
            [](double eta) { return std::exp(eta); },
            [](double eta) { return std::exp(eta); },
            [](double y) { return -std::lgamma(y + 1.0); }};
}

/// psi(eta) - y*eta - base_log_measure(y), i.e. -log p(y | eta).
inline double expfam_nll(const ExponentialFamily& fam, double eta, double y)
{
    const double v = fam.psi(eta) - y * eta - fam.base_log_measure(y);
    detail::require(std::isfinite(v), ErrorCode::DomainViolation,
                    fam.name + " log-likelihood is not finite at eta=" + std::to_string(eta)
                        + ", y=" + std::to_string(y));
    return v;
}

inline double bregman_divergence(const ExponentialFamily& fam, double a, double b)
{
    const double pa = fam.psi(a), pb = fam.psi(b), gb = fam.psi_grad(b);
    detail::require(std::isfinite(pa) && std::isfinite(pb) && std::isfinite(gb), ErrorCode::DomainViolation,
                    fam.name + " psi diverges at a=" + std::to_string(a) + " or b=" + std::to_string(b));
    if (a == b) return 0.0;
    // rounding can push a tiny true divergence below zero
    return std::max(0.0, pa - pb - gb * (a - b));
}

} // namespace certbayes
