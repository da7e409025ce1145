#pragma once

#include <certbayes/errors.hpp>
#include <certbayes/model.hpp>
#include <certbayes/numerics.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace certbayes {

enum class CgfKind { Standard, Adversarial };

/// Sub-gamma constants: the loss CGF is bounded by s^2 t^2 / (2(1 - c t)) on t in (0, 1/c).
struct CgfConstants
{
    double c;
    double s_sq;
    double t;
    CgfKind kind;
};

namespace detail {

inline CgfConstants make_cgf(double c, double scale, double d, double snr, double t, CgfKind kind)
{
    require(t > 0 && t * c < 1, ErrorCode::CgfRangeViolation,
            "t*c must lie in (0, 1), got t=" + std::to_string(t) + ", c=" + std::to_string(c));
    const double s_sq = (scale / t) * (c * d - c * t + 1 + snr);
    return {c, s_sq, t, kind};
}

} // namespace detail

/// c = sigma_p^2 sigma_x^2 / sigma^2, s^2 = (1/t)(cd - ct + 1 + sigma_x^2 |theta*|^2 / sigma^2).
inline CgfConstants cgf_standard(const NoiseModel& noise, const IsotropicPrior& prior,
                                 const DataDistributionSpec& dist, Eigen::Index d, double t)
{
    const double c = prior.sigma_p_sq * dist.sigma_x_sq / noise.sigma_sq;
    const double snr = dist.sigma_x_sq * dist.theta_star_norm_sq / noise.sigma_sq;
    return detail::make_cgf(c, 1.0, double(d), snr, t, CgfKind::Standard);
}

/// c = 2 sigma_p^2 (sigma_x^2 + delta_hat^2) / sigma^2, s^2 = (2/t)(cd - ct + 1 + sigma_x^2 |theta*|^2 / sigma^2).
inline CgfConstants cgf_adversarial(const NoiseModel& noise, const IsotropicPrior& prior,
                                    const DataDistributionSpec& dist, Eigen::Index d, double delta_test, double t)
{
    detail::require_nonnegative(delta_test, "delta_hat");
    const double c = 2 * prior.sigma_p_sq * (dist.sigma_x_sq + delta_test * delta_test) / noise.sigma_sq;
    const double snr = dist.sigma_x_sq * dist.theta_star_norm_sq / noise.sigma_sq;
    return detail::make_cgf(c, 2.0, double(d), snr, t, CgfKind::Adversarial);
}

enum class Formulation {
    Auto,     ///< d x d when d <= n, otherwise n x n
    Features, ///< d x d matrices, n x n quadratic forms through Woodbury
    Samples,  ///< n x n matrices, d x d log-determinants through Sylvester
};

struct CertificateOptions
{
    CoefficientSet coefficients = CoefficientSet::Derived;
    Formulation formulation = Formulation::Auto;
};

namespace detail {

inline GramSide resolve(Formulation f, Eigen::Index n, Eigen::Index d)
{
    switch (f) {
        case Formulation::Features: return GramSide::Features;
        case Formulation::Samples: return GramSide::Samples;
        case Formulation::Auto: break;
    }
    return d <= n ? GramSide::Features : GramSide::Samples;
}

template <typename Scalar>
struct GramTerms
{
    Scalar logdet_d; // log det(a I_d + b X^T X)
    Scalar quad_n;   // Y^T (a I_n + b X X^T)^{-1} Y
};

template <typename Scalar>
GramTerms<Scalar> gram_terms(const Dataset<Scalar>& data, Scalar a, Scalar b, GramSide side)
{
    const Scalar n = Scalar(data.n()), d = Scalar(data.d());
    const auto m = shifted_gram(data.X, a, b, side);
    if (side == GramSide::Samples) return {m.logdet() - (n - d) * std::log(a), m.quad_form_inv(data.Y)};
    const VectorX<Scalar> h = data.X.transpose() * data.Y;
    return {m.logdet(), (data.Y.squaredNorm() - b * m.quad_form_inv(h)) / a};
}

inline double robust_k(Eigen::Index n, double delta, double s2, double p2)
{
    return 2.0 * double(n) * delta * delta * p2 / s2 + 1.0;
}

// Coefficient on Y^T U_n^{-1} Y inside the robust normalizer.
inline double robust_quad_coef(CoefficientSet set, double k, double s2)
{
    return set == CoefficientSet::Derived ? k / s2 : 1.0 / (k * s2);
}

inline std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

} // namespace detail

/// -log z of the Bayes posterior: (1/2) log det W_d + Y^T W_n^{-1} Y / (2 sigma^2), W = I + (sigma_p^2/sigma^2) Gram.
template <typename Scalar>
Scalar neg_log_z_bayes(const Dataset<Scalar>& data, const NoiseModel& noise, const IsotropicPrior& prior,
                       Formulation f = Formulation::Auto)
{
    const Scalar s2 = Scalar(noise.sigma_sq);
    const auto w = detail::gram_terms(data, Scalar(1), Scalar(prior.sigma_p_sq) / s2,
                                      detail::resolve(f, data.n(), data.d()));
    return Scalar(0.5) * w.logdet_d + w.quad_n / (Scalar(2) * s2);
}

/**
 * Upper bound on -log z of the robust posterior, from replacing the
 * adversarial loss by its quadratic upper sandwich:
 * (1/2) log det U_d + coef * Y^T U_n^{-1} Y with U = k I + (2 sigma_p^2/sigma^2) Gram,
 * k = 2 n delta^2 sigma_p^2 / sigma^2 + 1 and coef = k / sigma^2 (Derived)
 * or 1 / (k sigma^2) (AsPublished).
 */
template <typename Scalar>
Scalar neg_log_z_robust_upper(const Dataset<Scalar>& data, const NoiseModel& noise, const IsotropicPrior& prior,
                              Scalar delta, const CertificateOptions& opts = {})
{
    detail::require_nonnegative(double(delta), "delta");
    const double s2 = noise.sigma_sq, p2 = prior.sigma_p_sq;
    const double k = detail::robust_k(data.n(), double(delta), s2, p2);
    const auto u = detail::gram_terms(data, Scalar(k), Scalar(2 * p2 / s2),
                                      detail::resolve(opts.formulation, data.n(), data.d()));
    return Scalar(0.5) * u.logdet_d + Scalar(detail::robust_quad_coef(opts.coefficients, k, s2)) * u.quad_n;
}

/**
 * Hypothesis checks for one certificate at t = 1. Never throws; each entry
 * carries the inequality with values substituted.
 */
inline std::vector<Precondition> validate_preconditions(TheoremId id, const NoiseModel& noise,
                                                        const IsotropicPrior& prior, const DataDistributionSpec& dist,
                                                        const PerturbationBudget& budget, Eigen::Index n,
                                                        Eigen::Index d, double beta)
{
    using detail::fmt;
    std::vector<Precondition> out;
    const double s2 = noise.sigma_sq, p2 = prior.sigma_p_sq, sx = dist.sigma_x_sq;
    const double dl = budget.delta_train, dh = budget.delta_test;

    {
        Precondition p{"beta_range", beta > 0 && beta <= 1, "beta = " + fmt(beta) + " in (0, 1]", ""};
        if (!p.ok) p.failure_kind = "BetaRange";
        out.push_back(p);
    }
    if (n < 1 || d < 1) {
        out.push_back({"nonempty_data", false, "n = " + std::to_string(n) + ", d = " + std::to_string(d), "Empty"});
        return out;
    }

    if (is_adversarial(id)) {
        const double c = 2 * p2 * (sx + dh * dh) / s2;
        Precondition p{"cgf_range", c < 1,
                       "2 sigma_p^2 (sigma_x^2 + delta_hat^2) / sigma^2 = " + fmt(c) + " < 1", ""};
        if (!p.ok) p.failure_kind = "CgfRange";
        out.push_back(p);
    } else {
        const double c = p2 * sx / s2;
        Precondition p{"cgf_range", c < 1, "sigma_p^2 sigma_x^2 / sigma^2 = " + fmt(c) + " < 1", ""};
        if (!p.ok) p.failure_kind = "CgfRange";
        out.push_back(p);
    }

    if (id == TheoremId::BayesAdv) {
        const double den = s2 - 2 * double(n) * dh * dh * p2;
        Precondition p{"denominator", den > 0, "sigma^2 - 2 n delta_hat^2 sigma_p^2 = " + fmt(den) + " > 0", ""};
        if (!p.ok) p.failure_kind = "DenominatorNonpositive";
        out.push_back(p);
    }
    if (id == TheoremId::RobustAdvMatched) {
        Precondition p{"matched_budget", dh == dl, "delta_hat = " + fmt(dh) + " == delta = " + fmt(dl), ""};
        if (!p.ok) p.failure_kind = "BudgetMismatch";
        out.push_back(p);
    }
    if (id == TheoremId::RobustAdvGeneral) {
        const double den = s2 - 2 * double(n) * (dh * dh - dl * dl) * p2;
        std::string text = "sigma^2 - 2 n (delta_hat^2 - delta^2) sigma_p^2 = " + fmt(den) + " > 0";
        if (dh <= dl) text += " (holds since delta_hat <= delta)";
        Precondition p{"denominator", den > 0, text, ""};
        if (!p.ok) p.failure_kind = "DenominatorNonpositive";
        out.push_back(p);
    }
    return out;
}

/**
 * Computes one certificate. Precondition failures are reported in the
 * returned object (precondition_ok false, bound NaN) instead of thrown.
 */
template <typename Scalar>
CertificateReport certify_report(TheoremId id, const Dataset<Scalar>& data, const NoiseModel& noise,
                                 const IsotropicPrior& prior, const DataDistributionSpec& dist,
                                 const PerturbationBudget& budget, double beta, const CertificateOptions& opts = {})
{
    CertificateReport rep;
    rep.theorem_id = id;
    rep.beta = beta;
    rep.t = 1;
    rep.n = data.n();
    rep.d = data.d();
    rep.coefficients = opts.coefficients;
    const GramSide side = detail::resolve(opts.formulation, data.n(), data.d());
    rep.formulation = side == GramSide::Features ? "features" : "samples";
    rep.preconditions = validate_preconditions(id, noise, prior, dist, budget, data.n(), data.d(), beta);
    rep.precondition_ok = true;
    for (const auto& p : rep.preconditions) rep.precondition_ok = rep.precondition_ok && p.ok;
    rep.bound_value = std::numeric_limits<double>::quiet_NaN();
    if (!rep.precondition_ok) return rep;

    const double n = double(data.n()), d = double(data.d());
    const double s2 = noise.sigma_sq, p2 = prior.sigma_p_sq;
    const double dl = budget.delta_train, dh = budget.delta_test;
    const CgfConstants cgf = is_adversarial(id) ? cgf_adversarial(noise, prior, dist, data.d(), dh, 1.0)
                                                : cgf_standard(noise, prior, dist, data.d(), 1.0);
    rep.cgf_c = cgf.c;
    rep.cgf_s_sq = cgf.s_sq;

    CertificateComponents& cc = rep.components;
    cc.confidence_term = std::log(1.0 / beta) / n;
    cc.cgf_term = cgf.s_sq / (2 * (1 - cgf.c));

    if (!is_robust(id)) {
        const auto w = detail::gram_terms(data, Scalar(1), Scalar(p2 / s2), side);
        // -log z of the Bayes posterior, scaled by 1/n (standard) or 2/n (adversarial)
        const double scale = id == TheoremId::BayesStd ? 1.0 / n : 2.0 / n;
        cc.logdet_term = scale * 0.5 * double(w.logdet_d);
        cc.quad_term = scale * double(w.quad_n) / (2 * s2);
        if (id == TheoremId::BayesAdv) cc.extra_term = d * dh * dh * p2 / (s2 - 2 * n * dh * dh * p2);
    } else {
        const double k = detail::robust_k(data.n(), dl, s2, p2);
        const double coef = detail::robust_quad_coef(opts.coefficients, k, s2);
        const auto u = detail::gram_terms(data, Scalar(k), Scalar(2 * p2 / s2), side);
        const double scale = id == TheoremId::RobustAdvMatched ? 1.0 / n : 2.0 / n;
        cc.logdet_term = scale * 0.5 * double(u.logdet_d);
        cc.quad_term = scale * coef * double(u.quad_n);
        if (id == TheoremId::RobustStd) {
            const auto v = detail::gram_terms(data, Scalar(k), Scalar(p2 / s2), side);
            const double vcoef = opts.coefficients == CoefficientSet::Derived ? k / (2 * s2) : k / s2;
            cc.v_logdet_term = -0.5 * double(v.logdet_d) / n;
            cc.v_quad_term = -vcoef * double(v.quad_n) / n;
        }
        if (id == TheoremId::RobustAdvGeneral) {
            const double gap = dh * dh - dl * dl;
            cc.extra_term = gap * p2 * d / (s2 - 2 * n * gap * p2);
        }
    }
    rep.bound_value = cc.sum();
    return rep;
}

/// Throwing variant: BudgetMismatch or PreconditionViolated when a hypothesis fails.
template <typename Scalar>
CertificateReport certify(TheoremId id, const Dataset<Scalar>& data, const NoiseModel& noise,
                          const IsotropicPrior& prior, const DataDistributionSpec& dist,
                          const PerturbationBudget& budget, double beta, const CertificateOptions& opts = {})
{
    CertificateReport rep = certify_report(id, data, noise, prior, dist, budget, beta, opts);
    if (rep.precondition_ok) return rep;
    std::string msg = std::string(to_string(id)) + ":";
    bool mismatch = false;
    for (const auto& p : rep.preconditions) {
        if (p.ok) continue;
        msg += " [" + p.failure_kind + "] " + p.detail + " is violated;";
        mismatch = mismatch || p.failure_kind == "BudgetMismatch";
    }
    throw Error(mismatch ? ErrorCode::BudgetMismatch : ErrorCode::PreconditionViolated, msg);
}

template <typename Scalar>
CertificateReport cert_bayes_standard(const Dataset<Scalar>& data, const NoiseModel& noise,
                                      const IsotropicPrior& prior, const DataDistributionSpec& dist, double beta,
                                      const CertificateOptions& opts = {})
{
    return certify(TheoremId::BayesStd, data, noise, prior, dist, PerturbationBudget(0, 0), beta, opts);
}

template <typename Scalar>
CertificateReport cert_bayes_adversarial(const Dataset<Scalar>& data, const NoiseModel& noise,
                                         const IsotropicPrior& prior, const DataDistributionSpec& dist,
                                         const PerturbationBudget& budget, double beta,
                                         const CertificateOptions& opts = {})
{
    return certify(TheoremId::BayesAdv, data, noise, prior, dist, budget, beta, opts);
}

template <typename Scalar>
CertificateReport cert_robust_standard(const Dataset<Scalar>& data, const NoiseModel& noise,
                                       const IsotropicPrior& prior, const DataDistributionSpec& dist,
                                       const PerturbationBudget& budget, double beta,
                                       const CertificateOptions& opts = {})
{
    return certify(TheoremId::RobustStd, data, noise, prior, dist, budget, beta, opts);
}

template <typename Scalar>
CertificateReport cert_robust_adversarial_matched(const Dataset<Scalar>& data, const NoiseModel& noise,
                                                  const IsotropicPrior& prior, const DataDistributionSpec& dist,
                                                  const PerturbationBudget& budget, double beta,
                                                  const CertificateOptions& opts = {})
{
    return certify(TheoremId::RobustAdvMatched, data, noise, prior, dist, budget, beta, opts);
}

template <typename Scalar>
CertificateReport cert_robust_adversarial_general(const Dataset<Scalar>& data, const NoiseModel& noise,
                                                  const IsotropicPrior& prior, const DataDistributionSpec& dist,
                                                  const PerturbationBudget& budget, double beta,
                                                  const CertificateOptions& opts = {})
{
    return certify(TheoremId::RobustAdvGeneral, data, noise, prior, dist, budget, beta, opts);
}

} // namespace certbayes
