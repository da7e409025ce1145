#pragma once

#include <certbayes/errors.hpp>
#include <certbayes/numerics.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace certbayes {

/// Labeled regression data: X is n x d, Y has length n.
template <typename Scalar>
struct Dataset
{
    MatrixX<Scalar> X;
    VectorX<Scalar> Y;

    Eigen::Index n() const noexcept { return X.rows(); }
    Eigen::Index d() const noexcept { return X.cols(); }
};

template <typename DerivedX, typename DerivedY>
Dataset<typename DerivedX::Scalar> validate_dataset(const Eigen::MatrixBase<DerivedX>& x,
                                                    const Eigen::MatrixBase<DerivedY>& y)
{
    using Scalar = typename DerivedX::Scalar;
    detail::require(x.rows() > 0 && x.cols() > 0, ErrorCode::Empty,
                    "dataset needs n >= 1 and d >= 1, got " + std::to_string(x.rows()) + "x"
                        + std::to_string(x.cols()));
    detail::require(y.cols() == 1 && y.rows() == x.rows(), ErrorCode::DimensionMismatch,
                    "X has " + std::to_string(x.rows()) + " rows but Y has " + std::to_string(y.size())
                        + " entries");
    detail::require(x.allFinite(), ErrorCode::NonFiniteEntry, "X contains NaN or Inf");
    detail::require(y.allFinite(), ErrorCode::NonFiniteEntry, "Y contains NaN or Inf");
    return Dataset<Scalar>{x, y};
}

namespace detail {

inline double require_positive(double v, const char* name)
{
    require(std::isfinite(v) && v > 0, ErrorCode::DomainViolation,
            std::string(name) + " must be finite and > 0, got " + std::to_string(v));
    return v;
}

inline double require_nonnegative(double v, const char* name)
{
    require(std::isfinite(v) && v >= 0, ErrorCode::DomainViolation,
            std::string(name) + " must be finite and >= 0, got " + std::to_string(v));
    return v;
}

inline void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what)
{
    require(a == b, ErrorCode::DimensionMismatch,
            std::string(what) + ": " + std::to_string(a) + " vs " + std::to_string(b));
}

} // namespace detail

/// Observation noise variance sigma^2.
struct NoiseModel
{
    double sigma_sq;
    explicit NoiseModel(double s) : sigma_sq(detail::require_positive(s, "sigma_sq")) {}
};

/// Isotropic Gaussian prior N(0, sigma_p^2 I).
struct IsotropicPrior
{
    double sigma_p_sq;
    explicit IsotropicPrior(double s) : sigma_p_sq(detail::require_positive(s, "sigma_p_sq")) {}
};

/// Training radius delta and test radius delta_hat of the l2 feature adversary.
struct PerturbationBudget
{
    double delta_train;
    double delta_test;
    PerturbationBudget(double train, double test)
        : delta_train(detail::require_nonnegative(train, "delta")),
          delta_test(detail::require_nonnegative(test, "delta_hat"))
    {}
};

/**
 * Population quantities the certificates need. sigma_x_sq is the per-direction
 * second moment, E[(x^T v)^2] = sigma_x_sq |v|^2.
 */
struct DataDistributionSpec
{
    double sigma_x_sq;
    double theta_star_norm_sq;
    DataDistributionSpec(double sx, double tn)
        : sigma_x_sq(detail::require_positive(sx, "sigma_x_sq")),
          theta_star_norm_sq(detail::require_nonnegative(tn, "theta_star_norm_sq"))
    {}
};

/// Exact Bayes posterior. `precision` is the inverse covariance.
template <typename Scalar>
struct GaussianPosterior
{
    VectorX<Scalar> mean;
    SpdMatrix<Scalar> precision;

    Eigen::Index dim() const noexcept { return mean.size(); }
};

/// Retained HMC draws, one row per draw.
template <typename Scalar>
struct SampleSet
{
    MatrixX<Scalar> draws;
    std::uint64_t seed = 0;
    double acceptance_rate = 0;
    double step_size = 0;
    int divergences = 0;

    Eigen::Index size() const noexcept { return draws.rows(); }
    Eigen::Index dim() const noexcept { return draws.cols(); }
};

enum class TheoremId {
    BayesStd,
    BayesAdv,
    RobustStd,
    RobustAdvMatched,
    RobustAdvGeneral,
};

inline constexpr TheoremId all_theorems[] = {TheoremId::BayesStd, TheoremId::BayesAdv, TheoremId::RobustStd,
                                             TheoremId::RobustAdvMatched, TheoremId::RobustAdvGeneral};

constexpr std::string_view to_string(TheoremId id) noexcept
{
    switch (id) {
        case TheoremId::BayesStd: return "bayes-std";
        case TheoremId::BayesAdv: return "bayes-adv";
        case TheoremId::RobustStd: return "robust-std";
        case TheoremId::RobustAdvMatched: return "robust-adv-matched";
        case TheoremId::RobustAdvGeneral: return "robust-adv-general";
    }
    return "unknown";
}

inline TheoremId theorem_from_string(std::string_view s)
{
    for (TheoremId id : all_theorems)
        if (to_string(id) == s) return id;
    throw Error(ErrorCode::InvalidArgument, "unknown theorem '" + std::string(s) + "'");
}

/// True for certificates on the adversarial (delta_hat) test risk.
constexpr bool is_adversarial(TheoremId id) noexcept
{
    return id == TheoremId::BayesAdv || id == TheoremId::RobustAdvMatched || id == TheoremId::RobustAdvGeneral;
}

/// True for certificates on the robust Gibbs posterior.
constexpr bool is_robust(TheoremId id) noexcept
{
    return id == TheoremId::RobustStd || id == TheoremId::RobustAdvMatched || id == TheoremId::RobustAdvGeneral;
}

struct Precondition
{
    std::string name;
    bool ok = true;
    std::string detail;       // the inequality with values substituted
    std::string failure_kind; // CgfRange, DenominatorNonpositive, BetaRange, BudgetMismatch
};

/// Additive pieces of a bound; `bound_value` is their sum.
struct CertificateComponents
{
    double logdet_term = 0;
    double quad_term = 0;
    double v_logdet_term = 0; // enters with its sign
    double v_quad_term = 0;   // enters with its sign
    double confidence_term = 0;
    double cgf_term = 0;
    double extra_term = 0;

    double sum() const noexcept
    {
        return logdet_term + quad_term + v_logdet_term + v_quad_term + confidence_term + cgf_term + extra_term;
    }
};

enum class CoefficientSet {
    Derived,     ///< coefficients that follow from the normalizer integrals
    AsPublished, ///< coefficients exactly as printed in the theorem statements
};

struct CertificateReport
{
    TheoremId theorem_id = TheoremId::BayesStd;
    double bound_value = 0;
    double cgf_c = 0;
    double cgf_s_sq = 0;
    double t = 1;
    double beta = 0.05;
    bool precondition_ok = false;
    std::vector<Precondition> preconditions;
    CertificateComponents components;
    CoefficientSet coefficients = CoefficientSet::Derived;
    std::string formulation; // "features" or "samples"
    std::string inputs_digest;
    bool plug_in = false;
    Eigen::Index n = 0;
    Eigen::Index d = 0;
};

} // namespace certbayes
