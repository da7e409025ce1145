#pragma once

// Straight-line certificate formulas: explicit inverses of the n x n
// matrices, eigenvalue log-determinants of the d x d ones, constants
// written out by hand. Shares no code with the library.

#include <Eigen/Dense>

#include <cmath>
#include <string>

namespace oracle {

struct CertInputs
{
    Eigen::MatrixXd X;
    Eigen::VectorXd Y;
    double s2, p2, sx2, theta_sq, delta, delta_hat, beta;
    bool published = false;
};

inline double log_sqrt_det(const Eigen::MatrixXd& m)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    return 0.5 * es.eigenvalues().array().log().sum();
}

inline double quad_inv(const Eigen::MatrixXd& m, const Eigen::VectorXd& y)
{
    const Eigen::MatrixXd inv = m.inverse();
    return y.dot(inv * y);
}

/// Bound value for theorem name in {bayes-std, bayes-adv, robust-std, robust-adv-matched, robust-adv-general}.
inline double certificate(const std::string& which, const CertInputs& in)
{
    const double n = double(in.X.rows()), d = double(in.X.cols());
    const Eigen::MatrixXd G = in.X.transpose() * in.X;
    const Eigen::MatrixXd K = in.X * in.X.transpose();
    const Eigen::MatrixXd Id = Eigen::MatrixXd::Identity(in.X.cols(), in.X.cols());
    const Eigen::MatrixXd In = Eigen::MatrixXd::Identity(in.X.rows(), in.X.rows());
    const double r = in.p2 / in.s2;

    const double c_std = in.p2 * in.sx2 / in.s2;
    const double s_std = c_std * d - c_std + 1 + in.sx2 * in.theta_sq / in.s2;
    const double c_adv = 2 * in.p2 * (in.sx2 + in.delta_hat * in.delta_hat) / in.s2;
    const double s_adv = 2 * (c_adv * d - c_adv + 1 + in.sx2 * in.theta_sq / in.s2);
    const double conf = std::log(1 / in.beta) / n;
    const double tail_std = conf + s_std / (2 * (1 - c_std));
    const double tail_adv = conf + s_adv / (2 * (1 - c_adv));

    const Eigen::MatrixXd Wd = Id + r * G, Wn = In + r * K;
    const double k = 2 * n * in.delta * in.delta * in.p2 / in.s2 + 1;
    const Eigen::MatrixXd Ud = k * Id + 2 * r * G, Un = k * In + 2 * r * K;
    const Eigen::MatrixXd Vd = k * Id + r * G, Vn = k * In + r * K;
    const double ucoef = in.published ? 1 / (n * k * in.s2) : k / (n * in.s2);
    const double vcoef = in.published ? k / (n * in.s2) : k / (2 * n * in.s2);

    if (which == "bayes-std")
        return log_sqrt_det(Wd) / n + quad_inv(Wn, in.Y) / (2 * n * in.s2) + tail_std;
    if (which == "bayes-adv") {
        const double dh2 = in.delta_hat * in.delta_hat;
        return 2 * log_sqrt_det(Wd) / n + quad_inv(Wn, in.Y) / (n * in.s2) + tail_adv
               + d * dh2 * in.p2 / (in.s2 - 2 * n * dh2 * in.p2);
    }
    if (which == "robust-std")
        return 2 * log_sqrt_det(Ud) / n + 2 * ucoef * quad_inv(Un, in.Y) - log_sqrt_det(Vd) / n
               - vcoef * quad_inv(Vn, in.Y) + tail_std;
    if (which == "robust-adv-matched") return log_sqrt_det(Ud) / n + ucoef * quad_inv(Un, in.Y) + tail_adv;
    if (which == "robust-adv-general") {
        const double gap = in.delta_hat * in.delta_hat - in.delta * in.delta;
        return 2 * log_sqrt_det(Ud) / n + 2 * ucoef * quad_inv(Un, in.Y) + tail_adv
               + gap * in.p2 * d / (in.s2 - 2 * n * gap * in.p2);
    }
    return std::nan("");
}

} // namespace oracle
