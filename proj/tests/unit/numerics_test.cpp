#include "support.hpp"

#include <cmath>

using namespace certbayes;

TEST_CASE("spd_logdet on hand examples")
{
    CHECK(spd_logdet(SpdMatrix(Eigen::MatrixXd::Identity(3, 3))) == 0.0);
    const Eigen::Matrix2d d28 = Eigen::Vector2d(2, 8).asDiagonal();
    CHECK(spd_logdet(SpdMatrix(d28)) == doctest::Approx(std::log(16.0)).epsilon(1e-14));
    const Eigen::Matrix2d w = Eigen::Matrix2d::Identity() + 0.09 * (2 * Eigen::Matrix2d::Identity());
    CHECK(spd_logdet(SpdMatrix(w)) == doctest::Approx(0.331029).epsilon(1e-6));
    CHECK(spd_logdet(SpdMatrix(w)) == doctest::Approx(2 * std::log(1.18)).epsilon(1e-14));
}

TEST_CASE("spd_logdet of scaled identity is k log c")
{
    for (int k = 1; k <= 16; ++k)
        for (double c : {1e-3, 0.5, 1.0, 3.7, 1e4}) {
            const double got = spd_logdet(SpdMatrix(Eigen::MatrixXd(c * Eigen::MatrixXd::Identity(k, k))));
            CHECK(got == doctest::Approx(k * std::log(c)).epsilon(1e-12));
        }
}

TEST_CASE("spd_solve")
{
    Eigen::Vector3d b(1, -2, 3);
    CHECK((spd_solve(SpdMatrix(Eigen::Matrix3d::Identity()), b) - b).norm() == 0.0);

    const Eigen::Matrix2d m = Eigen::Vector2d(2, 4).asDiagonal();
    const Eigen::VectorXd x = spd_solve(SpdMatrix(m), Eigen::Vector2d(2, 4));
    CHECK(x[0] == doctest::Approx(1.0));
    CHECK(x[1] == doctest::Approx(1.0));

    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        const Eigen::MatrixXd a = testing::normal_matrix(rng, 5, 5);
        const Eigen::MatrixXd spd = a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(5, 5);
        const Eigen::VectorXd rhs = testing::normal_vector(rng, 5);
        const Eigen::VectorXd sol = spd_solve(SpdMatrix(spd), rhs);
        CHECK((spd * sol - rhs).norm() / rhs.norm() <= 1e-10);
    }
}

TEST_CASE("quad_form_inv")
{
    const Eigen::Vector4d v(1, 2, -3, 0.5);
    CHECK(quad_form_inv(SpdMatrix(Eigen::Matrix4d::Identity()), v) == doctest::Approx(v.squaredNorm()));
    const Eigen::Matrix2d m = 2 * Eigen::Matrix2d::Identity();
    CHECK(quad_form_inv(SpdMatrix(m), Eigen::Vector2d(2, 0)) == doctest::Approx(2.0));

    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        const Eigen::MatrixXd a = testing::normal_matrix(rng, 6, 6);
        const SpdMatrix spd(Eigen::MatrixXd(a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(6, 6)));
        const Eigen::VectorXd u = testing::normal_vector(rng, 6);
        const double q = quad_form_inv(spd, u);
        CHECK(q > 0);
        CHECK(q == doctest::Approx(u.dot(spd_solve(spd, u))).epsilon(1e-12));
    }
}

TEST_CASE("SpdMatrix rejects bad input")
{
    Eigen::Matrix2d indefinite;
    indefinite << 1, 2, 2, 1;
    CHECK_ERROR_CODE(SpdMatrix(indefinite), ErrorCode::NotPositiveDefinite);
    CHECK_ERROR_CODE(SpdMatrix(Eigen::MatrixXd::Zero(2, 3)), ErrorCode::DimensionMismatch);
    Eigen::Matrix2d nan_m = Eigen::Matrix2d::Identity();
    nan_m(0, 1) = NAN;
    CHECK_ERROR_CODE(SpdMatrix(nan_m), ErrorCode::NonFiniteEntry);
    Eigen::Matrix2d asym = Eigen::Matrix2d::Identity();
    asym(0, 1) = 0.3;
    CHECK_ERROR_CODE(SpdMatrix(asym), ErrorCode::InvalidArgument);

    // rounding-level asymmetry is symmetrized away
    Eigen::Matrix2d near = 2 * Eigen::Matrix2d::Identity();
    near(0, 1) = 0.5;
    near(1, 0) = 0.5 + 1e-15;
    SpdMatrix s(near);
    CHECK(s.matrix()(0, 1) == s.matrix()(1, 0));

    const SpdMatrix i2(Eigen::Matrix2d::Identity());
    CHECK_ERROR_CODE(spd_solve(i2, Eigen::Vector3d(1, 2, 3)), ErrorCode::DimensionMismatch);
}

TEST_CASE("Woodbury: both Gram sides give the same log-determinant")
{
    std::mt19937_64 rng(3);
    for (auto [n, d] : {std::pair{3, 7}, std::pair{7, 3}, std::pair{12, 12}, std::pair{1, 5}}) {
        const Eigen::MatrixXd x = testing::normal_matrix(rng, n, d);
        for (double a : {1e-3, 0.09, 1.0, 25.0}) {
            const double ld = spd_logdet(shifted_gram(x, 1.0, a, GramSide::Features));
            const double ln = spd_logdet(shifted_gram(x, 1.0, a, GramSide::Samples));
            CHECK(std::abs(ld - ln) <= 1e-8 * std::max(1.0, std::abs(ld)));
        }
    }
}

TEST_CASE("shifted_gram matches the dense product")
{
    std::mt19937_64 rng(5);
    const Eigen::MatrixXd x = testing::normal_matrix(rng, 6, 4);
    const Eigen::MatrixXd f = shifted_gram(x, 2.0, 0.3, GramSide::Features).matrix();
    const Eigen::MatrixXd s = shifted_gram(x, 2.0, 0.3, GramSide::Samples).matrix();
    CHECK((f - (2.0 * Eigen::MatrixXd::Identity(4, 4) + 0.3 * x.transpose() * x)).norm() < 1e-12);
    CHECK((s - (2.0 * Eigen::MatrixXd::Identity(6, 6) + 0.3 * x * x.transpose())).norm() < 1e-12);
}
