#include "support.hpp"

#include <oracles/ball_oracle.hpp>

#include <cmath>
#include <numbers>

using namespace certbayes;

namespace {

const double log2pi = std::log(2 * std::numbers::pi);

Dataset<double> one_point(const Eigen::VectorXd& x, double y)
{
    return validate_dataset(Eigen::MatrixXd(x.transpose()), Eigen::VectorXd::Constant(1, y));
}

} // namespace

TEST_CASE("gaussian_nll hand values")
{
    std::mt19937_64 rng(1);
    const auto zero = validate_dataset(testing::normal_matrix(rng, 4, 3), Eigen::VectorXd::Zero(4));
    CHECK(gaussian_nll(Eigen::VectorXd::Zero(3).eval(), zero, NoiseModel(1 / (2 * std::numbers::pi)))
          == doctest::Approx(0.0).epsilon(1e-15));

    const auto ds = one_point(Eigen::Vector2d(1, 0), 3);
    CHECK(gaussian_nll(Eigen::VectorXd(Eigen::Vector2d(1, 0)), ds, NoiseModel(1)) == doctest::Approx(0.5 * log2pi + 2.0));
}

TEST_CASE("gaussian_nll agrees with a naive loop")
{
    std::mt19937_64 rng(2);
    for (int rep = 0; rep < 50; ++rep) {
        const auto ds = testing::random_dataset(rng, 9, 4);
        const Eigen::VectorXd th = testing::normal_vector(rng, 4);
        const double s2 = 0.3 + rep * 0.05;
        double acc = 0;
        for (Eigen::Index i = 0; i < ds.n(); ++i) {
            double pred = 0;
            for (Eigen::Index j = 0; j < ds.d(); ++j) pred += ds.X(i, j) * th[j];
            acc += 0.5 * std::log(2 * std::numbers::pi * s2) + (ds.Y[i] - pred) * (ds.Y[i] - pred) / (2 * s2);
        }
        CHECK(gaussian_nll(th, ds, NoiseModel(s2)) == doctest::Approx(acc).epsilon(1e-12));
    }
}

TEST_CASE("gaussian_adv_nll hand value and delta = 0 reduction")
{
    const Eigen::VectorXd th = Eigen::Vector2d(1, 0);
    const auto ds = one_point(Eigen::Vector2d(0, 0), 1);
    const auto adv = gaussian_adv_nll(th, ds, NoiseModel(1), 0.5);
    CHECK(adv.value == doctest::Approx(0.5 * log2pi + 1.125).epsilon(1e-14));
    CHECK(adv.signs[0] == -1);

    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 20; ++rep) {
        const auto r = testing::random_dataset(rng, 7, 3);
        const Eigen::VectorXd t = testing::normal_vector(rng, 3);
        CHECK(gaussian_adv_nll(t, r, NoiseModel(0.7), 0.0).value == gaussian_nll(t, r, NoiseModel(0.7)));
    }
}

TEST_CASE("residual zero takes sign +1")
{
    const Eigen::VectorXd th = Eigen::Vector2d(1, 1);
    const auto ds = one_point(Eigen::Vector2d(1, 1), 2);
    CHECK(gaussian_adv_nll(th, ds, NoiseModel(1), 0.2).signs[0] == 1);
    CHECK(gaussian_adv_perturbation(th, Eigen::VectorXd(Eigen::Vector2d(1, 1)), 2.0, 0.2).sign == 1);
}

TEST_CASE("dominance and monotonicity in delta")
{
    std::mt19937_64 rng(4);
    for (int rep = 0; rep < 200; ++rep) {
        const auto ds = testing::random_dataset(rng, 5, 3);
        const Eigen::VectorXd th = testing::normal_vector(rng, 3);
        const double base = gaussian_nll(th, ds, NoiseModel(0.5));
        double prev = base;
        for (double delta : {0.0, 0.01, 0.1, 0.5, 2.0}) {
            const double v = gaussian_adv_nll(th, ds, NoiseModel(0.5), delta).value;
            CHECK(v >= prev);
            if (delta > 0) CHECK(v > base);
            prev = v;
        }
    }
    const auto ds = testing::random_dataset(rng, 5, 3);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
    CHECK(gaussian_adv_nll(zero, ds, NoiseModel(0.5), 1.0).value == gaussian_nll(zero, ds, NoiseModel(0.5)));
}

TEST_CASE("gaussian_adv_perturbation")
{
    const Eigen::VectorXd th = Eigen::Vector2d(1, 0);
    const Eigen::VectorXd x = Eigen::Vector2d(0, 0);
    const auto p = gaussian_adv_perturbation(th, x, 1.0, 0.5);
    CHECK(p.x_tilde[0] == doctest::Approx(-0.5));
    CHECK(p.x_tilde[1] == 0.0);
    CHECK(!p.zero_parameter);
    CHECK(gaussian_adv_perturbation(th, x, 1.0, 0.0).x_tilde == x);

    const auto z = gaussian_adv_perturbation(Eigen::VectorXd::Zero(2).eval(), x, 1.0, 0.5);
    CHECK(z.zero_parameter);
    CHECK(z.x_tilde == x);
}

TEST_CASE("perturbation attains the adversarial loss and is scale covariant")
{
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 200; ++rep) {
        const Eigen::Index d = 1 + rep % 4;
        const Eigen::VectorXd th = testing::normal_vector(rng, d);
        const Eigen::VectorXd x = testing::normal_vector(rng, d);
        const double y = testing::normal_vector(rng, 1)[0];
        const double delta = 0.05 + 0.01 * rep;
        const auto p = gaussian_adv_perturbation(th, x, y, delta);
        CHECK((p.x_tilde - x).norm() == doctest::Approx(delta).epsilon(1e-12));
        const double attained = gaussian_nll(th, one_point(p.x_tilde, y), NoiseModel(0.4));
        const double closed = gaussian_adv_nll(th, one_point(x, y), NoiseModel(0.4), delta).value;
        CHECK(std::abs(attained - closed) <= 1e-10 * std::max(1.0, std::abs(closed)));

        for (double c : {0.01, 3.0, 1e3}) {
            // only the residual sign can change with c
            const auto q = gaussian_adv_perturbation(Eigen::VectorXd(c * th), x, y, delta);
            if (q.sign == p.sign) CHECK((q.x_tilde - p.x_tilde).norm() <= 1e-12 * (1 + x.norm()));
            else CHECK((q.x_tilde - x).norm() == doctest::Approx(delta).epsilon(1e-12));
        }
    }
}

TEST_CASE("with_points returns the attaining matrix")
{
    std::mt19937_64 rng(6);
    const auto ds = testing::random_dataset(rng, 6, 3);
    const Eigen::VectorXd th = testing::normal_vector(rng, 3);
    const auto adv = gaussian_adv_nll(th, ds, NoiseModel(1), 0.3, true);
    REQUIRE(adv.perturbed.has_value());
    const auto moved = validate_dataset(*adv.perturbed, ds.Y);
    CHECK(gaussian_nll(th, moved, NoiseModel(1)) == doctest::Approx(adv.value).epsilon(1e-12));
}

TEST_CASE("Bernoulli worked example picks s = -1")
{
    const Eigen::VectorXd th = Eigen::Vector2d(1, 0);
    const auto v = expfam_adv_nll_point(th, Eigen::VectorXd(Eigen::Vector2d(0, 0)), 1.0, 1.0, bernoulli_family());
    CHECK(v.signs[0] == -1);
    CHECK(v.value == doctest::Approx(std::log1p(std::exp(-1.0)) + 1.0).epsilon(1e-14));
    CHECK(v.value == doctest::Approx(1.313262).epsilon(1e-6));
    CHECK(expfam_nll(bernoulli_family(), 1.0, 1.0) == doctest::Approx(0.313262).epsilon(1e-5));
}

TEST_CASE("expfam delta = 0 equals the standard NLL")
{
    std::mt19937_64 rng(7);
    for (const auto& fam : {gaussian_family(0.5), bernoulli_family(), poisson_family()}) {
        const Eigen::VectorXd th = testing::normal_vector(rng, 3, 0.5);
        const Eigen::VectorXd x = testing::normal_vector(rng, 3);
        const double eta = th.dot(x);
        const double y = fam.name == "gaussian" ? 0.7 : 1.0;
        CHECK(expfam_adv_nll_point(th, x, y, 0.0, fam).value == expfam_nll(fam, eta, y));
    }
}

TEST_CASE("Gaussian self-duality through differences")
{
    std::mt19937_64 rng(8);
    const double s2 = 0.6;
    const auto fam = gaussian_family(s2);
    for (int rep = 0; rep < 100; ++rep) {
        const Eigen::VectorXd x = testing::normal_vector(rng, 3);
        const double y = testing::normal_vector(rng, 1)[0];
        const Eigen::VectorXd t1 = testing::normal_vector(rng, 3), t2 = testing::normal_vector(rng, 3);
        const double delta = 0.3;
        const auto ds = one_point(x, y);
        const double g = gaussian_adv_nll(t1, ds, NoiseModel(s2), delta).value
                         - gaussian_adv_nll(t2, ds, NoiseModel(s2), delta).value;
        const double e = expfam_adv_nll_point(Eigen::VectorXd(t1 / s2), x, y, delta, fam).value
                         - expfam_adv_nll_point(Eigen::VectorXd(t2 / s2), x, y, delta, fam).value;
        CHECK(e == doctest::Approx(g).epsilon(1e-10));
    }
}

TEST_CASE("closed forms match the brute-force ball oracle")
{
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::poisson_distribution<int> pois(1.5);
    for (int rep = 0; rep < 30; ++rep) {
        const Eigen::Index d = 1 + rep % 3;
        const Eigen::VectorXd th = testing::normal_vector(rng, d, 0.7);
        const Eigen::VectorXd x = testing::normal_vector(rng, d);
        const double delta = unif(rng);

        const double yg = testing::normal_vector(rng, 1)[0];
        auto gauss = [&](double eta) { return 0.5 * std::log(2 * std::numbers::pi) + 0.5 * (yg - eta) * (yg - eta); };
        const double og = oracle::ball_maximize(th, x, delta, gauss, rng).value;
        CHECK(testing::rel_err(gaussian_adv_nll(th, one_point(x, yg), NoiseModel(1), delta).value, og) <= 1e-5);

        const double yb = unif(rng) < 0.5 ? 0.0 : 1.0;
        auto bern = [&](double eta) { return std::log1p(std::exp(eta)) - yb * eta; };
        const double ob = oracle::ball_maximize(th, x, delta, bern, rng).value;
        CHECK(testing::rel_err(expfam_adv_nll_point(th, x, yb, delta, bernoulli_family()).value, ob) <= 1e-5);

        const double yp = pois(rng);
        auto poi = [&](double eta) { return std::exp(eta) - yp * eta + std::lgamma(yp + 1); };
        const double op = oracle::ball_maximize(th, x, delta, poi, rng).value;
        CHECK(testing::rel_err(expfam_adv_nll_point(th, x, yp, delta, poisson_family()).value, op) <= 1e-5);
    }
}

TEST_CASE("worst point coincides with the boundary search in d = 2")
{
    std::mt19937_64 rng(10);
    for (int rep = 0; rep < 20; ++rep) {
        const Eigen::VectorXd th = testing::normal_vector(rng, 2);
        const Eigen::VectorXd x = testing::normal_vector(rng, 2);
        const double y = testing::normal_vector(rng, 1)[0];
        const double delta = 0.2 + 0.05 * rep;
        auto gauss = [&](double eta) { return 0.5 * (y - eta) * (y - eta); };
        const auto o = oracle::ball_maximize(th, x, delta, gauss, rng);
        const auto p = gaussian_adv_perturbation(th, x, y, delta);
        CHECK((o.argmax - p.x_tilde).norm() <= 1e-5);
    }
}

TEST_CASE("Bregman divergence")
{
    for (const auto& fam : {gaussian_family(), bernoulli_family(), poisson_family()})
        CHECK(bregman_divergence(fam, 0.3, 0.3) == 0.0);
    CHECK(bregman_divergence(gaussian_family(), 3.0, 1.0) == doctest::Approx(2.0));

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-5, 5);
    for (const auto& fam : {gaussian_family(2.0), bernoulli_family(), poisson_family()})
        for (int i = 0; i < 1000; ++i) {
            const double a = u(rng), b = u(rng);
            CHECK(bregman_divergence(fam, a, b) >= 0);
        }
}

TEST_CASE("expfam domain violations")
{
    const Eigen::VectorXd th = Eigen::VectorXd::Constant(1, 800.0);
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 1.0);
    CHECK_ERROR_CODE(expfam_adv_nll_point(th, x, 1.0, 0.1, poisson_family()), ErrorCode::DomainViolation);
    CHECK_ERROR_CODE(bregman_divergence(poisson_family(), 800.0, 0.0), ErrorCode::DomainViolation);
}

TEST_CASE("loss sandwich")
{
    std::mt19937_64 rng(12);
    const auto ds = testing::random_dataset(rng, 6, 3);
    const Eigen::VectorXd th = testing::normal_vector(rng, 3);
    const NoiseModel noise(0.8);

    const auto s0 = adv_loss_sandwich(th, ds, noise, 0.0);
    CHECK(s0.lower == doctest::Approx(gaussian_nll(th, ds, noise)).epsilon(1e-14));

    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
    const auto sz = adv_loss_sandwich(zero, ds, noise, 0.5);
    CHECK(sz.lower == doctest::Approx(sz.upper - ds.Y.squaredNorm() / (2 * 0.8)).epsilon(1e-14));

    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int i = 0; i < 10000; ++i) {
        const auto r = testing::random_dataset(rng, 3, 2);
        const Eigen::VectorXd t = testing::normal_vector(rng, 2);
        const double delta = u(rng);
        const auto s = adv_loss_sandwich(t, r, noise, delta);
        const double v = gaussian_adv_nll(t, r, noise, delta).value;
        CHECK(s.lower <= v * (1 + 1e-14) + 1e-14);
        CHECK(v <= s.upper * (1 + 1e-14) + 1e-14);
    }
}

TEST_CASE("dimension errors")
{
    std::mt19937_64 rng(13);
    const auto ds = testing::random_dataset(rng, 4, 3);
    const Eigen::VectorXd th = Eigen::VectorXd::Zero(2);
    CHECK_ERROR_CODE(gaussian_nll(th, ds, NoiseModel(1)), ErrorCode::DimensionMismatch);
    CHECK_ERROR_CODE(gaussian_adv_nll(th, ds, NoiseModel(1), 0.1), ErrorCode::DimensionMismatch);
    CHECK_ERROR_CODE(adv_loss_sandwich(th, ds, NoiseModel(1), 0.1), ErrorCode::DimensionMismatch);
    CHECK_ERROR_CODE(gaussian_adv_nll(Eigen::VectorXd::Zero(3).eval(), ds, NoiseModel(1), -0.1),
                     ErrorCode::DomainViolation);
}
