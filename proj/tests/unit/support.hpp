#pragma once

#include <certbayes/certbayes.hpp>

#include <doctest.h>

#include <random>

#define CHECK_ERROR_CODE(expr, expected)                                     \
    do {                                                                     \
        bool thrown_ = false;                                                \
        try {                                                                \
            (void)(expr);                                                    \
        } catch (const certbayes::Error& e) {                                \
            thrown_ = true;                                                  \
            CHECK_MESSAGE(e.code() == (expected), e.what());                 \
        }                                                                    \
        CHECK_MESSAGE(thrown_, "expected certbayes::Error from " #expr);     \
    } while (0)

namespace testing {

inline Eigen::MatrixXd normal_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c, double sd = 1)
{
    std::normal_distribution<double> z(0, sd);
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index i = 0; i < r; ++i) m(i, j) = z(rng);
    return m;
}

inline Eigen::VectorXd normal_vector(std::mt19937_64& rng, Eigen::Index r, double sd = 1)
{
    return normal_matrix(rng, r, 1, sd).col(0);
}

inline certbayes::Dataset<double> random_dataset(std::mt19937_64& rng, Eigen::Index n, Eigen::Index d)
{
    return certbayes::validate_dataset(normal_matrix(rng, n, d), normal_vector(rng, n));
}

inline double rel_err(double a, double b) { return a == b ? 0.0 : std::abs(a - b) / std::abs(b); }

} // namespace testing
