#include "anchorsim/imputation.hpp"
#include "anchorsim/logistic.hpp"
#include "anchorsim/numeric.hpp"
#include "anchorsim/oracles.hpp"
#include "anchorsim/random.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace anchorsim;

TEST_SUITE("imputation") {

TEST_CASE("zero coefficients predict one half") {
    Eigen::MatrixXd census = Eigen::MatrixXd::Random(30, 4);
    CHECK(imputation_estimate(Eigen::VectorXd::Zero(4), census) == 0.5);
}

TEST_CASE("intercept-only model predicts the sample mean for any census size") {
    Eigen::VectorXd y(8);
    y << 1, 1, 1, 0, 1, 1, 0, 1;
    const auto fit = fit_logistic(Eigen::MatrixXd::Ones(8, 1), y);
    for (int n : {1, 12, 5000}) {
        CHECK(imputation_estimate(fit.beta, Eigen::MatrixXd::Ones(n, 1)) == doctest::Approx(0.75).epsilon(1e-10));
    }
}

TEST_CASE("twelve-child census by hand") {
    Eigen::MatrixXd census(12, 2);
    double expected = 0.0;
    for (int i = 0; i < 12; ++i) {
        census(i, 0) = 1.0;
        census(i, 1) = 12 + i;
        expected += 1.0 / (1.0 + std::exp(-(-2.0 + 0.15 * (12 + i))));
    }
    CHECK(imputation_estimate(Eigen::Vector2d(-2.0, 0.15), census) == doctest::Approx(expected / 12).epsilon(1e-14));
}

TEST_CASE("restricting the census to the respondents gives back their mean") {
    Rng rng(3);
    Eigen::MatrixXd x(150, 3);
    Eigen::VectorXd y(150);
    for (int i = 0; i < 150; ++i) {
        x(i, 0) = 1.0;
        x(i, 1) = rng.normal();
        x(i, 2) = rng.uniform();
        y(i) = rng.bernoulli(expit(0.5 * x(i, 1) + x(i, 2)));
    }
    const auto fit = fit_logistic(x, y);
    CHECK(imputation_estimate(fit.beta, x) == doctest::Approx(y.mean()).epsilon(1e-9));
}

TEST_CASE("property: gradient matches central differences") {
    Rng rng(4);
    for (int trial = 0; trial < 30; ++trial) {
        Eigen::MatrixXd census(200, 4);
        for (int i = 0; i < 200; ++i) {
            census(i, 0) = 1.0;
            census(i, 1) = 12 + static_cast<int>(rng.uniform() * 13);
            census(i, 2) = rng.bernoulli(0.5);
            census(i, 3) = rng.normal(-1.0, 1.5);
        }
        std::vector<double> beta{rng.normal(0.0, 0.5), rng.normal(0.0, 0.05), rng.normal(0.0, 0.5),
                                 rng.normal(0.5, 0.3)};
        const Eigen::VectorXd b = Eigen::Map<Eigen::VectorXd>(beta.data(), 4);
        const Eigen::VectorXd g = imputation_gradient(b, census);
        const auto fd = oracle::imputation_gradient_fd(beta, census);
        double scale = 0.0;
        for (double v : fd) {
            scale = std::max(scale, std::abs(v));
        }
        for (int k = 0; k < 4; ++k) {
            const double denom = std::max(std::abs(fd[static_cast<std::size_t>(k)]), 1e-3 * scale);
            CHECK(std::abs(g(k) - fd[static_cast<std::size_t>(k)]) / denom < 1e-4);
        }
    }
}

TEST_CASE("delta method") {
    CHECK(imputation_variance(Eigen::Vector3d(0.1, 0.2, 0.3), Eigen::Matrix3d::Zero()).se == 0.0);

    // intercept only: se = pbar (1 - pbar) sqrt(Sigma_00)
    const double b0 = logit(0.7);
    const Eigen::VectorXd g = imputation_gradient(Eigen::VectorXd::Constant(1, b0), Eigen::MatrixXd::Ones(50, 1));
    const auto v = imputation_variance(g, Eigen::MatrixXd::Constant(1, 1, 0.04));
    CHECK(v.se == doctest::Approx(0.7 * 0.3 * 0.2).epsilon(1e-12));
    CHECK_FALSE(v.clamped);

    Eigen::Matrix2d indefinite;
    indefinite << 1, 0, 0, -4;
    const auto c = imputation_variance(Eigen::Vector2d(0.1, 0.1), indefinite);
    CHECK(c.clamped);
    CHECK(c.se == 0.0);
}

TEST_CASE("empty census is rejected") {
    CHECK_THROWS_AS(imputation_estimate(Eigen::VectorXd::Zero(2), Eigen::MatrixXd(0, 2)), std::invalid_argument);
    CHECK_THROWS_AS(imputation_gradient(Eigen::VectorXd::Zero(2), Eigen::MatrixXd(0, 2)), std::invalid_argument);
}

}
