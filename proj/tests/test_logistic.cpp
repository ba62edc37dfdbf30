#include "anchorsim/estimate.hpp"
#include "anchorsim/logistic.hpp"
#include "anchorsim/numeric.hpp"
#include "anchorsim/oracles.hpp"
#include "anchorsim/random.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace anchorsim;

namespace {

struct Data {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
};

Data two_by_two() {
    // exposed: 30 events, 10 non-events; unexposed: 10 events, 30 non-events
    Data d{Eigen::MatrixXd(80, 2), Eigen::VectorXd(80)};
    for (int i = 0; i < 80; ++i) {
        const bool exposed = i < 40;
        d.x(i, 0) = 1.0;
        d.x(i, 1) = exposed ? 1.0 : 0.0;
        const int k = i % 40;
        d.y(i) = exposed ? (k < 30 ? 1.0 : 0.0) : (k < 10 ? 1.0 : 0.0);
    }
    return d;
}

Data simulated_rows(Rng &rng, int n) {
    Data d{Eigen::MatrixXd(n, 3), Eigen::VectorXd(n)};
    for (int i = 0; i < n; ++i) {
        d.x(i, 0) = 1.0;
        d.x(i, 1) = rng.normal();
        d.x(i, 2) = rng.bernoulli(0.4);
        d.y(i) = rng.bernoulli(expit(0.3 + 0.8 * d.x(i, 1) - 0.5 * d.x(i, 2)));
    }
    return d;
}

std::vector<std::vector<double>> rows_of(const Eigen::MatrixXd &x) {
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index k = 0; k < x.cols(); ++k) {
            rows[static_cast<std::size_t>(i)].push_back(x(i, k));
        }
    }
    return rows;
}

bool symmetric_psd(const Eigen::MatrixXd &m) {
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
        return false;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    return es.eigenvalues().minCoeff() > -1e-10 * std::max(1.0, m.cwiseAbs().maxCoeff());
}

} // namespace

TEST_SUITE("logistic") {

TEST_CASE("intercept-only fit is the logit of the mean") {
    Eigen::VectorXd y(20);
    for (int i = 0; i < 20; ++i) {
        y(i) = i < 15;
    }
    const auto fit = fit_logistic(Eigen::MatrixXd::Ones(20, 1), y);
    CHECK(fit.converged);
    CHECK(fit.beta(0) == doctest::Approx(1.09861).epsilon(1e-5));
    CHECK(fit.beta(0) == doctest::Approx(std::log(3.0)).epsilon(1e-10));
}

TEST_CASE("binary covariate slope is the log odds ratio") {
    const Data d = two_by_two();
    const auto fit = fit_logistic(d.x, d.y);
    CHECK(fit.beta(1) == doctest::Approx(2.19722).epsilon(1e-5));
    CHECK(fit.beta(1) == doctest::Approx(std::log(9.0)).epsilon(1e-10));
    CHECK(fit.beta(0) == doctest::Approx(std::log(1.0 / 3.0)).epsilon(1e-10));
}

TEST_CASE("property: IRLS agrees with an independent Newton solver") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const Data d = simulated_rows(rng, 100 + trial * 10);
        const auto fit = fit_logistic(d.x, d.y);
        const auto ref = oracle::newton_logistic(rows_of(d.x), std::vector<double>(d.y.data(), d.y.data() + d.y.size()));
        for (Eigen::Index k = 0; k < fit.beta.size(); ++k) {
            CHECK(std::abs(fit.beta(k) - ref[static_cast<std::size_t>(k)]) < 1e-6);
        }
        // score equations with an intercept: fitted mean equals the observed mean
        CHECK(fit.fitted.mean() == doctest::Approx(d.y.mean()).epsilon(1e-9));
        CHECK(symmetric_psd(fit.bread));
    }
}

TEST_CASE("fit failures") {
    CHECK_THROWS_AS(fit_logistic(Eigen::MatrixXd::Ones(5, 1), Eigen::VectorXd::Ones(5)), EstimationError);
    CHECK_THROWS_AS(fit_logistic(Eigen::MatrixXd::Ones(1, 2), Eigen::VectorXd::Zero(1)), EstimationError);
    CHECK_THROWS_AS(fit_logistic(Eigen::MatrixXd(0, 1), Eigen::VectorXd(0)), EstimationError);

    // perfectly separated by the covariate
    Eigen::MatrixXd x(10, 2);
    Eigen::VectorXd y(10);
    for (int i = 0; i < 10; ++i) {
        x(i, 0) = 1.0;
        x(i, 1) = i;
        y(i) = i >= 5;
    }
    CHECK_THROWS_AS(fit_logistic(x, y), EstimationError);

    // duplicated column
    Eigen::MatrixXd dup(10, 2);
    dup.col(0).setOnes();
    dup.col(1).setOnes();
    Eigen::VectorXd yy(10);
    for (int i = 0; i < 10; ++i) {
        yy(i) = i % 3 == 0;
    }
    CHECK_THROWS_AS(fit_logistic(dup, yy), EstimationError);
}

TEST_CASE("singleton clusters reduce to the heteroskedasticity-robust sandwich") {
    Rng rng(8);
    const Data d = simulated_rows(rng, 200);
    const auto fit = fit_logistic(d.x, d.y);
    std::vector<std::size_t> ids(200);
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    SandwichOptions raw;
    raw.small_sample_correction = false;
    const Eigen::MatrixXd cov = cluster_sandwich(fit, d.x, d.y, ids, raw);

    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(3, 3);
    for (Eigen::Index i = 0; i < 200; ++i) {
        const double r = d.y(i) - expit(d.x.row(i).dot(fit.beta));
        meat += r * r * d.x.row(i).transpose() * d.x.row(i);
    }
    const Eigen::MatrixXd bread = (d.x.transpose() * (fit.fitted.array() * (1 - fit.fitted.array())).matrix().asDiagonal() * d.x).inverse();
    const Eigen::MatrixXd hc = bread * meat * bread;
    CHECK((cov - hc).cwiseAbs().maxCoeff() < 1e-10 * hc.cwiseAbs().maxCoeff());

    const Eigen::MatrixXd corrected = cluster_sandwich(fit, d.x, d.y, ids);
    CHECK((corrected - hc * 200.0 / 199.0).cwiseAbs().maxCoeff() < 1e-10 * hc.cwiseAbs().maxCoeff());
}

TEST_CASE("two identical clusters: meat is twice the single-cluster outer product") {
    // four rows, clusters {0,1} and {2,3} carry identical data
    Eigen::MatrixXd x(4, 2);
    x << 1, 0.5, 1, -1.0, 1, 0.5, 1, -1.0;
    Eigen::VectorXd y(4);
    y << 1, 0, 1, 0;
    LogisticFit fit;
    fit.beta = Eigen::Vector2d(0.2, 0.1);
    fit.fitted = (x * fit.beta).unaryExpr([](double t) { return expit(t); });
    fit.bread = Eigen::Matrix2d::Identity();
    const Eigen::Vector2d u = x.topRows(2).transpose() * (y.head(2) - fit.fitted.head(2));
    SandwichOptions raw;
    raw.small_sample_correction = false;
    const Eigen::MatrixXd meat = cluster_sandwich(fit, x, y, {7, 7, 9, 9}, raw);
    CHECK((meat - 2.0 * u * u.transpose()).cwiseAbs().maxCoeff() < 1e-14);
    // g = 2 doubles it again
    CHECK((cluster_sandwich(fit, x, y, {7, 7, 9, 9}) - 4.0 * u * u.transpose()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("duplicating every cluster leaves beta and halves the covariance") {
    Rng rng(9);
    const Data d = simulated_rows(rng, 120);
    std::vector<std::size_t> clusters(120);
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        clusters[i] = i / 6;
    }
    Data twice{Eigen::MatrixXd(240, 3), Eigen::VectorXd(240)};
    twice.x << d.x, d.x;
    twice.y << d.y, d.y;
    std::vector<std::size_t> doubled = clusters;
    for (std::size_t c : clusters) {
        doubled.push_back(c + 1000);
    }
    SandwichOptions raw;
    raw.small_sample_correction = false;
    const auto f1 = fit_logistic(d.x, d.y);
    const auto f2 = fit_logistic(twice.x, twice.y);
    CHECK((f1.beta - f2.beta).cwiseAbs().maxCoeff() < 1e-9);
    const Eigen::MatrixXd c1 = cluster_sandwich(f1, d.x, d.y, clusters, raw);
    const Eigen::MatrixXd c2 = cluster_sandwich(f2, twice.x, twice.y, doubled, raw);
    CHECK((c2 - 0.5 * c1).cwiseAbs().maxCoeff() < 1e-9 * c1.cwiseAbs().maxCoeff());
    CHECK(symmetric_psd(c1));
}

TEST_CASE("sandwich needs two clusters and matching labels") {
    const Data d = two_by_two();
    const auto fit = fit_logistic(d.x, d.y);
    CHECK_THROWS_AS(cluster_sandwich(fit, d.x, d.y, std::vector<std::size_t>(80, 3)), EstimationError);
    CHECK_THROWS_AS(cluster_sandwich(fit, d.x, d.y, std::vector<std::size_t>(79, 3)), std::invalid_argument);
}

TEST_CASE("factor override replaces the small-sample factor") {
    Rng rng(10);
    const Data d = simulated_rows(rng, 60);
    std::vector<std::size_t> clusters(60);
    for (std::size_t i = 0; i < 60; ++i) {
        clusters[i] = i / 10;
    }
    const auto fit = fit_logistic(d.x, d.y);
    SandwichOptions zero;
    zero.factor_override = 0.0;
    CHECK(cluster_sandwich(fit, d.x, d.y, clusters, zero).cwiseAbs().maxCoeff() == 0.0);
    SandwichOptions raw;
    raw.small_sample_correction = false;
    CHECK((cluster_sandwich(fit, d.x, d.y, clusters) - 1.2 * cluster_sandwich(fit, d.x, d.y, clusters, raw))
              .cwiseAbs()
              .maxCoeff() < 1e-14);
}

}
