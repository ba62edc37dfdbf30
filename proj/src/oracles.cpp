#include "anchorsim/oracles.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace anchorsim::oracle {

Eigen::VectorXd kkt_calibration(const Eigen::VectorXd &d, const Eigen::MatrixXd &x, const Eigen::VectorXd &t) {
    const Eigen::Index n = x.rows();
    const Eigen::Index p = x.cols();
    // Stationarity: (w - d) / d - x lambda = 0; feasibility: x'w = t.
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + p, n + p);
    Eigen::VectorXd rhs(n + p);
    for (Eigen::Index i = 0; i < n; ++i) {
        kkt(i, i) = 1.0 / d(i);
        rhs(i) = 1.0;
    }
    kkt.block(0, n, n, p) = -x;
    kkt.block(n, 0, p, n) = x.transpose();
    rhs.tail(p) = t;
    const Eigen::VectorXd solution = kkt.fullPivLu().solve(rhs);
    return solution.head(n);
}

namespace {

std::vector<double> solve_gauss(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) {
                pivot = r;
            }
        }
        if (std::abs(a[pivot][col]) < 1e-300) {
            throw std::runtime_error("singular system in Newton oracle");
        }
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t r = n; r-- > 0;) {
        double s = b[r];
        for (std::size_t c = r + 1; c < n; ++c) {
            s -= a[r][c] * x[c];
        }
        x[r] = s / a[r][r];
    }
    return x;
}

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

} // namespace

std::vector<double> newton_logistic(const std::vector<std::vector<double>> &rows, const std::vector<double> &y,
                                    int max_iterations, double tolerance) {
    if (rows.empty()) {
        throw std::invalid_argument("no rows");
    }
    const std::size_t p = rows.front().size();
    std::vector<double> beta(p, 0.0);
    for (int it = 0; it < max_iterations; ++it) {
        std::vector<double> grad(p, 0.0);
        std::vector<std::vector<double>> hess(p, std::vector<double>(p, 0.0));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            double eta = 0.0;
            for (std::size_t k = 0; k < p; ++k) {
                eta += rows[i][k] * beta[k];
            }
            const double mu = sigmoid(eta);
            for (std::size_t k = 0; k < p; ++k) {
                grad[k] += rows[i][k] * (y[i] - mu);
                for (std::size_t l = 0; l < p; ++l) {
                    hess[k][l] += mu * (1.0 - mu) * rows[i][k] * rows[i][l];
                }
            }
        }
        const std::vector<double> step = solve_gauss(hess, grad);
        double size = 0.0;
        for (std::size_t k = 0; k < p; ++k) {
            beta[k] += step[k];
            size = std::max(size, std::abs(step[k]));
        }
        if (size < tolerance) {
            break;
        }
    }
    return beta;
}

std::vector<double> imputation_gradient_fd(const std::vector<double> &beta, const Eigen::MatrixXd &census_x,
                                           double h) {
    auto mean_prediction = [&](const std::vector<double> &b) {
        double total = 0.0;
        for (Eigen::Index i = 0; i < census_x.rows(); ++i) {
            double eta = 0.0;
            for (std::size_t k = 0; k < b.size(); ++k) {
                eta += census_x(i, static_cast<Eigen::Index>(k)) * b[k];
            }
            total += sigmoid(eta);
        }
        return total / static_cast<double>(census_x.rows());
    };
    std::vector<double> grad(beta.size());
    for (std::size_t k = 0; k < beta.size(); ++k) {
        std::vector<double> up = beta;
        std::vector<double> down = beta;
        up[k] += h;
        down[k] -= h;
        grad[k] = (mean_prediction(up) - mean_prediction(down)) / (2.0 * h);
    }
    return grad;
}

ToyDesign make_toy_design(std::size_t n_villages, std::size_t sampled_villages, double within_fraction,
                          std::uint64_t seed) {
    if (sampled_villages < 2 || sampled_villages > n_villages || !(within_fraction > 0.0 && within_fraction <= 1.0)) {
        throw std::invalid_argument("invalid toy design");
    }
    Rng rng = Rng::stream(seed, {0, 0, StreamRole::Oracle});
    ToyDesign design;
    auto &pop = design.population;
    pop.villages.resize(n_villages);
    std::size_t next = 0;
    long vaccinated = 0;
    for (std::size_t j = 0; j < n_villages; ++j) {
        auto &v = pop.villages[j];
        v.id = j;
        v.n_children = 8 + static_cast<int>(rng.uniform() * 9.0);
        v.first_child = next;
        v.baseline_vaccinated = 0;
        v.baseline_logodds = 0.0;
        const double village_effect = 0.8 * rng.normal();
        for (int k = 0; k < v.n_children; ++k) {
            Child c;
            c.id = next++;
            c.village_id = j;
            c.age_months = 12 + static_cast<int>(rng.uniform() * 13.0);
            c.guardian_age_yr = 30.0;
            pop.children.push_back(c);
            const double eta = 1.0 + village_effect + 0.15 * (c.age_months - 18);
            const bool y = rng.uniform() < 1.0 / (1.0 + std::exp(-eta));
            design.y.push_back(y ? 1 : 0);
            vaccinated += y ? 1 : 0;
        }
    }
    design.aux = AuxiliaryMatrix::from_population(pop).select({Auxiliary::Intercept, Auxiliary::ChildAge});
    design.sampled_villages = sampled_villages;
    design.within_fraction = within_fraction;
    design.p_true = static_cast<double>(vaccinated) / static_cast<double>(pop.children.size());
    return design;
}

SurveySample draw_toy_sample(const ToyDesign &design, Rng &rng) {
    const auto &pop = design.population;
    const std::size_t big_m = pop.villages.size();
    std::vector<std::size_t> ids(big_m);
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    for (std::size_t k = 0; k < design.sampled_villages; ++k) {
        const std::size_t pick = k + static_cast<std::size_t>(rng.uniform() * static_cast<double>(big_m - k));
        std::swap(ids[k], ids[std::min(pick, big_m - 1)]);
    }
    std::vector<std::size_t> villages(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(design.sampled_villages));
    std::sort(villages.begin(), villages.end());

    Sample sample;
    sample.sampled_villages = villages;
    for (std::size_t j : villages) {
        const auto &v = pop.villages[j];
        const auto size = static_cast<std::size_t>(v.n_children);
        const auto take = static_cast<std::size_t>(std::ceil(design.within_fraction * static_cast<double>(size)));
        std::vector<std::size_t> members(size);
        std::iota(members.begin(), members.end(), v.first_child);
        for (std::size_t k = 0; k < take; ++k) {
            const std::size_t pick = k + static_cast<std::size_t>(rng.uniform() * static_cast<double>(size - k));
            std::swap(members[k], members[std::min(pick, size - 1)]);
        }
        members.resize(take);
        std::sort(members.begin(), members.end());
        sample.respondents.insert(sample.respondents.end(), members.begin(), members.end());
    }
    return make_survey_sample(pop, design.aux, sample, design.y);
}

MonteCarloVariance monte_carlo_variance(const ToyDesign &design, Method method, std::size_t redraws,
                                        std::uint64_t seed, const EstimatorOptions &options) {
    std::vector<double> estimates;
    double se2_total = 0.0;
    MonteCarloVariance out;
    for (std::size_t r = 0; r < redraws; ++r) {
        Rng rng = Rng::stream(seed, {1, r, StreamRole::Oracle});
        const SurveySample sample = draw_toy_sample(design, rng);
        try {
            const EstimateResult e = method == Method::Calibrated ? estimate_calibrated(sample, design.aux, options)
                                                                  : estimate_imputation(sample, design.aux, options);
            estimates.push_back(e.p_hat);
            se2_total += e.se * e.se;
        } catch (const EstimationError &) {
            ++out.failures;
        }
    }
    if (estimates.size() < 2) {
        throw std::runtime_error("Monte Carlo variance oracle: too few successful redraws");
    }
    const double n = static_cast<double>(estimates.size());
    out.mean_p_hat = std::accumulate(estimates.begin(), estimates.end(), 0.0) / n;
    double ss = 0.0;
    for (double e : estimates) {
        ss += (e - out.mean_p_hat) * (e - out.mean_p_hat);
    }
    out.empirical_variance = ss / (n - 1.0);
    out.mean_estimated_variance = se2_total / n;
    return out;
}

} // namespace anchorsim::oracle
