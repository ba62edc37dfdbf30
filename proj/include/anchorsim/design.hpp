#pragma once

#include "anchorsim/dgm.hpp"
#include "anchorsim/population.hpp"

#include <Eigen/Dense>
#include <array>
#include <string_view>
#include <vector>

namespace anchorsim {

/// Columns of the auxiliary vector, in storage order.
enum class Auxiliary {
    Intercept,
    Population,
    Distance,
    ChildAge,
    GuardianAge,
    ChildMale,
    GuardianMale,
    BaselineLogodds,
};

inline constexpr std::size_t kAuxiliaryCount = 8;

std::string_view auxiliary_name(Auxiliary a) noexcept;

/// Order in which auxiliaries are dropped from an ill-conditioned calibration
/// (first entry dropped first). The intercept is never dropped.
inline constexpr std::array<Auxiliary, 7> kDropOrder{
    Auxiliary::Population, Auxiliary::Distance,    Auxiliary::ChildAge,       Auxiliary::ChildMale,
    Auxiliary::GuardianMale, Auxiliary::GuardianAge, Auxiliary::BaselineLogodds,
};

/// Per-child auxiliary vectors for the whole census plus their totals.
struct AuxiliaryMatrix {
    Eigen::MatrixXd x;      ///< N x p, rows in child-id order
    Eigen::VectorXd totals; ///< column sums over all N children
    std::vector<Auxiliary> columns;

    static AuxiliaryMatrix from_population(const Population &pop);
    /// Subset of the columns, keeping their relative order.
    AuxiliaryMatrix select(const std::vector<Auxiliary> &keep) const;
    Eigen::Index column_of(Auxiliary a) const;
};

/// Respondent-level data of one realized two-stage sample.
struct SurveySample {
    std::size_t total_villages = 0;           ///< M
    std::vector<std::size_t> villages;        ///< sampled village ids (PSUs)
    std::vector<int> village_sizes;           ///< V_j per sampled village
    std::vector<int> village_respondents;     ///< v_j per sampled village
    std::vector<std::size_t> psu;             ///< per respondent: index into `villages`
    std::vector<std::size_t> child_ids;       ///< per respondent
    Eigen::MatrixXd x;                        ///< n x p auxiliaries
    Eigen::VectorXd y;                        ///< n outcomes (0/1)

    std::size_t n_respondents() const noexcept { return psu.size(); }
    std::size_t m_villages() const noexcept { return villages.size(); }
};

SurveySample make_survey_sample(const Population &pop, const AuxiliaryMatrix &aux, const Sample &sample,
                                const std::vector<std::uint8_t> &y1);

struct DesignWeights {
    double pi_village = 1.0;         ///< m / M
    std::vector<double> pi_within;   ///< v_j / V_j per sampled village
    Eigen::VectorXd d;               ///< 1 / (pi_village * pi_within) per respondent
};

/// Throws EstimationError on an empty design or a respondent whose village
/// records no respondents.
DesignWeights compute_design_weights(const SurveySample &sample);

} // namespace anchorsim
