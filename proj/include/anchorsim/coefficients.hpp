#pragma once

namespace anchorsim {

/// Fixed effects on the log-odds scale shared by the outcome and selection models.
/// Covariates: scaled village population, distance (km), child age (months),
/// guardian age (years), child male, guardian male.
struct FixedEffects {
    double intercept = 0.0;
    double population = 0.0;
    double distance = 0.0;
    double child_age = 0.0;
    double guardian_age = 0.0;
    double child_male = 0.0;
    double guardian_male = 0.0;

    bool finite() const noexcept;
};

/// Vaccination model. Defaults are the census mixed-model estimates.
struct OutcomeCoefficients {
    FixedEffects effects{1.38, 0.06, -0.08, 0.01, 0.00, 0.07, -0.24};
    double sigma2 = 1.6449340668482264; ///< village random-intercept variance (ICC 1/3)
    /// Retune the intercept so the expected follow-up prevalence hits this value
    /// (e.g. 0.73); negative, the default, keeps `effects.intercept` as given.
    /// Untuned, follow-up prevalence on the default census is about 0.83.
    double followup_target_rate = -1.0;

    void validate() const;
};

/// Attendance (sample inclusion) model. Defaults are the census estimates for
/// attendance of the previous training; the intercept is retuned per scenario.
struct SelectionCoefficients {
    FixedEffects effects{0.15, -0.33, -0.08, -0.01, 0.01, -0.02, -0.01};
    double tau2 = 1.6449340668482264; ///< village random-intercept variance (ICC 1/3)
    double xi = 1.0;   ///< odds ratio of attendance for vaccinated children

    void validate() const;
};

/// sigma^2 such that sigma^2 / (sigma^2 + pi^2/3) = icc.
double icc_to_variance(double icc);
/// Inverse of icc_to_variance.
double variance_to_icc(double variance);

} // namespace anchorsim
