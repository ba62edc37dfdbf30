#include "anchorsim/validation.hpp"

#include <doctest.h>

#include <algorithm>

using namespace anchorsim;

TEST_SUITE("validation") {

TEST_CASE("every built-in check passes") {
    ValidationOptions options;
    options.monte_carlo_redraws = 2000;
    std::size_t seen = 0;
    options.on_check = [&](const CheckResult &) { ++seen; };
    const auto results = run_validation_suite(options);
    CHECK(results.size() == seen);
    CHECK(results.size() >= 8);
    for (const auto &r : results) {
        INFO(r.name << ": " << r.detail);
        CHECK(r.passed);
    }
}

TEST_CASE("a broken sandwich is caught by the variance oracle and nothing else") {
    ValidationOptions options;
    options.monte_carlo_redraws = 2000;
    options.sandwich_factor_override = 0.0;
    const auto results = run_validation_suite(options);
    std::vector<std::string> failed;
    for (const auto &r : results) {
        if (!r.passed) {
            failed.push_back(r.name);
        }
    }
    REQUIRE(failed.size() == 1);
    CHECK(failed[0].find("imputation") != std::string::npos);
    CHECK(failed[0].find("variance") != std::string::npos);
}

}
