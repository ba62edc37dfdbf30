#include "anchorsim/csv.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace anchorsim;

namespace {

ReplicateRecord sample_record(std::size_t rep, bool failed) {
    ReplicateRecord r;
    r.scenario_id = "f0.25_r0.50_xi1.5";
    r.village_fraction = 0.25;
    r.response_rate = 0.5;
    r.xi = 1.5;
    r.rep_index = rep;
    r.method = rep % 2 ? Method::LogisticImputation : Method::Calibrated;
    r.p_true = 0.7312345678901234;
    if (failed) {
        r.failure_reason = "complete separation, \"suspected\"";
        return r;
    }
    EstimateResult e;
    e.method = r.method;
    e.p_hat = 0.1 + 0.6;
    e.se = 0.0213;
    std::tie(e.ci95, e.ci90) = wald_intervals(e.p_hat, e.se);
    r.estimate = e;
    return r;
}

std::filesystem::path scratch(const char *name) {
    const auto dir = std::filesystem::temp_directory_path() / "anchorsim_csv_test";
    std::filesystem::create_directories(dir);
    return dir / name;
}

} // namespace

TEST_SUITE("csv") {

TEST_CASE("numbers round-trip exactly") {
    for (double x : {0.0, 0.1 + 0.2, 1.0 / 3.0, -2.5e-17, 20251019.0, 0.7312345678901234}) {
        const std::string s = csv::number(x);
        CHECK(std::stod(s) == x);
    }
    CHECK(csv::number(0.25) == "0.25");
    CHECK(csv::number(1.0) == "1");
}

TEST_CASE("escaping and splitting") {
    CHECK(csv::escape("plain") == "plain");
    CHECK(csv::escape("a,b") == "\"a,b\"");
    CHECK(csv::escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
    const auto cells = csv::split_line("x,\"a,b\",\"say \"\"hi\"\"\",");
    REQUIRE(cells.size() == 4);
    CHECK(cells[1] == "a,b");
    CHECK(cells[2] == "say \"hi\"");
    CHECK(cells[3].empty());
}

TEST_CASE("tables by column name") {
    std::istringstream in("a,b\n1,2\n3,4\n");
    const auto t = csv::read_table(in);
    CHECK(t.rows.size() == 2);
    CHECK(t.column("b") == 1);
    CHECK(t.rows[1][t.column("a")] == "3");
    CHECK_THROWS(t.column("c"));
}

TEST_CASE("replicate rows round-trip, failures included") {
    std::vector<ReplicateRecord> recs;
    for (std::size_t k = 0; k < 6; ++k) {
        recs.push_back(sample_record(k, k == 3));
    }
    const auto path = scratch("replicates.csv");
    {
        std::ofstream out(path);
        csv::write_replicate_header(out);
        for (const auto &r : recs) {
            csv::write_replicate_row(out, r);
        }
    }
    const auto back = csv::read_replicates(path);
    REQUIRE(back.size() == recs.size());
    for (std::size_t k = 0; k < recs.size(); ++k) {
        CHECK(back[k].scenario_id == recs[k].scenario_id);
        CHECK(back[k].rep_index == recs[k].rep_index);
        CHECK(back[k].method == recs[k].method);
        CHECK(back[k].p_true == recs[k].p_true);
        CHECK(back[k].failed() == recs[k].failed());
        if (!recs[k].failed()) {
            CHECK(back[k].estimate->p_hat == recs[k].estimate->p_hat);
            CHECK(back[k].estimate->se == recs[k].estimate->se);
            CHECK(back[k].estimate->ci95.lo == recs[k].estimate->ci95.lo);
            CHECK(back[k].estimate->ci90.hi == recs[k].estimate->ci90.hi);
        } else {
            CHECK(back[k].failure_reason == recs[k].failure_reason);
        }
    }
    const auto table = csv::read_table(path);
    CHECK(table.header == csv::kReplicateColumns);
}

TEST_CASE("summary rows round-trip with missing metrics") {
    std::vector<ScenarioSummary> sums(2);
    sums[0].scenario_id = "f0.75_r0.80_xi1.0";
    sums[0].village_fraction = 0.75;
    sums[0].response_rate = 0.8;
    sums[0].method = Method::Calibrated;
    sums[0].n_rep = 500;
    sums[0].n_rep_effective = 498;
    sums[0].failure_count = 2;
    sums[0].bias = MetricValue{-0.00123, 0.0004};
    sums[0].coverage = MetricValue{0.9996, 0.0009};
    sums[0].equiv05 = MetricValue{0.9, 0.01};
    sums[0].equiv075 = MetricValue{1.0, 0.0};
    sums[0].mean_se = 0.0123;
    sums[1].scenario_id = "f0.75_r0.80_xi1.0";
    sums[1].method = Method::LogisticImputation;
    sums[1].n_rep = 1;
    sums[1].failure_count = 1;

    const auto path = scratch("summary.csv");
    {
        std::ofstream out(path);
        csv::write_summary(out, sums);
    }
    const auto back = csv::read_summary(path);
    REQUIRE(back.size() == 2);
    CHECK(back[0].bias->value == -0.00123);
    CHECK(back[0].coverage->value == 0.9996); // raw, not rendered
    CHECK(back[0].equiv075->mcse == 0.0);
    CHECK(back[0].n_rep_effective == 498);
    CHECK(back[1].method == Method::LogisticImputation);
    CHECK_FALSE(back[1].bias);
    CHECK_FALSE(back[1].coverage);
    CHECK(csv::read_table(path).header == csv::kSummaryColumns);
}

}
