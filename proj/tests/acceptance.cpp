// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
//
// usage: anchorsim_acceptance <work dir> [--config file.json] [--nrep N]
//
// The main grid run is resumable, so a second invocation on the same work
// directory only re-evaluates the criteria.

#include "anchorsim/config.hpp"
#include "anchorsim/harness.hpp"
#include "anchorsim/metrics.hpp"
#include "anchorsim/validation.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace fs = std::filesystem;
using namespace anchorsim;

namespace {

struct Verdict {
    bool passed = true;
    std::vector<std::string> notes;

    void fail(std::string why) {
        passed = false;
        notes.push_back(std::move(why));
    }
};

struct Key {
    double fraction;
    double rate;
    double xi;
    Method method;

    bool operator<(const Key &o) const {
        return std::tie(fraction, rate, xi, method) < std::tie(o.fraction, o.rate, o.xi, o.method);
    }
};

double snap(double x) { return std::round(x * 100.0) / 100.0; }

class Summaries {
  public:
    explicit Summaries(const std::vector<ScenarioSummary> &rows) {
        for (const auto &s : rows) {
            by_key_[{snap(s.village_fraction), snap(s.response_rate), snap(s.xi), s.method}] = s;
        }
    }

    const ScenarioSummary &at(double f, double r, double xi, Method m) const {
        const auto it = by_key_.find({snap(f), snap(r), snap(xi), m});
        if (it == by_key_.end()) {
            throw std::runtime_error(fmt::format("no summary for {} {}", make_scenario_id(f, r, xi), method_name(m)));
        }
        return it->second;
    }

    std::vector<const ScenarioSummary *> all() const {
        std::vector<const ScenarioSummary *> out;
        for (const auto &[k, s] : by_key_) {
            out.push_back(&s);
        }
        return out;
    }

  private:
    std::map<Key, ScenarioSummary> by_key_;
};

constexpr std::array<Method, 2> kMethods{Method::Calibrated, Method::LogisticImputation};
const std::vector<double> kFractions{0.75, 0.50, 0.25};
const std::vector<double> kRates{0.80, 0.65, 0.50};
const std::vector<double> kXis{1.0, 1.1, 1.2, 1.3, 1.4, 1.5};

// Reference coverages at xi = 1 from 1000-replicate runs on the real census,
// {Calibrated, Logistic Regression} per (fraction, rate).
const std::map<std::pair<double, double>, std::array<double, 2>> kReferenceCoverage{
    {{0.75, 0.80}, {0.999, 0.999}}, {{0.75, 0.65}, {0.999, 0.996}}, {{0.75, 0.50}, {1.000, 0.997}},
    {{0.50, 0.80}, {0.983, 0.981}}, {{0.50, 0.65}, {0.986, 0.980}}, {{0.50, 0.50}, {0.981, 0.982}},
    {{0.25, 0.80}, {0.969, 0.960}}, {{0.25, 0.65}, {0.973, 0.960}}, {{0.25, 0.50}, {0.952, 0.958}},
};

std::string cell(double f, double r, double xi, Method m) {
    return fmt::format("{}/{}", make_scenario_id(f, r, xi), method_name(m));
}

double value(const std::optional<MetricValue> &v) { return v ? v->value : std::nan(""); }
double mcse(const std::optional<MetricValue> &v) { return v ? v->mcse : std::nan(""); }

Verdict ignorable_selection(const Summaries &s, std::string &headline) {
    Verdict v;
    double worst_bias = 0.0;
    double worst_cov = 1.0;
    double worst_gap = 0.0;
    for (double f : kFractions) {
        for (double r : kRates) {
            for (std::size_t k = 0; k < kMethods.size(); ++k) {
                const auto &row = s.at(f, r, 1.0, kMethods[k]);
                const double b = value(row.bias);
                const double c = value(row.coverage);
                const double ref = kReferenceCoverage.at({f, r})[k];
                worst_bias = std::max(worst_bias, std::abs(b));
                worst_cov = std::min(worst_cov, c);
                worst_gap = std::max(worst_gap, std::abs(c - ref));
                const std::string id = cell(f, r, 1.0, kMethods[k]);
                if (!(std::abs(b) <= 0.005)) {
                    v.fail(fmt::format("{} |bias| {:.4f} > 0.005", id, std::abs(b)));
                }
                if (!(std::abs(b) <= 3.0 * mcse(row.bias))) {
                    v.fail(fmt::format("{} bias {:.4f} beyond 3 MCSE ({:.4f})", id, b, 3.0 * mcse(row.bias)));
                }
                if (!(c >= 0.94)) {
                    v.fail(fmt::format("{} coverage {:.3f} < 0.94", id, c));
                }
                if (!(std::abs(c - ref) <= 0.03)) {
                    v.fail(fmt::format("{} coverage {:.3f} vs reference {:.3f}", id, c, ref));
                }
            }
        }
    }
    headline = fmt::format("max |bias| {:.4f}, min coverage {:.3f}, max |coverage - reference| {:.3f}", worst_bias,
                           worst_cov, worst_gap);
    return v;
}

Verdict bias_monotone(const Summaries &s, std::string &headline) {
    Verdict v;
    std::vector<std::string> parts;
    for (Method m : kMethods) {
        std::vector<std::string> seq;
        for (std::size_t k = 0; k < kXis.size(); ++k) {
            const auto &row = s.at(0.5, 0.5, kXis[k], m);
            seq.push_back(fmt::format("{:.3f}", value(row.bias)));
            if (k + 1 < kXis.size()) {
                const auto &next = s.at(0.5, 0.5, kXis[k + 1], m);
                const double slack = std::max(mcse(row.bias), mcse(next.bias));
                if (!(value(next.bias) >= value(row.bias) - slack)) {
                    v.fail(fmt::format("{}: bias drops from {:.4f} (xi {}) to {:.4f} (xi {})", method_name(m),
                                       value(row.bias), kXis[k], value(next.bias), kXis[k + 1]));
                }
            }
        }
        const double top = value(s.at(0.5, 0.5, 1.5, m).bias);
        if (!(top >= 0.015 && top <= 0.027)) {
            v.fail(fmt::format("{}: bias at xi 1.5 is {:.4f}, outside [0.015, 0.027]", method_name(m), top));
        }
        parts.push_back(fmt::format("{} {}", method_name(m), fmt::join(seq, " ")));
    }
    headline = fmt::format("{}", fmt::join(parts, "; "));
    return v;
}

Verdict coverage_pattern(const Summaries &s, std::string &headline) {
    Verdict v;
    std::vector<std::string> parts;
    for (Method m : kMethods) {
        const auto &q = s.at(0.25, 0.5, 1.5, m);
        const auto &h = s.at(0.50, 0.5, 1.5, m);
        const auto &t = s.at(0.75, 0.5, 1.5, m);
        auto ordered = [&](const ScenarioSummary &lo_f, const ScenarioSummary &hi_f) {
            const double slack = 2.0 * std::hypot(mcse(lo_f.coverage), mcse(hi_f.coverage));
            if (!(value(lo_f.coverage) > value(hi_f.coverage) - slack)) {
                v.fail(fmt::format("{}: coverage {:.3f} at fraction {} not above {:.3f} at fraction {}",
                                   method_name(m), value(lo_f.coverage), lo_f.village_fraction,
                                   value(hi_f.coverage), hi_f.village_fraction));
            }
        };
        ordered(q, h);
        ordered(h, t);
        if (!(value(t.coverage) < 0.70)) {
            v.fail(fmt::format("{}: coverage at fraction 0.75 is {:.3f}, not below 0.70", method_name(m),
                               value(t.coverage)));
        }
        parts.push_back(fmt::format("{} {:.3f} > {:.3f} > {:.3f}", method_name(m), value(q.coverage),
                                    value(h.coverage), value(t.coverage)));
    }
    headline = fmt::format("{}", fmt::join(parts, "; "));
    return v;
}

Verdict equivalence_floor(const Summaries &s, std::string &headline) {
    Verdict v;
    double worst = 1.0;
    std::string where;
    std::size_t below = 0;
    for (const auto *row : s.all()) {
        const double e = value(row->equiv075);
        if (e < worst) {
            worst = e;
            where = fmt::format("{}/{}", row->scenario_id, method_name(row->method));
        }
        if (!(e >= 0.90 - 2.0 * mcse(row->equiv075))) {
            ++below;
            v.fail(fmt::format("{}/{} equivalence(0.075) {:.3f}", row->scenario_id, method_name(row->method), e));
        }
    }
    headline = fmt::format("min {:.3f} at {}; {} of {} cells below 0.90 - 2 MCSE", worst, where, below, s.all().size());
    return v;
}

Verdict method_comparison(const Summaries &s, std::string &headline) {
    Verdict v;
    double ratio_sum = 0.0;
    std::size_t cells = 0;
    std::size_t cal_wins = 0;
    for (double f : kFractions) {
        for (double r : kRates) {
            for (double xi : kXis) {
                const auto &cal = s.at(f, r, xi, Method::Calibrated);
                const auto &lr = s.at(f, r, xi, Method::LogisticImputation);
                ratio_sum += cal.mean_se / lr.mean_se - 1.0;
                cal_wins += value(cal.coverage) >= value(lr.coverage) ? 1 : 0;
                ++cells;
            }
        }
    }
    const double margin = ratio_sum / static_cast<double>(cells);
    const double share = static_cast<double>(cal_wins) / static_cast<double>(cells);
    if (!(margin >= 0.02 && margin <= 0.10)) {
        v.fail(fmt::format("calibrated SE margin {:.1f}% outside [2%, 10%]", 100 * margin));
    }
    if (!(share >= 0.70)) {
        v.fail(fmt::format("calibrated coverage >= logistic in {:.0f}% of cells, below 70%", 100 * share));
    }
    headline = fmt::format("calibrated SE larger by {:.1f}% on average; calibrated coverage >= logistic in {}/{} cells",
                           100 * margin, cal_wins, cells);
    return v;
}

Verdict oracle_suite(std::string &headline) {
    Verdict v;
    ValidationOptions options;
    options.monte_carlo_redraws = 10000;
    const auto results = run_validation_suite(options);
    std::size_t passed = 0;
    for (const auto &r : results) {
        fmt::print("       {} {}: {}\n", r.passed ? "ok  " : "FAIL", r.name, r.detail);
        if (r.passed) {
            ++passed;
        } else {
            v.fail(r.name);
        }
    }
    headline = fmt::format("{} of {} checks", passed, results.size());
    return v;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Verdict determinism(const RunConfig &base, const fs::path &work, std::string &headline) {
    Verdict v;
    std::vector<std::string> files;
    for (int workers : {1, 8}) {
        RunConfig cfg = base;
        cfg.n_rep = 50;
        cfg.workers = workers;
        cfg.output_dir = (work / fmt::format("determinism_w{}", workers)).string();
        fs::remove_all(cfg.output_dir);
        run_grid(cfg);
        files.push_back(slurp(fs::path(cfg.output_dir) / "replicates.csv"));
    }
    if (files[0].empty() || files[0] != files[1]) {
        v.fail("replicates.csv differs between 1 and 8 workers");
    }
    headline = fmt::format("54 cells x 50 reps, {} bytes, {}", files[0].size(),
                           files[0] == files[1] ? "identical" : "different");
    return v;
}

Verdict mcse_sanity(const Summaries &s, int n_rep, std::string &headline) {
    Verdict v;
    const double c = binomial_mcse(0.5, 1000);
    if (!(std::abs(c - 0.0158) <= 0.0001)) {
        v.fail(fmt::format("coverage MCSE at 0.5, n=1000 is {:.5f}", c));
    }
    double worst = 0.0;
    std::string where;
    for (const auto *row : s.all()) {
        if (mcse(row->bias) > worst) {
            worst = mcse(row->bias);
            where = row->scenario_id;
        }
    }
    const double scaled = worst * std::sqrt(static_cast<double>(n_rep) / 1000.0);
    if (!(scaled <= 0.001)) {
        v.fail(fmt::format("worst bias MCSE {:.5f} at {} scales to {:.5f} at 1000 reps", worst, where, scaled));
    }
    headline = fmt::format("coverage MCSE(0.5, 1000) = {:.5f}; worst bias MCSE {:.5f} ({}), {:.5f} at 1000 reps", c,
                           worst, where, scaled);
    return v;
}

int report(int id, const char *title, const Verdict &v, const std::string &headline) {
    fmt::print("[{}] {} {}: {}\n", v.passed ? "PASS" : "FAIL", id, title, headline);
    const std::size_t shown = std::min<std::size_t>(v.notes.size(), 8);
    for (std::size_t k = 0; k < shown; ++k) {
        fmt::print("       - {}\n", v.notes[k]);
    }
    if (v.notes.size() > shown) {
        fmt::print("       - ... {} more\n", v.notes.size() - shown);
    }
    std::fflush(stdout);
    return v.passed ? 0 : 1;
}

Summaries run(const RunConfig &cfg, const char *label) {
    const auto start = std::chrono::steady_clock::now();
    const RunResult r = run_grid(cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    fmt::print("{}: {} cells x {} reps in {:.0f} s ({} resumed) -> {}\n", label, r.scenarios.size(), cfg.n_rep, secs,
               r.resumed_scenarios, cfg.output_dir);
    std::fflush(stdout);
    return Summaries(r.summaries);
}

} // namespace

int main(int argc, char **argv) {
    if (argc < 2) {
        std::cerr << "usage: anchorsim_acceptance <work dir> [--config file.json] [--nrep N]\n";
        return 2;
    }
    const fs::path work = argv[1];
    RunConfig base;
    int n_rep = 500;
    for (int k = 2; k < argc; ++k) {
        const std::string arg = argv[k];
        if (arg == "--config" && k + 1 < argc) {
            base = load_run_config(argv[++k]);
        } else if (arg == "--nrep" && k + 1 < argc) {
            n_rep = std::stoi(argv[++k]);
        } else {
            std::cerr << "unknown argument '" << arg << "'\n";
            return 2;
        }
    }
    base.workers = 0;
    fs::create_directories(work);

    try {
        RunConfig main_cfg = base;
        main_cfg.n_rep = n_rep;
        main_cfg.output_dir = (work / "grid").string();
        const Summaries s = run(main_cfg, "main grid");

        int failed = 0;
        std::string h;
        Verdict v = ignorable_selection(s, h);
        failed += report(1, "ignorable selection (xi = 1)", v, h);
        v = bias_monotone(s, h);
        failed += report(2, "bias monotone in xi (fraction 0.5, rate 0.5)", v, h);
        v = coverage_pattern(s, h);
        failed += report(3, "coverage falls with fraction (xi 1.5, rate 0.5)", v, h);
        v = equivalence_floor(s, h);
        failed += report(4, "equivalence floor at 0.075", v, h);
        v = method_comparison(s, h);
        failed += report(5, "calibrated vs logistic", v, h);
        v = oracle_suite(h);
        failed += report(6, "oracle suite", v, h);
        v = determinism(base, work, h);
        failed += report(7, "determinism across worker counts", v, h);
        v = mcse_sanity(s, n_rep, h);
        failed += report(8, "MCSE sanity", v, h);

        // Outcome ICC at the census estimate instead of 1/3; reported, not scored.
        RunConfig icc = main_cfg;
        icc.population.icc_vaccination = 0.21;
        icc.outcome.sigma2 = icc_to_variance(0.21);
        icc.grid.xis = {1.0};
        icc.output_dir = (work / "icc021").string();
        const Summaries si = run(icc, "outcome ICC 0.21");
        v = ignorable_selection(si, h);
        fmt::print("[INFO] 1 at outcome ICC 0.21: {} ({})\n", v.passed ? "holds" : "does not hold", h);
        for (std::size_t k = 0; k < std::min<std::size_t>(v.notes.size(), 8); ++k) {
            fmt::print("       - {}\n", v.notes[k]);
        }

        fmt::print("{} of 8 criteria passed\n", 8 - failed);
        return failed == 0 ? 0 : 1;
    } catch (const std::exception &e) {
        std::cerr << "acceptance run aborted: " << e.what() << '\n';
        return 2;
    }
}
