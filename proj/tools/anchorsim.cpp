#include "anchorsim/config.hpp"
#include "anchorsim/debug.hpp"
#include "anchorsim/harness.hpp"
#include "anchorsim/numeric.hpp"
#include "anchorsim/report.hpp"
#include "anchorsim/validation.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <iostream>

namespace {

using namespace anchorsim;

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

struct Common {
    std::string config_path;
    std::string output_dir;
    std::string scenario;
    std::optional<std::uint64_t> seed;
    std::optional<int> n_rep;
    std::optional<int> workers;
    int verbosity = 0;
};

RunConfig resolve_config(const Common &c) {
    RunConfig cfg = c.config_path.empty() ? RunConfig{} : load_run_config(c.config_path);
    apply_environment_overrides(cfg);
    if (!c.output_dir.empty()) {
        cfg.output_dir = c.output_dir;
    }
    if (c.seed) {
        cfg.master_seed = *c.seed;
    }
    if (c.n_rep) {
        cfg.n_rep = *c.n_rep;
    }
    if (c.workers) {
        cfg.workers = *c.workers;
    }
    cfg.validate();
    return cfg;
}

void print_tuning(const TuningTable &table) {
    fmt::print("{:>13} {:>5} {:>10} {:>9} {:>6}\n", "response_rate", "xi", "gamma0", "achieved", "iters");
    for (const auto &[key, t] : table.entries) {
        fmt::print("{:>13.2f} {:>5.1f} {:>10.5f} {:>9.4f} {:>6}\n", key.response_rate, key.xi, t.gamma0,
                   t.achieved_rate, t.iterations);
    }
}

int cmd_tune(const Common &c) {
    const RunConfig cfg = resolve_config(c);
    const SimulationContext ctx = prepare_context(cfg);
    const auto previous = load_tuning_table(cfg.output_dir);
    const TuneReport report = tune_all(cfg, ctx, previous ? &*previous : nullptr);
    save_tuning_table(report.table, cfg.output_dir);
    print_tuning(report.table);
    fmt::print("{} entries: {} tuned, {} cached\n", report.table.entries.size(), report.tuned, report.cached);
    return kOk;
}

int cmd_run(const Common &c) {
    const RunConfig cfg = resolve_config(c);
    RunOptions options;
    if (!c.scenario.empty()) {
        options.filter = ScenarioFilter::parse(c.scenario);
    }
    options.log = [&](const std::string &msg) {
        if (c.verbosity > 0) {
            std::cerr << msg << '\n';
        }
    };
    const RunResult result = run_grid(cfg, options);
    std::size_t alarms = 0;
    for (const auto &s : result.summaries) {
        alarms += s.failure_alarm() ? 1 : 0;
    }
    fmt::print("{} scenarios ({} resumed), {} records, {} summaries with failure rate above 1%\n",
               result.scenarios.size(), result.resumed_scenarios, result.records.size(), alarms);
    fmt::print("outputs in {}\n", cfg.output_dir);
    return kOk;
}

int cmd_report(const Common &c, const std::string &results, const std::string &out) {
    std::filesystem::path dir = results;
    if (dir.empty()) {
        dir = resolve_config(c).output_dir;
    }
    const std::filesystem::path target = out.empty() ? dir / "report" : std::filesystem::path(out);
    const ReportFiles files = write_report(dir, target);
    fmt::print("{}\n{}\n{}\n{} zipper files, {} TOST files\n", files.tables.string(), files.bias.string(),
               files.coverage.string(), files.zipper.size(), files.tost.size());
    return kOk;
}

void print_estimate(const char *label, const std::optional<EstimateResult> &e, const std::string &error) {
    if (!e) {
        fmt::print("{:<12} failed: {}\n", label, error);
        return;
    }
    fmt::print("{:<12} p_hat {:.6f}  se {:.6f}  95% [{:.6f}, {:.6f}]  90% [{:.6f}, {:.6f}]\n", label, e->p_hat,
               e->se, e->ci95.lo, e->ci95.hi, e->ci90.lo, e->ci90.hi);
}

int cmd_validate(const Common &c, const std::string &dump, const std::string &data, std::size_t rep,
                 std::optional<double> sandwich_factor, std::size_t redraws) {
    if (!data.empty()) {
        RunConfig cfg = resolve_config(c);
        cfg.estimators.sandwich.factor_override = sandwich_factor;
        const DumpedRealization d = read_realization_csv(data);
        const SingleShot s = estimate_dumped(d, cfg.estimators);
        fmt::print("children {}  villages {}  sampled villages {}  respondents {}  p_true {:.6f}\n",
                   d.population.children.size(), d.population.villages.size(), d.sample.sampled_villages.size(),
                   d.sample.respondents.size(), s.p_true);
        print_estimate("calibrated", s.calibrated, s.calibrated_error);
        print_estimate("logistic", s.imputation, s.imputation_error);
        return kOk;
    }
    if (!dump.empty()) {
        const RunConfig cfg = resolve_config(c);
        if (c.scenario.empty()) {
            throw ConfigError("--dump needs --scenario");
        }
        const ScenarioFilter filter = ScenarioFilter::parse(c.scenario);
        const SimulationContext ctx = prepare_context(cfg);
        const auto previous = load_tuning_table(cfg.output_dir);
        const TuningTable table = tune_all(cfg, ctx, previous ? &*previous : nullptr).table;
        for (Scenario s : build_grid(cfg.grid)) {
            if (!filter.matches(s)) {
                continue;
            }
            s.gamma0_tuned = table.find(s.response_rate_target, s.xi)->gamma0;
            const Realization r = realize(ctx, s, cfg.selection, cfg.master_seed, rep);
            const std::filesystem::path path = std::filesystem::path(cfg.output_dir) / dump;
            std::filesystem::create_directories(path.parent_path());
            std::ofstream out(path);
            write_realization_csv(ctx.population, r, out);
            fmt::print("{} rep {} written to {}\n", s.scenario_id, rep, path.string());
            return out ? kOk : kRuntimeError;
        }
        throw ConfigError("scenario filter matches no grid cell");
    }

    ValidationOptions options;
    options.sandwich_factor_override = sandwich_factor;
    options.monte_carlo_redraws = redraws;
    options.on_check = [](const CheckResult &r) {
        fmt::print("[{}] {}: {}\n", r.passed ? "PASS" : "FAIL", r.name, r.detail);
        std::fflush(stdout);
    };
    const auto results = run_validation_suite(options);
    std::size_t failed = 0;
    for (const auto &r : results) {
        failed += r.passed ? 0 : 1;
    }
    fmt::print("{} of {} checks passed\n", results.size() - failed, results.size());
    return failed == 0 ? kOk : kRuntimeError;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Two-stage convenience-sample simulation: calibration vs logistic imputation"};
    app.set_version_flag("--version", ANCHORSIM_VERSION);
    app.require_subcommand(1);

    Common c;
    auto add_common = [&](CLI::App *sub) {
        sub->add_option("-c,--config", c.config_path, "JSON run configuration")->check(CLI::ExistingFile);
        sub->add_option("-o,--out", c.output_dir, "output directory (overrides the config)");
        sub->add_option("--seed", c.seed, "master seed override");
        sub->add_option("--workers", c.workers, "worker threads (0 = all cores)");
        sub->add_flag_function(
            "-v,--verbose", [&](std::int64_t n) { c.verbosity = static_cast<int>(n); }, "progress on stderr");
    };

    auto *tune = app.add_subcommand("tune", "tune selection intercepts for every (rate, xi) pair");
    add_common(tune);

    auto *run = app.add_subcommand("run", "run the scenario grid");
    add_common(run);
    run->add_option("--scenario", c.scenario, "filter, e.g. fraction=0.25,rate=0.5,xi=1.5");
    run->add_option("--nrep", c.n_rep, "replicates per scenario");

    std::string results_dir, report_out;
    auto *report = app.add_subcommand("report", "render tables and plot data from a results directory");
    add_common(report);
    report->add_option("results", results_dir, "results directory (default: the config's output_dir)");
    report->add_option("--report-dir", report_out, "where to write (default: <results>/report)");

    std::string dump, data;
    std::size_t rep = 0;
    std::size_t redraws = 10000;
    std::optional<double> sandwich_factor;
    auto *validate = app.add_subcommand("validate", "oracle and invariant checks, or single-shot estimation");
    add_common(validate);
    validate->add_option("--scenario", c.scenario, "scenario for --dump");
    validate->add_option("--dump", dump, "write one realization (population + sample) to <out>/<file>");
    validate->add_option("--rep", rep, "replicate index for --dump");
    validate->add_option("--data", data, "estimate both methods on a dumped realization")->check(CLI::ExistingFile);
    validate->add_option("--redraws", redraws, "Monte Carlo redraws for the variance checks");
    validate->add_option("--sandwich-factor", sandwich_factor)->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*tune) {
            return cmd_tune(c);
        }
        if (*run) {
            return cmd_run(c);
        }
        if (*report) {
            return cmd_report(c, results_dir, report_out);
        }
        return cmd_validate(c, dump, data, rep, sandwich_factor, redraws);
    } catch (const ConfigError &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::invalid_argument &e) {
        std::cerr << "invalid argument: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
}
