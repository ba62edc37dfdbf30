#include "anchorsim/report.hpp"

#include "anchorsim/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace anchorsim {

namespace fs = std::filesystem;

std::vector<ScenarioSummary> table_order(std::vector<ScenarioSummary> summaries) {
    std::stable_sort(summaries.begin(), summaries.end(), [](const ScenarioSummary &a, const ScenarioSummary &b) {
        if (a.xi != b.xi) {
            return a.xi < b.xi;
        }
        if (a.village_fraction != b.village_fraction) {
            return a.village_fraction > b.village_fraction;
        }
        if (a.response_rate != b.response_rate) {
            return a.response_rate > b.response_rate;
        }
        return a.method == Method::Calibrated && b.method != Method::Calibrated;
    });
    return summaries;
}

std::string render_tables(const std::vector<ScenarioSummary> &summaries) {
    const auto rows = table_order(summaries);
    std::string out;
    bool first_block = true;
    double xi = std::nan("");
    double fraction = std::nan("");
    double rate = std::nan("");
    auto cell = [](const std::optional<MetricValue> &m, bool is_bias) {
        if (!m) {
            return std::string("NA");
        }
        return is_bias ? format_bias(m->value) : format_proportion(m->value);
    };
    for (const auto &s : rows) {
        if (s.xi != xi) {
            xi = s.xi;
            fraction = std::nan("");
            if (!first_block) {
                out += '\n';
            }
            first_block = false;
            out += fmt::format("### Odds Ratio for Selection Bias xi = {:.1f}\n\n", xi);
            out += "| Village Sampling Proportion | Participation Rate | Method | Bias | Coverage (95% CI) | "
                   "TOST Equivalence ±5% | TOST Equivalence ±7.5% | Failures |\n";
            out += "|---|---|---|---|---|---|---|---|\n";
        }
        std::string f_cell;
        std::string r_cell;
        if (s.village_fraction != fraction) {
            fraction = s.village_fraction;
            rate = std::nan("");
            f_cell = fmt::format("{:.2f}", fraction);
        }
        if (s.response_rate != rate) {
            rate = s.response_rate;
            r_cell = fmt::format("{:.2f}", rate);
        }
        out += fmt::format("| {} | {} | {} | {} | {} | {} | {} | {} |\n", f_cell, r_cell, method_label(s.method),
                           cell(s.bias, true), cell(s.coverage, false), cell(s.equiv05, false),
                           cell(s.equiv075, false), s.failure_count);
    }
    return out;
}

void write_bias_long(std::ostream &out, const std::vector<ScenarioSummary> &summaries) {
    out << "xi,fraction,response_rate,method,bias,bias_mcse,bias_lo,bias_hi\n";
    for (const auto &s : table_order(summaries)) {
        if (!s.bias) {
            continue;
        }
        const double half = kZ975 * s.bias->mcse;
        out << fmt::format("{},{},{},{},{},{},{},{}\n", csv::number(s.xi), csv::number(s.village_fraction),
                           csv::number(s.response_rate), method_name(s.method), csv::number(s.bias->value),
                           csv::number(s.bias->mcse), csv::number(s.bias->value - half),
                           csv::number(s.bias->value + half));
    }
}

void write_coverage_long(std::ostream &out, const std::vector<ScenarioSummary> &summaries) {
    out << "xi,fraction,response_rate,method,coverage,coverage_mcse\n";
    for (const auto &s : table_order(summaries)) {
        if (!s.coverage) {
            continue;
        }
        out << fmt::format("{},{},{},{},{},{}\n", csv::number(s.xi), csv::number(s.village_fraction),
                           csv::number(s.response_rate), method_name(s.method), csv::number(s.coverage->value),
                           csv::number(s.coverage->mcse));
    }
}

void write_zipper(std::ostream &out, std::vector<ReplicateRecord> records) {
    std::erase_if(records, [](const ReplicateRecord &r) { return r.failed(); });
    std::stable_sort(records.begin(), records.end(), [](const ReplicateRecord &a, const ReplicateRecord &b) {
        const double wa = a.estimate->ci95.width();
        const double wb = b.estimate->ci95.width();
        return wa != wb ? wa < wb : a.rep_index < b.rep_index;
    });
    out << "rank,rep,p_true,p_hat,ci95_lo,ci95_hi,width,covered\n";
    for (std::size_t k = 0; k < records.size(); ++k) {
        const auto &r = records[k];
        const auto &e = *r.estimate;
        out << fmt::format("{},{},{},{},{},{},{},{}\n", k + 1, r.rep_index, csv::number(r.p_true),
                           csv::number(e.p_hat), csv::number(e.ci95.lo), csv::number(e.ci95.hi),
                           csv::number(e.ci95.width()), r.covered() ? 1 : 0);
    }
}

void write_tost(std::ostream &out, std::vector<ReplicateRecord> records) {
    std::erase_if(records, [](const ReplicateRecord &r) { return r.failed(); });
    auto signed_bias = [](const ReplicateRecord &r) { return r.estimate->p_hat - r.p_true; };
    std::stable_sort(records.begin(), records.end(), [&](const ReplicateRecord &a, const ReplicateRecord &b) {
        const double ba = signed_bias(a);
        const double bb = signed_bias(b);
        return ba != bb ? ba < bb : a.rep_index < b.rep_index;
    });
    out << "rank,rep,bias,lo,hi,within05,within075\n";
    for (std::size_t k = 0; k < records.size(); ++k) {
        const auto &r = records[k];
        out << fmt::format("{},{},{},{},{},{},{}\n", k + 1, r.rep_index, csv::number(signed_bias(r)),
                           csv::number(r.estimate->ci90.lo - r.p_true), csv::number(r.estimate->ci90.hi - r.p_true),
                           r.equivalent(0.05) ? 1 : 0, r.equivalent(0.075) ? 1 : 0);
    }
}

namespace {

void write_file(const fs::path &path, const std::string &content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
    }
    out << content;
}

} // namespace

ReportFiles write_report(const fs::path &results_dir, const fs::path &out_dir) {
    const fs::path summary_path = results_dir / "summary.csv";
    if (!fs::exists(summary_path)) {
        throw std::runtime_error(
            fmt::format("missing '{}': run the simulation before building a report", summary_path.string()));
    }
    const auto summaries = csv::read_summary(summary_path);
    fs::create_directories(out_dir);

    ReportFiles files;
    files.tables = out_dir / "tables.md";
    write_file(files.tables, render_tables(summaries));
    files.bias = out_dir / "bias_by_scenario.csv";
    files.coverage = out_dir / "coverage_by_scenario.csv";
    {
        std::ostringstream bias_out;
        write_bias_long(bias_out, summaries);
        write_file(files.bias, bias_out.str());
        std::ostringstream cov_out;
        write_coverage_long(cov_out, summaries);
        write_file(files.coverage, cov_out.str());
    }

    const fs::path replicates_path = results_dir / "replicates.csv";
    if (!fs::exists(replicates_path)) {
        return files;
    }
    std::map<std::pair<std::string, Method>, std::vector<ReplicateRecord>> groups;
    for (auto &r : csv::read_replicates(replicates_path)) {
        groups[{r.scenario_id, r.method}].push_back(std::move(r));
    }
    fs::create_directories(out_dir / "zipper");
    fs::create_directories(out_dir / "tost");
    for (auto &[key, records] : groups) {
        const std::string stem = fmt::format("{}_{}.csv", key.first, method_name(key.second));
        std::ostringstream zip;
        write_zipper(zip, records);
        files.zipper.push_back(out_dir / "zipper" / stem);
        write_file(files.zipper.back(), zip.str());
        std::ostringstream tost;
        write_tost(tost, std::move(records));
        files.tost.push_back(out_dir / "tost" / stem);
        write_file(files.tost.back(), tost.str());
    }
    return files;
}

} // namespace anchorsim
