#include "anchorsim/csv.hpp"

#include <fmt/format.h>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace anchorsim::csv {

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) {
        return std::string(field);
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else if (c != '\r') {
            current += c;
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

std::size_t Table::column(std::string_view name) const {
    for (std::size_t k = 0; k < header.size(); ++k) {
        if (header[k] == name) {
            return k;
        }
    }
    throw std::runtime_error(fmt::format("CSV column '{}' missing", name));
}

Table read_table(std::istream &in) {
    Table t;
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("CSV input is empty");
    }
    t.header = split_line(line);
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        auto row = split_line(line);
        if (row.size() != t.header.size()) {
            throw std::runtime_error(fmt::format("CSV row has {} fields, header has {}", row.size(), t.header.size()));
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table read_table(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error(fmt::format("cannot open '{}'", path.string()));
    }
    return read_table(in);
}

std::string number(double x) { return fmt::format("{}", x); }

const std::vector<std::string> kReplicateColumns{
    "scenario_id", "fraction", "response_rate", "xi",      "rep",     "method",   "p_true", "p_hat",  "se",
    "ci95_lo",     "ci95_hi",  "ci90_lo",       "ci90_hi", "covered", "equiv05", "equiv075", "failed", "reason"};

const std::vector<std::string> kSummaryColumns{
    "scenario_id",  "fraction", "response_rate", "xi",           "method",        "n_rep",
    "n_rep_effective", "failure_count", "bias",  "bias_mcse",    "coverage",      "coverage_mcse",
    "equiv05",      "equiv05_mcse", "equiv075",  "equiv075_mcse", "mean_se",      "failure_alarm"};

namespace {

std::string join(const std::vector<std::string> &cells) {
    std::string out;
    for (std::size_t k = 0; k < cells.size(); ++k) {
        if (k > 0) {
            out += ',';
        }
        out += escape(cells[k]);
    }
    return out;
}

double to_double(const std::string &s) { return std::stod(s); }

std::optional<MetricValue> metric_cells(const std::vector<std::string> &row, std::size_t value, std::size_t mcse) {
    if (row[value].empty()) {
        return std::nullopt;
    }
    return MetricValue{to_double(row[value]), to_double(row[mcse])};
}

} // namespace

void write_replicate_header(std::ostream &out) { out << join(kReplicateColumns) << '\n'; }

void write_replicate_row(std::ostream &out, const ReplicateRecord &r) {
    std::vector<std::string> cells{r.scenario_id,
                                   number(r.village_fraction),
                                   number(r.response_rate),
                                   number(r.xi),
                                   std::to_string(r.rep_index),
                                   std::string(method_name(r.method)),
                                   number(r.p_true)};
    if (r.estimate) {
        const auto &e = *r.estimate;
        for (double v : {e.p_hat, e.se, e.ci95.lo, e.ci95.hi, e.ci90.lo, e.ci90.hi}) {
            cells.push_back(number(v));
        }
        cells.emplace_back(r.covered() ? "1" : "0");
        cells.emplace_back(r.equivalent(0.05) ? "1" : "0");
        cells.emplace_back(r.equivalent(0.075) ? "1" : "0");
        cells.emplace_back("0");
        cells.emplace_back("");
    } else {
        for (int k = 0; k < 9; ++k) {
            cells.emplace_back("");
        }
        cells.emplace_back("1");
        cells.push_back(r.failure_reason);
    }
    out << join(cells) << '\n';
}

std::vector<ReplicateRecord> parse_replicates(const Table &t) {
    std::vector<std::size_t> idx;
    for (const auto &name : kReplicateColumns) {
        idx.push_back(t.column(name));
    }
    std::vector<ReplicateRecord> out;
    out.reserve(t.rows.size());
    for (const auto &row : t.rows) {
        ReplicateRecord r;
        r.scenario_id = row[idx[0]];
        r.village_fraction = to_double(row[idx[1]]);
        r.response_rate = to_double(row[idx[2]]);
        r.xi = to_double(row[idx[3]]);
        r.rep_index = std::stoull(row[idx[4]]);
        r.method = parse_method(row[idx[5]]);
        r.p_true = to_double(row[idx[6]]);
        if (row[idx[16]] == "1") {
            r.failure_reason = row[idx[17]];
        } else {
            EstimateResult e;
            e.method = r.method;
            e.p_hat = to_double(row[idx[7]]);
            e.se = to_double(row[idx[8]]);
            e.ci95 = {to_double(row[idx[9]]), to_double(row[idx[10]])};
            e.ci90 = {to_double(row[idx[11]]), to_double(row[idx[12]])};
            r.estimate = e;
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<ReplicateRecord> read_replicates(const std::filesystem::path &path) {
    return parse_replicates(read_table(path));
}

void write_summary(std::ostream &out, const std::vector<ScenarioSummary> &summaries) {
    out << join(kSummaryColumns) << '\n';
    auto metric = [](std::vector<std::string> &cells, const std::optional<MetricValue> &m) {
        cells.push_back(m ? number(m->value) : "");
        cells.push_back(m ? number(m->mcse) : "");
    };
    for (const auto &s : summaries) {
        std::vector<std::string> cells{s.scenario_id,
                                       number(s.village_fraction),
                                       number(s.response_rate),
                                       number(s.xi),
                                       std::string(method_name(s.method)),
                                       std::to_string(s.n_rep),
                                       std::to_string(s.n_rep_effective),
                                       std::to_string(s.failure_count)};
        metric(cells, s.bias);
        metric(cells, s.coverage);
        metric(cells, s.equiv05);
        metric(cells, s.equiv075);
        cells.push_back(number(s.mean_se));
        cells.emplace_back(s.failure_alarm() ? "1" : "0");
        out << join(cells) << '\n';
    }
}

std::vector<ScenarioSummary> read_summary(const std::filesystem::path &path) {
    const Table t = read_table(path);
    std::vector<std::size_t> idx;
    for (const auto &name : kSummaryColumns) {
        idx.push_back(t.column(name));
    }
    std::vector<ScenarioSummary> out;
    for (const auto &row : t.rows) {
        ScenarioSummary s;
        s.scenario_id = row[idx[0]];
        s.village_fraction = to_double(row[idx[1]]);
        s.response_rate = to_double(row[idx[2]]);
        s.xi = to_double(row[idx[3]]);
        s.method = parse_method(row[idx[4]]);
        s.n_rep = std::stoull(row[idx[5]]);
        s.n_rep_effective = std::stoull(row[idx[6]]);
        s.failure_count = std::stoull(row[idx[7]]);
        s.bias = metric_cells(row, idx[8], idx[9]);
        s.coverage = metric_cells(row, idx[10], idx[11]);
        s.equiv05 = metric_cells(row, idx[12], idx[13]);
        s.equiv075 = metric_cells(row, idx[14], idx[15]);
        s.mean_se = to_double(row[idx[16]]);
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace anchorsim::csv
