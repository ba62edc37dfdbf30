#pragma once

#include "anchorsim/metrics.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace anchorsim {

/// Markdown tables, one block per xi, rows ordered fraction (desc), response
/// rate (desc), Calibrated above Logistic Regression.
std::string render_tables(const std::vector<ScenarioSummary> &summaries);

/// Summaries sorted into table order.
std::vector<ScenarioSummary> table_order(std::vector<ScenarioSummary> summaries);

/// Long-format plot data. Columns:
///   bias:     xi,fraction,response_rate,method,bias,bias_mcse,bias_lo,bias_hi
///   coverage: xi,fraction,response_rate,method,coverage,coverage_mcse
void write_bias_long(std::ostream &out, const std::vector<ScenarioSummary> &summaries);
void write_coverage_long(std::ostream &out, const std::vector<ScenarioSummary> &summaries);

/// Replicate 95% intervals sorted thinnest first. Columns:
///   rank,rep,p_true,p_hat,ci95_lo,ci95_hi,width,covered
void write_zipper(std::ostream &out, std::vector<ReplicateRecord> records);

/// 90% intervals centred on the truth, sorted by signed bias. Columns:
///   rank,rep,bias,lo,hi,within05,within075
void write_tost(std::ostream &out, std::vector<ReplicateRecord> records);

struct ReportFiles {
    std::filesystem::path tables;
    std::filesystem::path bias;
    std::filesystem::path coverage;
    std::vector<std::filesystem::path> zipper;
    std::vector<std::filesystem::path> tost;
};

/// Reads <results>/summary.csv (required) and <results>/replicates.csv
/// (optional; zipper and TOST files need it) and writes everything under `out_dir`.
ReportFiles write_report(const std::filesystem::path &results_dir, const std::filesystem::path &out_dir);

} // namespace anchorsim
