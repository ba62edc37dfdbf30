#pragma once

#include "anchorsim/metrics.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace anchorsim::csv {

/// Quotes a field when it contains a comma, quote or newline.
std::string escape(std::string_view field);
/// Splits one line, honouring double-quoted fields.
std::vector<std::string> split_line(std::string_view line);

/// Header row and string cells of a whole file.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(std::string_view name) const; ///< throws when missing
};

Table read_table(const std::filesystem::path &path);
Table read_table(std::istream &in);

/// Shortest representation that round-trips exactly.
std::string number(double x);

extern const std::vector<std::string> kReplicateColumns;
extern const std::vector<std::string> kSummaryColumns;

void write_replicate_header(std::ostream &out);
void write_replicate_row(std::ostream &out, const ReplicateRecord &r);
std::vector<ReplicateRecord> read_replicates(const std::filesystem::path &path);
std::vector<ReplicateRecord> parse_replicates(const Table &table);

void write_summary(std::ostream &out, const std::vector<ScenarioSummary> &summaries);
std::vector<ScenarioSummary> read_summary(const std::filesystem::path &path);

} // namespace anchorsim::csv
