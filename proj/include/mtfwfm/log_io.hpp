#pragma once

#include "mtfwfm/pipeline.hpp"

#include <string>
#include <vector>

namespace mtfwfm {

// Log readers and writers. Format is picked from the filename: ".csv" (also
// ".csv.gz") selects the CSV form, everything else is newline-delimited
// JSON; a trailing ".gz" adds gzip compression either way.
//
// NDJSON keys: impressions {ts, user_id, line_id, fields{...}},
// conversions {ts, user_id, line_id, conv_type}, lines {line_id, conv_type}.
// CSV columns: impressions "ts,user_id,line_id,<field>,<field>,..." with the
// field names in the header; conversions "ts,user_id,line_id,conv_type";
// lines "line_id,conv_type". Cells containing commas or quotes are quoted.

std::vector<ImpressionRecord> read_impressions(const std::string& path);
std::vector<ConversionRecord> read_conversions(const std::string& path);
std::vector<LineRecord> read_lines_file(const std::string& path);

void write_impressions(std::span<const ImpressionRecord> records, const std::string& path);
void write_conversions(std::span<const ConversionRecord> records, const std::string& path);
void write_lines_file(std::span<const LineRecord> records, const std::string& path);

} // namespace mtfwfm
