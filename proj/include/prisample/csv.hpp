#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "prisample/model.hpp"

namespace prisample {

// Node CSV: header `id,fo,fr,ac` (further numeric columns become extra
// features). Link CSV: header `u1,u2,fo1,fo2`; ffan is derived and the id
// is "u1->u2" (with "#n" suffix for the n-th repeat of a pair).
//
// The layout is detected from the header. Errors carry `source:line`.
std::vector<Record> read_records(std::istream& in, std::string_view source = "<input>");
std::vector<Record> read_records(const std::filesystem::path& path);

void write_nodes(std::ostream& out, std::span<const Record> nodes);
void write_links(std::ostream& out, std::span<const Record> links);

// Splits one CSV line on commas. No quoting: ids and numbers never contain
// commas in these formats.
std::vector<std::string_view> split_csv_line(std::string_view line);

}  // namespace prisample
