#include "prisample/csv.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "prisample/error.hpp"
#include "prisample/numeric.hpp"

namespace prisample {

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

namespace {

enum class Layout { nodes, links };

[[noreturn]] void fail(ErrorCode code, std::string_view source, std::size_t line,
                       const std::string& what) {
  throw Error(code, std::string(source) + ":" + std::to_string(line) + ": " + what);
}

double numeric_field(std::string_view text, std::string_view column, std::string_view source,
                     std::size_t line) {
  const auto v = parse_double(text);
  if (!v) {
    fail(ErrorCode::Parse, source, line,
         "column '" + std::string(column) + "': not a number: '" + std::string(text) + "'");
  }
  if (!std::isfinite(*v) || *v < 0.0) {
    fail(ErrorCode::InvalidFeature, source, line,
         "column '" + std::string(column) + "' must be finite and non-negative");
  }
  return *v;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

std::vector<Record> read_records(std::istream& in, std::string_view source) {
  std::string header_line;
  if (!std::getline(in, header_line)) {
    throw Error(ErrorCode::Parse, std::string(source) + ": empty input, expected a CSV header");
  }
  strip_cr(header_line);
  const auto header = split_csv_line(header_line);
  std::vector<std::string> columns(header.begin(), header.end());

  Layout layout;
  if (columns.size() >= 4 && columns[0] == "id" && columns[1] == "fo" && columns[2] == "fr" &&
      columns[3] == "ac") {
    layout = Layout::nodes;
    for (std::size_t c = 4; c < columns.size(); ++c) {
      if (!is_feature_name(columns[c])) {
        fail(ErrorCode::Parse, source, 1, "invalid feature column '" + columns[c] + "'");
      }
    }
  } else if (columns.size() == 4 && columns[0] == "u1" && columns[1] == "u2" &&
             columns[2] == "fo1" && columns[3] == "fo2") {
    layout = Layout::links;
  } else {
    fail(ErrorCode::Parse, source, 1,
         "unrecognized header '" + header_line + "' (expected id,fo,fr,ac or u1,u2,fo1,fo2)");
  }

  std::vector<Record> records;
  std::map<std::string, std::size_t, std::less<>> seen;
  std::map<std::pair<std::string, std::string>, std::size_t> pair_count;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != columns.size()) {
      fail(ErrorCode::Parse, source, line_no,
           "expected " + std::to_string(columns.size()) + " fields, got " +
               std::to_string(fields.size()));
    }
    Record record;
    if (layout == Layout::nodes) {
      if (fields[0].empty()) fail(ErrorCode::Parse, source, line_no, "empty id");
      record.id = std::string(fields[0]);
      record.kind = RecordKind::node;
      for (std::size_t c = 1; c < columns.size(); ++c) {
        record.features.set(columns[c], numeric_field(fields[c], columns[c], source, line_no));
      }
    } else {
      std::string u1(fields[0]);
      std::string u2(fields[1]);
      if (u1.empty() || u2.empty()) fail(ErrorCode::Parse, source, line_no, "empty endpoint id");
      const double fo1 = numeric_field(fields[2], "fo1", source, line_no);
      const double fo2 = numeric_field(fields[3], "fo2", source, line_no);
      if (fo1 <= 0.0) {
        fail(ErrorCode::ZeroDenominator, source, line_no, "fo1 = 0 leaves ffan undefined");
      }
      const auto occurrence = ++pair_count[{u1, u2}];
      record = Record::link(std::move(u1), std::move(u2), fo1, fo2, occurrence);
    }
    if (auto [it, inserted] = seen.emplace(record.id, line_no); !inserted) {
      fail(ErrorCode::DuplicateId, source, line_no,
           "duplicate id '" + record.id + "' (first seen on line " + std::to_string(it->second) +
               ")");
    }
    records.push_back(std::move(record));
  }
  return records;
}

std::vector<Record> read_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for reading");
  return read_records(in, path.string());
}

void write_nodes(std::ostream& out, std::span<const Record> nodes) {
  out << "id,fo,fr,ac\n";
  for (const auto& r : nodes) {
    out << r.id << ',' << format_double(r.features.at("fo")) << ','
        << format_double(r.features.at("fr")) << ',' << format_double(r.features.at("ac"))
        << '\n';
  }
}

void write_links(std::ostream& out, std::span<const Record> links) {
  out << "u1,u2,fo1,fo2\n";
  for (const auto& r : links) {
    if (!r.ends) {
      throw Error(ErrorCode::InvalidArgument, "record '" + r.id + "' is not a link");
    }
    out << r.ends->from << ',' << r.ends->to << ',' << format_double(r.features.at("fo1")) << ','
        << format_double(r.features.at("fo2")) << '\n';
  }
}

}  // namespace prisample
