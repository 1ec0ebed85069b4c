#include "prisample/playout.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <set>

#include "prisample/csv.hpp"
#include "prisample/error.hpp"
#include "prisample/numeric.hpp"

namespace prisample {

std::string_view to_string(PlayoutMode mode) noexcept {
  return mode == PlayoutMode::predicate_limited ? "predicate_limited" : "cost_limited";
}

namespace {

SampleEntry snapshot(const PriorityEntry& e) {
  return SampleEntry{e.id, e.weight, e.priority, e.features};
}

SampleResult blank(const MasterSample& master, const Predicate& pred, PlayoutMode mode,
                   std::size_t k) {
  if (master.empty()) throw Error(ErrorCode::EmptyMaster, "master sample has no entries");
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "sample size must be at least 1");
  SampleResult r;
  r.mode = mode;
  r.k_requested = k;
  r.predicate = pred;
  r.master_checksum = master.checksum();
  r.weight_spec = master.weight_spec();
  return r;
}

// Collects matches from `start` on until `result.entries` holds k_requested
// of them and one more match (the threshold item) has been seen.
void scan_matches(const MasterSample& master, std::size_t start, SampleResult& result) {
  const auto target = result.k_requested;
  std::optional<std::size_t> last_taken;
  for (std::size_t i = start; i < master.size(); ++i) {
    const auto& e = master[i];
    if (!result.predicate.evaluate(e.features)) continue;
    if (result.entries.size() == target) {
      result.threshold = e.priority;
      result.cursor = last_taken ? *last_taken + 1 : start;
      result.exhausted = false;
      result.k_returned = result.entries.size();
      return;
    }
    result.entries.push_back(snapshot(e));
    last_taken = i;
  }

  result.exhausted = true;
  result.cursor = master.size();
  if (master.complete()) {
    result.threshold = 0.0;
  } else if (!result.entries.empty()) {
    // Only m <= k matches are visible in a capped master: keep m-1 and let
    // the m-th define the threshold.
    result.threshold = result.entries.back().priority;
    result.entries.pop_back();
  } else {
    result.threshold = master[master.size() - 1].priority;
  }
  result.k_returned = result.entries.size();
}

}  // namespace

SampleResult sample_by_predicate(const MasterSample& master, const Predicate& pred, std::size_t k) {
  auto result = blank(master, pred, PlayoutMode::predicate_limited, k);
  scan_matches(master, 0, result);
  return result;
}

SampleResult extend_sample(const MasterSample& master, const SampleResult& prev, std::size_t j) {
  if (prev.master_checksum != master.checksum()) {
    throw Error(ErrorCode::MasterMismatch, "sample was drawn from master " + prev.master_checksum +
                                               ", not " + master.checksum());
  }
  if (prev.mode != PlayoutMode::predicate_limited) {
    throw Error(ErrorCode::MasterMismatch, "only predicate-limited samples can be extended");
  }
  if (prev.exhausted) {
    throw Error(ErrorCode::AlreadyExhausted, "no further matches of '" + prev.predicate.to_string() +
                                                 "' remain in the master");
  }
  if (prev.cursor > master.size() || prev.k_returned != prev.entries.size()) {
    throw Error(ErrorCode::MasterMismatch, "sample cursor is inconsistent with the master");
  }
  auto result = blank(master, prev.predicate, PlayoutMode::predicate_limited, prev.k_requested + j);
  if (j == 0) throw Error(ErrorCode::InvalidArgument, "extension size must be at least 1");
  result.entries = prev.entries;
  scan_matches(master, prev.cursor, result);
  return result;
}

SampleResult extend_sample(const MasterSample& master, const SampleResult& prev,
                           const Predicate& pred, std::size_t j) {
  if (!(pred == prev.predicate)) {
    throw Error(ErrorCode::MasterMismatch, "extension predicate '" + pred.to_string() +
                                               "' differs from the sample's '" +
                                               prev.predicate.to_string() + "'");
  }
  return extend_sample(master, prev, j);
}

SampleResult sample_cost_limited(const MasterSample& master, const Predicate& pred, std::size_t k) {
  auto result = blank(master, pred, PlayoutMode::cost_limited, k);
  const auto n = master.size();
  std::size_t examined;
  if (k < n) {
    examined = k;
    result.threshold = master[k].priority;
    result.exhausted = false;
  } else if (master.complete()) {
    examined = n;
    result.threshold = 0.0;
    result.exhausted = true;
  } else {
    examined = n - 1;
    result.threshold = master[n - 1].priority;
    result.exhausted = true;
  }
  for (std::size_t i = 0; i < examined; ++i) {
    if (pred.evaluate(master[i].features)) result.entries.push_back(snapshot(master[i]));
  }
  result.cursor = result.exhausted ? n : examined;
  result.k_returned = result.entries.size();
  return result;
}

// --- serialization ---------------------------------------------------------

namespace {

constexpr std::string_view kSampleMagic = "# prisample sample v1";

}  // namespace

void write_sample(std::ostream& out, const SampleResult& s) {
  std::set<std::string> names;
  for (const auto& e : s.entries) {
    for (const auto& [name, value] : e.features) names.insert(name);
  }
  out << kSampleMagic << '\n';
  out << "master_checksum=" << s.master_checksum << '\n';
  out << "weight=" << s.weight_spec.to_string() << '\n';
  out << "predicate=" << s.predicate.to_string() << '\n';
  out << "mode=" << to_string(s.mode) << '\n';
  out << "k_requested=" << s.k_requested << '\n';
  out << "k_returned=" << s.k_returned << '\n';
  out << "threshold=" << format_double(s.threshold) << '\n';
  out << "cursor=" << s.cursor << '\n';
  out << "exhausted=" << (s.exhausted ? "true" : "false") << '\n';
  out << "columns=id,weight,priority";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (const auto& e : s.entries) {
    out << e.id << ',' << format_double(e.weight) << ',' << format_double(e.priority);
    for (const auto& n : names) {
      out << ',';
      if (auto v = e.features.find(n)) out << format_double(*v);
    }
    out << '\n';
  }
}

SampleResult read_sample(std::istream& in, std::string_view source) {
  std::size_t line_no = 0;
  const auto fail = [&](const std::string& what) -> Error {
    return Error(ErrorCode::Parse, std::string(source) + ":" + std::to_string(line_no) + ": " + what);
  };
  std::string line;
  const auto next_line = [&]() {
    if (!std::getline(in, line)) throw fail("unexpected end of input");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
  };
  const auto field = [&](std::string_view key) -> std::string {
    next_line();
    if (!line.starts_with(key) || line.size() <= key.size() || line[key.size()] != '=') {
      throw fail("expected '" + std::string(key) + "='");
    }
    return line.substr(key.size() + 1);
  };
  const auto count = [&](std::string_view key) {
    const auto v = parse_uint(field(key));
    if (!v) throw fail("'" + std::string(key) + "' must be a non-negative integer");
    return static_cast<std::size_t>(*v);
  };

  next_line();
  if (line != kSampleMagic) throw fail("not a sample file");

  SampleResult s;
  s.master_checksum = field("master_checksum");
  s.weight_spec = WeightSpec::parse(field("weight"));
  s.predicate = Predicate::parse(field("predicate"));
  const auto mode = field("mode");
  if (mode == "predicate_limited") {
    s.mode = PlayoutMode::predicate_limited;
  } else if (mode == "cost_limited") {
    s.mode = PlayoutMode::cost_limited;
  } else {
    throw fail("unknown mode '" + mode + "'");
  }
  s.k_requested = count("k_requested");
  s.k_returned = count("k_returned");
  const auto z = parse_double(field("threshold"));
  if (!z || !std::isfinite(*z) || *z < 0.0) throw fail("invalid threshold");
  s.threshold = *z;
  s.cursor = count("cursor");
  const auto exhausted = field("exhausted");
  if (exhausted != "true" && exhausted != "false") throw fail("exhausted must be true or false");
  s.exhausted = exhausted == "true";

  const auto columns_text = field("columns");
  const auto columns = split_csv_line(columns_text);
  if (columns.size() < 3 || columns[0] != "id" || columns[1] != "weight" ||
      columns[2] != "priority") {
    throw fail("columns must start with id,weight,priority");
  }
  for (std::size_t c = 3; c < columns.size(); ++c) {
    if (!is_feature_name(columns[c])) throw fail("invalid feature column");
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != columns.size()) throw fail("wrong number of fields");
    SampleEntry e;
    e.id = std::string(cells[0]);
    const auto w = parse_double(cells[1]);
    const auto p = parse_double(cells[2]);
    if (e.id.empty() || !w || !p) throw fail("invalid entry");
    e.weight = *w;
    e.priority = *p;
    for (std::size_t c = 3; c < columns.size(); ++c) {
      if (cells[c].empty()) continue;
      const auto v = parse_double(cells[c]);
      if (!v) throw fail("invalid feature value");
      e.features.set(columns[c], *v);
    }
    s.entries.push_back(std::move(e));
  }
  if (s.entries.size() != s.k_returned) throw fail("k_returned does not match the entry rows");
  return s;
}

void save_sample(const SampleResult& sample, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  write_sample(out, sample);
  if (!out) throw Error(ErrorCode::Io, "write to '" + path.string() + "' failed");
}

SampleResult load_sample(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for reading");
  return read_sample(in, path.string());
}

}  // namespace prisample
