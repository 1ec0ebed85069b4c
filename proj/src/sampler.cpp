#include "prisample/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "prisample/csv.hpp"
#include "prisample/error.hpp"
#include "prisample/hash.hpp"
#include "prisample/numeric.hpp"

namespace prisample {

namespace {

constexpr std::string_view kMasterHeader = "id,weight,priority";
constexpr std::string_view kMasterFormat = "prisample-master/1";

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf, 16);
}

std::string checksum_text(std::uint64_t h) { return "fnv1a64:" + hex64(h); }

void append_row(std::string& line, const PriorityEntry& e) {
  line.clear();
  line.append(e.id).append(",").append(format_double(e.weight)).append(",");
  line.append(format_double(e.priority));
}

void check_unique_ids(std::span<const std::string_view> ids) {
  std::unordered_set<std::string_view> seen;
  seen.reserve(ids.size());
  for (auto id : ids) {
    if (!seen.insert(id).second) {
      throw Error(ErrorCode::DuplicateId, "duplicate id '" + std::string(id) + "'");
    }
  }
}

double priority_of(double weight, double draw) noexcept {
  return weight == 0.0 ? 0.0 : weight / draw;
}

}  // namespace

PriorityEntry make_priority_entry(std::string id, double weight, double draw, Features features) {
  if (!(draw > 0.0 && draw <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument,
                "draw for '" + id + "' must lie in (0, 1], got " + format_double(draw));
  }
  if (!std::isfinite(weight) || weight < 0.0) {
    throw Error(ErrorCode::InvalidArgument,
                "weight for '" + id + "' must be finite and non-negative");
  }
  PriorityEntry e;
  e.id = std::move(id);
  e.weight = weight;
  e.draw = draw;
  e.priority = priority_of(weight, draw);
  e.features = std::move(features);
  return e;
}

double priority_draw(std::uint64_t seed, const WeightSpec& spec, std::string_view id) noexcept {
  const auto key = hash_combine(hash_combine(mix64(seed), fnv1a64(spec.to_string())), fnv1a64(id));
  return unit_open_closed(key);
}

bool priority_before(const PriorityEntry& a, const PriorityEntry& b) noexcept {
  if (a.priority != b.priority) return a.priority > b.priority;
  return a.id < b.id;
}

std::vector<PriorityEntry> assign_priorities(std::span<const Record> records,
                                             const WeightSpec& spec, std::uint64_t seed) {
  const auto spec_key = hash_combine(mix64(seed), fnv1a64(spec.to_string()));
  std::vector<PriorityEntry> entries;
  entries.reserve(records.size());
  for (const auto& r : records) {
    const double w = weight_of(r.features, spec);
    const double u = unit_open_closed(hash_combine(spec_key, fnv1a64(r.id)));
    entries.push_back(make_priority_entry(r.id, w, u, r.features));
  }
  return entries;
}

void MasterSample::finalize() {
  std::uint64_t h = fnv1a64(kMasterHeader);
  h = fnv1a64("\n", h);
  std::string line;
  for (const auto& e : entries_) {
    append_row(line, e);
    h = fnv1a64(line, h);
    h = fnv1a64("\n", h);
  }
  checksum_ = checksum_text(h);
}

MasterSample MasterSample::with_features(const Population& population) const {
  MasterSample copy = *this;
  for (auto& e : copy.entries_) {
    const Record* r = population.find(e.id);
    if (r == nullptr) {
      throw Error(ErrorCode::UnknownId, "master entry '" + e.id + "' has no record in the population");
    }
    e.features = r->features;
  }
  return copy;
}

namespace {

template <typename Less, typename T>
void select_top(std::vector<T>& items, std::optional<std::size_t> k_max, Less less) {
  if (k_max && *k_max < items.size()) {
    const auto mid = items.begin() + static_cast<std::ptrdiff_t>(*k_max);
    std::nth_element(items.begin(), mid, items.end(), less);
    items.erase(mid, items.end());
  }
  std::sort(items.begin(), items.end(), less);
}

}  // namespace

MasterSample build_master(std::vector<PriorityEntry> entries, const WeightSpec& spec,
                          std::uint64_t seed, std::optional<std::size_t> k_max) {
  {
    std::vector<std::string_view> ids;
    ids.reserve(entries.size());
    for (const auto& e : entries) ids.push_back(e.id);
    check_unique_ids(ids);
  }
  MasterSample m;
  m.population_size_ = entries.size();
  m.capped_ = k_max.has_value() && *k_max < entries.size();
  m.k_max_ = k_max;
  m.spec_ = spec;
  m.seed_ = seed;
  select_top(entries, k_max, priority_before);
  m.entries_ = std::move(entries);
  m.finalize();
  return m;
}

MasterSample build_master(std::span<const Record> records, const WeightSpec& spec,
                          std::uint64_t seed, std::optional<std::size_t> k_max) {
  struct Slim {
    double priority;
    double weight;
    double draw;
    std::size_t index;
  };
  {
    std::vector<std::string_view> ids;
    ids.reserve(records.size());
    for (const auto& r : records) ids.push_back(r.id);
    check_unique_ids(ids);
  }
  const auto spec_key = hash_combine(mix64(seed), fnv1a64(spec.to_string()));
  std::vector<Slim> slim;
  slim.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const double w = weight_of(records[i].features, spec);
    const double u = unit_open_closed(hash_combine(spec_key, fnv1a64(records[i].id)));
    slim.push_back({priority_of(w, u), w, u, i});
  }
  select_top(slim, k_max, [&](const Slim& a, const Slim& b) {
    if (a.priority != b.priority) return a.priority > b.priority;
    return records[a.index].id < records[b.index].id;
  });

  std::vector<PriorityEntry> entries;
  entries.reserve(slim.size());
  for (const auto& s : slim) {
    const auto& r = records[s.index];
    entries.push_back(PriorityEntry{r.id, s.weight, s.draw, s.priority, r.features});
  }
  MasterSample m;
  m.population_size_ = records.size();
  m.capped_ = k_max.has_value() && *k_max < records.size();
  m.k_max_ = k_max;
  m.spec_ = spec;
  m.seed_ = seed;
  m.entries_ = std::move(entries);
  m.finalize();
  return m;
}

double threshold(const MasterSample& master, std::size_t k) noexcept {
  return k < master.size() ? master[k].priority : 0.0;
}

double inclusion_prob(double weight, double z) noexcept {
  if (z == 0.0) return 1.0;
  return std::min(1.0, weight / z);
}

double ht_weight_estimate(double weight, double z, bool sampled) noexcept {
  return sampled ? std::max(weight, z) : 0.0;
}

std::filesystem::path master_sidecar_path(const std::filesystem::path& data) {
  auto p = data;
  p += ".meta.json";
  return p;
}

void write_master_data(std::ostream& out, const MasterSample& master) {
  out << kMasterHeader << '\n';
  std::string line;
  for (const auto& e : master.entries()) {
    append_row(line, e);
    out << line << '\n';
  }
}

std::string master_metadata_json(const MasterSample& master) {
  nlohmann::ordered_json j;
  j["format"] = kMasterFormat;
  j["weight"] = master.weight_spec().to_string();
  j["seed"] = master.seed();
  j["population_size"] = master.population_size();
  j["entries"] = master.size();
  j["capped"] = master.capped();
  if (master.k_max()) {
    j["k_max"] = *master.k_max();
  } else {
    j["k_max"] = nullptr;
  }
  j["checksum"] = master.checksum();
  return j.dump(2) + "\n";
}

void save_master(const MasterSample& master, const std::filesystem::path& data) {
  {
    std::ofstream out(data, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot open '" + data.string() + "' for writing");
    write_master_data(out, master);
    if (!out) throw Error(ErrorCode::Io, "write to '" + data.string() + "' failed");
  }
  const auto meta_path = master_sidecar_path(data);
  std::ofstream meta(meta_path, std::ios::binary);
  if (!meta) throw Error(ErrorCode::Io, "cannot open '" + meta_path.string() + "' for writing");
  meta << master_metadata_json(master);
  if (!meta) throw Error(ErrorCode::Io, "write to '" + meta_path.string() + "' failed");
}

MasterSample read_master(std::istream& data, std::istream& metadata, std::string_view source) {
  const auto bad = [&](const std::string& what) -> Error {
    return Error(ErrorCode::MalformedMaster, std::string(source) + ": " + what);
  };

  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(metadata);
  } catch (const nlohmann::json::exception& e) {
    throw bad(std::string("metadata is not valid JSON: ") + e.what());
  }

  MasterSample m;
  std::string expected_checksum;
  std::size_t expected_entries = 0;
  try {
    if (meta.at("format").get<std::string>() != kMasterFormat) {
      throw bad("unsupported format '" + meta.at("format").get<std::string>() + "'");
    }
    m.spec_ = WeightSpec::parse(meta.at("weight").get<std::string>());
    m.seed_ = meta.at("seed").get<std::uint64_t>();
    m.population_size_ = meta.at("population_size").get<std::size_t>();
    m.capped_ = meta.at("capped").get<bool>();
    if (!meta.at("k_max").is_null()) m.k_max_ = meta.at("k_max").get<std::size_t>();
    expected_entries = meta.at("entries").get<std::size_t>();
    expected_checksum = meta.at("checksum").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw bad(std::string("metadata field error: ") + e.what());
  }

  std::string line;
  if (!std::getline(data, line)) throw bad("missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kMasterHeader) throw bad("expected header '" + std::string(kMasterHeader) + "'");

  std::uint64_t h = fnv1a64(line);
  h = fnv1a64("\n", h);
  std::size_t line_no = 1;
  while (std::getline(data, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    h = fnv1a64(line, h);
    h = fnv1a64("\n", h);
    const auto fields = split_csv_line(line);
    const auto where = "line " + std::to_string(line_no) + ": ";
    if (fields.size() != 3) throw bad(where + "expected 3 fields");
    const auto weight = parse_double(fields[1]);
    const auto priority = parse_double(fields[2]);
    if (fields[0].empty() || !weight || !priority || *weight < 0.0 || *priority < *weight ||
        !std::isfinite(*priority)) {
      throw bad(where + "invalid entry");
    }
    PriorityEntry e;
    e.id = std::string(fields[0]);
    e.weight = *weight;
    e.priority = *priority;
    e.draw = priority_draw(m.seed_, m.spec_, e.id);
    if (!m.entries_.empty() && !priority_before(m.entries_.back(), e)) {
      throw bad(where + "entries are not in strict priority order");
    }
    m.entries_.push_back(std::move(e));
  }

  {
    std::vector<std::string_view> ids;
    ids.reserve(m.entries_.size());
    for (const auto& e : m.entries_) ids.push_back(e.id);
    check_unique_ids(ids);
  }
  if (m.entries_.size() != expected_entries) {
    throw bad("metadata says " + std::to_string(expected_entries) + " entries, data has " +
              std::to_string(m.entries_.size()));
  }
  if (m.entries_.size() > m.population_size_ ||
      m.capped_ != (m.entries_.size() < m.population_size_)) {
    throw bad("entry count inconsistent with population_size/capped");
  }
  if (checksum_text(h) != expected_checksum) {
    throw Error(ErrorCode::ChecksumMismatch, std::string(source) + ": checksum " + checksum_text(h) +
                                                 " does not match metadata " + expected_checksum);
  }
  m.checksum_ = expected_checksum;
  return m;
}

MasterSample load_master(const std::filesystem::path& data) {
  std::ifstream in(data, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + data.string() + "' for reading");
  const auto meta_path = master_sidecar_path(data);
  std::ifstream meta(meta_path, std::ios::binary);
  if (!meta) throw Error(ErrorCode::Io, "cannot open '" + meta_path.string() + "' for reading");
  return read_master(in, meta, data.string());
}

}  // namespace prisample
