#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "prisample/model.hpp"

namespace prisample {

// Priority sampling.
//
// Each item i with weight w_i gets a draw u_i uniform on (0, 1] and the
// priority a_i = w_i / u_i. The k items of highest priority form the
// sample; the threshold z is the (k+1)-st highest priority, item i is
// included with probability min(1, w_i / z), and max(w_i, z) is an unbiased
// estimate of w_i for sampled items (0 for the rest).
//
// The master sample is the whole population sorted once by priority; every
// sample served later is a (filtered) prefix of it, so all randomness is
// spent at build time.

struct PriorityEntry {
  std::string id;
  double weight = 0.0;
  double draw = 1.0;
  double priority = 0.0;
  // Snapshot of the record's features, used by predicate playout. Empty
  // when the entry was built from bare weights.
  Features features;
};

// Builds an entry from an explicit draw. w = 0 gives priority 0 without
// dividing. Throws InvalidArgument unless u is in (0, 1] and w is finite
// and non-negative.
PriorityEntry make_priority_entry(std::string id, double weight, double draw,
                                  Features features = {});

// The draw for `id` under (seed, spec). Deterministic and independent of
// any other record; the spec text is folded into the key so different
// weightings use independent randomness.
double priority_draw(std::uint64_t seed, const WeightSpec& spec, std::string_view id) noexcept;

// Total order of the master sample: priority descending, then id ascending.
bool priority_before(const PriorityEntry& a, const PriorityEntry& b) noexcept;

std::vector<PriorityEntry> assign_priorities(std::span<const Record> records,
                                             const WeightSpec& spec, std::uint64_t seed);

class MasterSample {
 public:
  MasterSample() = default;

  std::span<const PriorityEntry> entries() const noexcept { return entries_; }
  const PriorityEntry& operator[](std::size_t i) const { return entries_[i]; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  const WeightSpec& weight_spec() const noexcept { return spec_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t population_size() const noexcept { return population_size_; }
  bool capped() const noexcept { return capped_; }
  std::optional<std::size_t> k_max() const noexcept { return k_max_; }

  // True when every population element is present, i.e. running out of
  // matches means there are no more matches anywhere.
  bool complete() const noexcept { return !capped_; }

  // FNV-1a 64 of the persisted data file, as "fnv1a64:<16 hex digits>".
  const std::string& checksum() const noexcept { return checksum_; }

  // Copy with feature snapshots taken from `population`. Throws UnknownId
  // if an entry has no record there.
  MasterSample with_features(const Population& population) const;

 private:
  friend MasterSample build_master(std::vector<PriorityEntry>, const WeightSpec&, std::uint64_t,
                                   std::optional<std::size_t>);
  friend MasterSample build_master(std::span<const Record>, const WeightSpec&, std::uint64_t,
                                   std::optional<std::size_t>);
  friend MasterSample read_master(std::istream&, std::istream&, std::string_view);

  void finalize();

  std::vector<PriorityEntry> entries_;
  WeightSpec spec_;
  std::uint64_t seed_ = 0;
  std::size_t population_size_ = 0;
  bool capped_ = false;
  std::optional<std::size_t> k_max_;
  std::string checksum_;
};

// Sorts under priority_before and truncates to the k_max largest. Throws
// DuplicateId.
MasterSample build_master(std::vector<PriorityEntry> entries, const WeightSpec& spec,
                          std::uint64_t seed, std::optional<std::size_t> k_max = std::nullopt);

// assign_priorities + build_master, materializing only the retained
// entries. Same result as the two-step path.
MasterSample build_master(std::span<const Record> records, const WeightSpec& spec,
                          std::uint64_t seed, std::optional<std::size_t> k_max = std::nullopt);

// (k+1)-st highest priority of the master, or 0 if it has at most k entries.
double threshold(const MasterSample& master, std::size_t k) noexcept;

// min(1, w / z); 1 when z = 0.
double inclusion_prob(double weight, double z) noexcept;

// max(w, z) if sampled, else 0.
double ht_weight_estimate(double weight, double z, bool sampled) noexcept;

// Persistence. The data file has header `id,weight,priority` and one row
// per entry in master order; the sidecar `<data>.meta.json` records the
// weight spec, seed, population size, cap and checksum.
std::filesystem::path master_sidecar_path(const std::filesystem::path& data);
void write_master_data(std::ostream& out, const MasterSample& master);
std::string master_metadata_json(const MasterSample& master);
void save_master(const MasterSample& master, const std::filesystem::path& data);

// Verifies ordering, entry count and checksum. Feature snapshots are not
// persisted; use with_features() to reattach them. Draws are recomputed from
// (seed, spec, id).
MasterSample read_master(std::istream& data, std::istream& metadata,
                         std::string_view source = "<master>");
MasterSample load_master(const std::filesystem::path& data);

}  // namespace prisample
