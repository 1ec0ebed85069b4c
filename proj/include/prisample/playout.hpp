#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "prisample/model.hpp"
#include "prisample/predicate.hpp"
#include "prisample/sampler.hpp"

namespace prisample {

enum class PlayoutMode { predicate_limited, cost_limited };

std::string_view to_string(PlayoutMode mode) noexcept;

struct SampleEntry {
  std::string id;
  double weight = 0.0;
  double priority = 0.0;
  Features features;

  bool operator==(const SampleEntry&) const = default;
};

// A sample served from a master. The caller owns it; extension resumes from
// `cursor`, so the engine itself keeps no session state.
struct SampleResult {
  std::vector<SampleEntry> entries;  // master (priority) order
  double threshold = 0.0;            // z; 0 means the sample is exhaustive
  PlayoutMode mode = PlayoutMode::predicate_limited;
  std::size_t k_requested = 0;
  std::size_t k_returned = 0;
  // Predicate-limited: position in the master just past the last returned
  // entry, where an extension resumes. Cost-limited: number of master
  // entries examined. Equal to the master size once exhausted.
  std::size_t cursor = 0;
  bool exhausted = false;
  Predicate predicate;
  std::string master_checksum;
  WeightSpec weight_spec;

  bool operator==(const SampleResult&) const = default;
};

// First k entries of the master matching `pred`; z is the priority of the
// (k+1)-st match.
//
// When at most k matches exist:
//  * complete master: all m matches, z = 0 (exact sample);
//  * capped master: the first m-1 matches, z = priority of the m-th. With
//    no match at all the result is empty and z is the lowest priority kept
//    in the master.
// Either way the result is marked exhausted.
//
// Throws EmptyMaster, MissingFeature, InvalidArgument (k = 0).
SampleResult sample_by_predicate(const MasterSample& master, const Predicate& pred, std::size_t k);

// Adjoins the next j matches of prev's predicate. The returned sample is
// identical to sample_by_predicate(master, prev.predicate, prev.k_requested + j).
//
// Throws MasterMismatch (different master or a cost-limited sample),
// AlreadyExhausted, InvalidArgument (j = 0).
SampleResult extend_sample(const MasterSample& master, const SampleResult& prev, std::size_t j);

// Same, but additionally requires `pred` to equal prev.predicate.
SampleResult extend_sample(const MasterSample& master, const SampleResult& prev,
                           const Predicate& pred, std::size_t j);

// Matches of `pred` among the first k master entries; z is the (k+1)-st
// priority of the whole master (0 when a complete master has at most k
// entries). On a capped master with at most k entries only the first
// size-1 are examined and z is the last priority, as for predicate playout.
SampleResult sample_cost_limited(const MasterSample& master, const Predicate& pred, std::size_t k);

// Text serialization. Round trips bit-exactly (doubles in shortest
// round-trip form).
void write_sample(std::ostream& out, const SampleResult& sample);
SampleResult read_sample(std::istream& in, std::string_view source = "<sample>");
void save_sample(const SampleResult& sample, const std::filesystem::path& path);
SampleResult load_sample(const std::filesystem::path& path);

}  // namespace prisample
