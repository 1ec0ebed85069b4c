#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace prisample {

// Named non-negative features of one record. Kept as a small sorted vector;
// records carry three or four features, so lookups are a short scan.
class Features {
 public:
  using value_type = std::pair<std::string, double>;

  Features() = default;
  Features(std::initializer_list<value_type> items);

  // Inserts or overwrites. Rejects negative and non-finite values.
  void set(std::string_view name, double value);

  std::optional<double> find(std::string_view name) const noexcept;
  bool contains(std::string_view name) const noexcept { return find(name).has_value(); }

  // Throws Error{MissingFeature}.
  double at(std::string_view name) const;

  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }
  auto begin() const noexcept { return items_.begin(); }
  auto end() const noexcept { return items_.end(); }

  bool operator==(const Features&) const = default;

 private:
  std::vector<value_type> items_;
};

enum class RecordKind { node, link };

std::string_view to_string(RecordKind kind) noexcept;

struct LinkEnds {
  std::string from;
  std::string to;

  bool operator==(const LinkEnds&) const = default;
};

// One population element. Links remember their endpoint ids so they can be
// written back out in the link CSV layout.
struct Record {
  std::string id;
  RecordKind kind = RecordKind::node;
  Features features;
  std::optional<LinkEnds> ends;

  static Record node(std::string id, double fo, double fr, double ac);

  // Link u1 -> u2 (u2 follows u1) with derived ffan = fo2 / fo1. Repeated
  // pairs are distinguished by `occurrence`: the first is "u1->u2", later
  // ones "u1->u2#2", "u1->u2#3", ...
  static Record link(std::string u1, std::string u2, double fo1, double fo2,
                     std::size_t occurrence = 1);

  // Throws InvalidFeature / MissingFeature when the kind's required
  // features are absent.
  void validate() const;

  bool operator==(const Record&) const = default;
};

std::string link_id(std::string_view u1, std::string_view u2, std::size_t occurrence);

// Records indexed by id. Construction rejects duplicate ids.
class Population {
 public:
  Population() = default;
  explicit Population(std::vector<Record> records);

  std::span<const Record> records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  const Record* find(std::string_view id) const;

 private:
  std::vector<Record> records_;
  std::unordered_map<std::string, std::size_t> index_;
};

class WeightSpec {
 public:
  enum class Kind { uniform, feature, ratio };

  static WeightSpec uniform() { return WeightSpec{}; }
  static WeightSpec feature(std::string name);
  static WeightSpec ratio(std::string numerator, std::string denominator);

  // Accepts "uniform", "feature:NAME", "ratio:NUM/DEN".
  static WeightSpec parse(std::string_view text);

  Kind kind() const noexcept { return kind_; }
  const std::string& numerator() const noexcept { return numerator_; }
  const std::string& denominator() const noexcept { return denominator_; }

  // Canonical text form; parse(to_string()) == *this.
  std::string to_string() const;

  bool operator==(const WeightSpec&) const = default;

 private:
  Kind kind_ = Kind::uniform;
  std::string numerator_;
  std::string denominator_;
};

double weight_of(const Features& features, const WeightSpec& spec);
inline double weight_of(const Record& record, const WeightSpec& spec) {
  return weight_of(record.features, spec);
}

bool is_feature_name(std::string_view name) noexcept;

}  // namespace prisample
