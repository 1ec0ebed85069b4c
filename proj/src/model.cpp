#include "prisample/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "prisample/error.hpp"
#include "prisample/numeric.hpp"

namespace prisample {

Features::Features(std::initializer_list<value_type> items) {
  for (const auto& [name, value] : items) set(name, value);
}

void Features::set(std::string_view name, double value) {
  if (!std::isfinite(value) || value < 0.0) {
    throw Error(ErrorCode::InvalidFeature,
                "feature '" + std::string(name) + "' must be finite and non-negative, got " +
                    format_double(value));
  }
  auto it = std::lower_bound(items_.begin(), items_.end(), name,
                             [](const value_type& item, std::string_view key) {
                               return item.first < key;
                             });
  if (it != items_.end() && it->first == name) {
    it->second = value;
  } else {
    items_.emplace(it, std::string(name), value);
  }
}

std::optional<double> Features::find(std::string_view name) const noexcept {
  for (const auto& [key, value] : items_) {
    if (key == name) return value;
  }
  return std::nullopt;
}

double Features::at(std::string_view name) const {
  if (auto v = find(name)) return *v;
  throw Error(ErrorCode::MissingFeature, "missing feature '" + std::string(name) + "'");
}

std::string_view to_string(RecordKind kind) noexcept {
  return kind == RecordKind::node ? "node" : "link";
}

Record Record::node(std::string id, double fo, double fr, double ac) {
  Record r;
  r.id = std::move(id);
  r.kind = RecordKind::node;
  r.features.set("fo", fo);
  r.features.set("fr", fr);
  r.features.set("ac", ac);
  return r;
}

std::string link_id(std::string_view u1, std::string_view u2, std::size_t occurrence) {
  std::string id;
  id.reserve(u1.size() + u2.size() + 4);
  id.append(u1).append("->").append(u2);
  if (occurrence > 1) id.append("#").append(std::to_string(occurrence));
  return id;
}

Record Record::link(std::string u1, std::string u2, double fo1, double fo2,
                    std::size_t occurrence) {
  if (fo1 <= 0.0) {
    throw Error(ErrorCode::ZeroDenominator,
                "link " + u1 + "->" + u2 + ": ffan undefined because fo1 = 0");
  }
  Record r;
  r.id = link_id(u1, u2, occurrence);
  r.kind = RecordKind::link;
  r.features.set("fo1", fo1);
  r.features.set("fo2", fo2);
  r.features.set("ffan", fo2 / fo1);
  r.ends = LinkEnds{std::move(u1), std::move(u2)};
  return r;
}

void Record::validate() const {
  if (id.empty()) throw Error(ErrorCode::InvalidArgument, "record id must not be empty");
  static constexpr std::string_view node_required[] = {"fo", "fr", "ac"};
  static constexpr std::string_view link_required[] = {"fo1", "fo2", "ffan"};
  const auto check = [&](std::span<const std::string_view> names) {
    for (auto name : names) {
      if (!features.contains(name)) {
        throw Error(ErrorCode::MissingFeature, std::string(to_string(kind)) + " record '" + id +
                                                   "' lacks feature '" + std::string(name) + "'");
      }
    }
  };
  if (kind == RecordKind::node) {
    check(node_required);
  } else {
    check(link_required);
  }
}

Population::Population(std::vector<Record> records) : records_(std::move(records)) {
  index_.reserve(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (!index_.emplace(records_[i].id, i).second) {
      throw Error(ErrorCode::DuplicateId, "duplicate id '" + records_[i].id + "'");
    }
  }
}

const Record* Population::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &records_[it->second];
}

bool is_feature_name(std::string_view name) noexcept {
  if (name.empty()) return false;
  const auto head = static_cast<unsigned char>(name.front());
  if (!std::isalpha(head) && head != '_') return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    const auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || u == '_';
  });
}

namespace {

std::string checked_name(std::string name) {
  if (!is_feature_name(name)) {
    throw Error(ErrorCode::Parse, "invalid feature name '" + name + "'");
  }
  return name;
}

}  // namespace

WeightSpec WeightSpec::feature(std::string name) {
  WeightSpec spec;
  spec.kind_ = Kind::feature;
  spec.numerator_ = checked_name(std::move(name));
  return spec;
}

WeightSpec WeightSpec::ratio(std::string numerator, std::string denominator) {
  WeightSpec spec;
  spec.kind_ = Kind::ratio;
  spec.numerator_ = checked_name(std::move(numerator));
  spec.denominator_ = checked_name(std::move(denominator));
  return spec;
}

WeightSpec WeightSpec::parse(std::string_view text) {
  if (text == "uniform" || text == "uni") return uniform();
  if (text.starts_with("feature:")) return feature(std::string(text.substr(8)));
  if (text.starts_with("ratio:")) {
    const auto body = text.substr(6);
    const auto slash = body.find('/');
    if (slash == std::string_view::npos) {
      throw Error(ErrorCode::Parse, "ratio weight needs NUM/DEN, got '" + std::string(text) + "'");
    }
    return ratio(std::string(body.substr(0, slash)), std::string(body.substr(slash + 1)));
  }
  throw Error(ErrorCode::Parse, "unknown weight spec '" + std::string(text) +
                                    "' (expected uniform, feature:NAME or ratio:NUM/DEN)");
}

std::string WeightSpec::to_string() const {
  switch (kind_) {
    case Kind::uniform: return "uniform";
    case Kind::feature: return "feature:" + numerator_;
    case Kind::ratio: return "ratio:" + numerator_ + "/" + denominator_;
  }
  return {};
}

double weight_of(const Features& features, const WeightSpec& spec) {
  switch (spec.kind()) {
    case WeightSpec::Kind::uniform:
      return 1.0;
    case WeightSpec::Kind::feature:
      return features.at(spec.numerator());
    case WeightSpec::Kind::ratio: {
      const double num = features.at(spec.numerator());
      const double den = features.at(spec.denominator());
      if (den <= 0.0) {
        throw Error(ErrorCode::ZeroDenominator,
                    "weight " + spec.to_string() + ": denominator '" + spec.denominator() + "' is 0");
      }
      return num / den;
    }
  }
  return 0.0;
}

}  // namespace prisample
