#pragma once

// Generators and brute-force oracles shared by the unit suites. Oracles here
// are deliberately naive and never call the code under test for the value
// being checked.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "prisample/error.hpp"
#include "prisample/model.hpp"
#include "prisample/predicate.hpp"
#include "prisample/sampler.hpp"

namespace testing {

using prisample::Features;
using prisample::Predicate;
using prisample::Record;

// Code of the prisample::Error thrown by f, or nullopt if none was thrown.
inline std::optional<prisample::ErrorCode> code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const prisample::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

struct Gen {
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  double unit() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }
  std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }
  bool coin(double p = 0.5) { return unit() < p; }

  // Integer-valued Pareto variate with the given minimum.
  double pareto(double alpha, double minimum) {
    return std::floor(minimum * std::pow(1.0 - unit(), -1.0 / alpha));
  }

  std::mt19937_64 rng;
};

inline const std::vector<std::string>& node_features() {
  static const std::vector<std::string> names{"fo", "fr", "ac"};
  return names;
}

// Nodes with small integer features so that ties and equal priorities
// actually occur.
inline std::vector<Record> small_nodes(Gen& g, std::size_t n, double max_value = 20.0) {
  std::vector<Record> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = [&] { return std::floor(g.unit() * (max_value + 1.0)); };
    const double fo = v();
    const double fr = v();
    const double ac = v();
    out.push_back(Record::node("r" + std::to_string(i), fo, fr, ac));
  }
  return out;
}

inline std::vector<Record> pareto_nodes(Gen& g, std::size_t n) {
  std::vector<Record> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double fo = g.pareto(1.2, 1.0);
    const double fr = g.pareto(1.2, 1.0);
    const double ac = g.pareto(1.5, 1.0);
    out.push_back(Record::node("p" + std::to_string(i), fo, fr, ac));
  }
  return out;
}

// Random predicate tree over node features with thresholds in [0, 20].
inline Predicate random_predicate(Gen& g, int depth) {
  using prisample::Comparator;
  if (depth == 0 || g.coin(0.3)) {
    if (g.coin(0.05)) return g.coin() ? Predicate::always() : Predicate::never();
    static const Comparator cmps[] = {Comparator::less, Comparator::less_equal, Comparator::equal,
                                      Comparator::greater_equal, Comparator::greater};
    const auto& names = node_features();
    return Predicate::compare(names[g.below(names.size())], cmps[g.below(5)],
                              std::floor(g.unit() * 21.0));
  }
  switch (g.below(3)) {
    case 0:
      return random_predicate(g, depth - 1) && random_predicate(g, depth - 1);
    case 1:
      return random_predicate(g, depth - 1) || random_predicate(g, depth - 1);
    default:
      return !random_predicate(g, depth - 1);
  }
}

// Positions in the master whose features satisfy `pred`.
inline std::vector<std::size_t> match_positions(const prisample::MasterSample& master,
                                                const Predicate& pred) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < master.size(); ++i) {
    if (pred.evaluate(master[i].features)) out.push_back(i);
  }
  return out;
}

// The three-item example used throughout: weights (4, 2, 1) with draws
// (0.5, 0.4, 0.25), so priorities (8, 5, 4). Feature `x` equals the weight.
inline prisample::MasterSample fixed_master(std::optional<std::size_t> k_max = std::nullopt) {
  using prisample::make_priority_entry;
  std::vector<prisample::PriorityEntry> entries{
      make_priority_entry("c", 1.0, 0.25, Features{{"x", 1.0}}),
      make_priority_entry("a", 4.0, 0.5, Features{{"x", 4.0}}),
      make_priority_entry("b", 2.0, 0.4, Features{{"x", 2.0}}),
  };
  return prisample::build_master(std::move(entries), prisample::WeightSpec::feature("x"), 1, k_max);
}

}  // namespace testing
