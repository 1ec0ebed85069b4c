#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "prisample/model.hpp"

namespace prisample {

enum class Comparator { less, less_equal, equal, greater_equal, greater };

std::string_view to_string(Comparator cmp) noexcept;

// Boolean expression over numeric feature comparisons. Immutable; copies
// share the expression tree.
//
// Text syntax:   fo>=100 && ac>8 || !(fr<5)
// Precedence:    ! binds tighter than &&, which binds tighter than ||.
// Literals:      true, false. Comparators: < <= = == >= >.
class Predicate {
 public:
  // Default-constructed predicate is `true`.
  Predicate();

  static Predicate always();
  static Predicate never();
  static Predicate compare(std::string feature, Comparator cmp, double constant);

  // Throws Error{Parse} with the offending column.
  static Predicate parse(std::string_view text);

  friend Predicate operator&&(const Predicate& lhs, const Predicate& rhs);
  friend Predicate operator||(const Predicate& lhs, const Predicate& rhs);
  friend Predicate operator!(const Predicate& p);

  // Every referenced feature must be present: a missing feature throws
  // Error{MissingFeature} even when the other operand of && / || would have
  // decided the result.
  bool evaluate(const Features& features) const;
  bool operator()(const Features& features) const { return evaluate(features); }

  bool is_always_true() const noexcept;

  // Canonical text; parse(to_string()) reproduces the same tree.
  std::string to_string() const;

  bool operator==(const Predicate& other) const { return to_string() == other.to_string(); }

  struct Node;

 private:
  explicit Predicate(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

  std::shared_ptr<const Node> root_;
};

}  // namespace prisample
