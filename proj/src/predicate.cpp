#include "prisample/predicate.hpp"

#include <cctype>

#include "prisample/error.hpp"
#include "prisample/numeric.hpp"

namespace prisample {

struct Predicate::Node {
  enum class Kind { constant, atom, negation, conjunction, disjunction };

  Kind kind = Kind::constant;
  bool value = true;
  std::string feature;
  Comparator cmp = Comparator::equal;
  double constant = 0.0;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

namespace {

using Node = Predicate::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make_constant(bool value) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::constant;
  n->value = value;
  return n;
}

NodePtr make_binary(Node::Kind kind, NodePtr lhs, NodePtr rhs) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

bool compare(double x, Comparator cmp, double c) {
  switch (cmp) {
    case Comparator::less: return x < c;
    case Comparator::less_equal: return x <= c;
    case Comparator::equal: return x == c;
    case Comparator::greater_equal: return x >= c;
    case Comparator::greater: return x > c;
  }
  return false;
}

// Both operands are always evaluated so that a missing feature is reported
// regardless of operand order.
bool eval_node(const Node& n, const Features& f) {
  switch (n.kind) {
    case Node::Kind::constant: return n.value;
    case Node::Kind::atom: return compare(f.at(n.feature), n.cmp, n.constant);
    case Node::Kind::negation: return !eval_node(*n.lhs, f);
    case Node::Kind::conjunction: {
      const bool a = eval_node(*n.lhs, f);
      const bool b = eval_node(*n.rhs, f);
      return a && b;
    }
    case Node::Kind::disjunction: {
      const bool a = eval_node(*n.lhs, f);
      const bool b = eval_node(*n.rhs, f);
      return a || b;
    }
  }
  return false;
}

int precedence(const Node& n) {
  switch (n.kind) {
    case Node::Kind::disjunction: return 1;
    case Node::Kind::conjunction: return 2;
    default: return 3;
  }
}

void print(const Node& n, std::string& out);

void print_operand(const Node& n, int min_prec, std::string& out) {
  if (precedence(n) < min_prec) {
    out += '(';
    print(n, out);
    out += ')';
  } else {
    print(n, out);
  }
}

void print(const Node& n, std::string& out) {
  switch (n.kind) {
    case Node::Kind::constant:
      out += n.value ? "true" : "false";
      break;
    case Node::Kind::atom:
      out += n.feature;
      out += to_string(n.cmp);
      out += format_double(n.constant);
      break;
    case Node::Kind::negation:
      out += '!';
      if (n.lhs->kind == Node::Kind::constant || n.lhs->kind == Node::Kind::negation) {
        print(*n.lhs, out);
      } else {
        out += '(';
        print(*n.lhs, out);
        out += ')';
      }
      break;
    case Node::Kind::conjunction:
      print_operand(*n.lhs, 2, out);
      out += " && ";
      print_operand(*n.rhs, 3, out);
      break;
    case Node::Kind::disjunction:
      print_operand(*n.lhs, 1, out);
      out += " || ";
      print_operand(*n.rhs, 2, out);
      break;
  }
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse() {
    auto n = parse_or();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::Parse, "predicate '" + std::string(text_) + "' column " +
                                      std::to_string(pos_ + 1) + ": " + what);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(std::string_view token) {
    skip_space();
    if (text_.substr(pos_).starts_with(token)) {
      pos_ += token.size();
      return true;
    }
    return false;
  }

  NodePtr parse_or() {
    auto lhs = parse_and();
    while (accept("||")) lhs = make_binary(Node::Kind::disjunction, lhs, parse_and());
    return lhs;
  }

  NodePtr parse_and() {
    auto lhs = parse_unary();
    while (accept("&&")) lhs = make_binary(Node::Kind::conjunction, lhs, parse_unary());
    return lhs;
  }

  NodePtr parse_unary() {
    if (accept("!")) {
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::negation;
      n->lhs = parse_unary();
      return n;
    }
    return parse_primary();
  }

  NodePtr parse_primary() {
    if (accept("(")) {
      auto n = parse_or();
      if (!accept(")")) fail("expected ')'");
      return n;
    }
    const auto name = identifier();
    if (name.empty()) fail("expected feature name, literal or '('");
    if (name == "true") return make_constant(true);
    if (name == "false") return make_constant(false);

    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::atom;
    n->feature = std::string(name);
    n->cmp = comparator();
    n->constant = number();
    return n;
  }

  std::string_view identifier() {
    skip_space();
    const auto start = pos_;
    while (pos_ < text_.size()) {
      const auto c = static_cast<unsigned char>(text_[pos_]);
      if (std::isalnum(c) || c == '_') {
        ++pos_;
      } else {
        break;
      }
    }
    auto name = text_.substr(start, pos_ - start);
    if (!name.empty() && !is_feature_name(name)) {
      pos_ = start;
      fail("invalid feature name '" + std::string(name) + "'");
    }
    return name;
  }

  Comparator comparator() {
    if (accept("<=")) return Comparator::less_equal;
    if (accept(">=")) return Comparator::greater_equal;
    if (accept("==")) return Comparator::equal;
    if (accept("<")) return Comparator::less;
    if (accept(">")) return Comparator::greater;
    if (accept("=")) return Comparator::equal;
    fail("expected comparator");
  }

  double number() {
    skip_space();
    const auto start = pos_;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      const bool exponent_sign =
          (c == '+' || c == '-') && pos_ > start && (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E');
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == 'e' || c == 'E' ||
          exponent_sign || (pos_ == start && (c == '-' || c == '+'))) {
        ++pos_;
      } else {
        break;
      }
    }
    const auto v = parse_double(text_.substr(start, pos_ - start));
    if (!v || !std::isfinite(*v)) {
      pos_ = start;
      fail("expected numeric constant");
    }
    return *v;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string_view to_string(Comparator cmp) noexcept {
  switch (cmp) {
    case Comparator::less: return "<";
    case Comparator::less_equal: return "<=";
    case Comparator::equal: return "==";
    case Comparator::greater_equal: return ">=";
    case Comparator::greater: return ">";
  }
  return "?";
}

Predicate::Predicate() : root_(make_constant(true)) {}

Predicate Predicate::always() { return Predicate(); }

Predicate Predicate::never() { return Predicate(make_constant(false)); }

Predicate Predicate::compare(std::string feature, Comparator cmp, double constant) {
  if (!is_feature_name(feature)) {
    throw Error(ErrorCode::Parse, "invalid feature name '" + feature + "'");
  }
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::atom;
  n->feature = std::move(feature);
  n->cmp = cmp;
  n->constant = constant;
  return Predicate(std::move(n));
}

Predicate Predicate::parse(std::string_view text) { return Predicate(Parser(text).parse()); }

Predicate operator&&(const Predicate& lhs, const Predicate& rhs) {
  return Predicate(make_binary(Node::Kind::conjunction, lhs.root_, rhs.root_));
}

Predicate operator||(const Predicate& lhs, const Predicate& rhs) {
  return Predicate(make_binary(Node::Kind::disjunction, lhs.root_, rhs.root_));
}

Predicate operator!(const Predicate& p) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::negation;
  n->lhs = p.root_;
  return Predicate(std::move(n));
}

bool Predicate::evaluate(const Features& features) const { return eval_node(*root_, features); }

bool Predicate::is_always_true() const noexcept {
  return root_->kind == Node::Kind::constant && root_->value;
}

std::string Predicate::to_string() const {
  std::string out;
  print(*root_, out);
  return out;
}

}  // namespace prisample
