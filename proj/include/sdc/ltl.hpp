#pragma once

// Bounded LTL over finite per-vehicle traces.
//
// Formulas use atoms (BER, C, Y), boolean connectives and the bounded
// operators G[a,b] / F[a,b] whose windows are step offsets from the current
// index. Evaluation is done bottom-up: each subformula's truth value is
// computed for every index at once, and windowed operators use prefix sums,
// so a whole trace is checked in O(|formula| * |trace|).

#include <array>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sdc/error.hpp"

namespace sdc::ltl {

/// Upper window bound meaning "to the end of the trace" (written `T`).
inline constexpr std::size_t kHorizon = std::numeric_limits<std::size_t>::max();

struct VehicleState {
  double position = 0.0;
  double velocity = 0.0;
  bool ber_active = false;
  bool collided = false;
  bool responsible = false;

  friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

struct Trace {
  std::string vehicle_id;
  double dt = 0.0;
  std::vector<VehicleState> steps;
  // Optional metadata carried through CSV export.
  int lane = 0;
  std::string info_source;

  std::size_t size() const noexcept { return steps.size(); }

  void validate() const {
    if (steps.empty()) throw InvalidInput("trace '" + vehicle_id + "' is empty");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidInput("trace '" + vehicle_id + "' has non-positive dt");
    bool seen_collision = false;
    for (std::size_t i = 0; i < steps.size(); ++i) {
      if (steps[i].velocity < 0.0) {
        throw InvalidInput("trace '" + vehicle_id + "' has negative velocity at step " + std::to_string(i));
      }
      if (seen_collision && !steps[i].collided) {
        throw InvalidInput("trace '" + vehicle_id + "' clears its collision flag at step " + std::to_string(i));
      }
      seen_collision = seen_collision || steps[i].collided;
    }
  }
};

/// How window indices past the last step are treated.
enum class BoundaryMode {
  /// Out-of-range indices read the final state (the tail is absorbing).
  ClampToEnd,
  /// Out-of-range indices do not exist: an empty G window is true, an empty F window false.
  Strict,
};

class Formula {
 public:
  enum class Op { Atom, Not, And, Or, Implies, Globally, Finally };

  static Formula atom(std::string name) { return Formula(make(Op::Atom, std::move(name), 0, 0, {}, {})); }
  static Formula negate(Formula f) { return Formula(make(Op::Not, {}, 0, 0, std::move(f.node_), {})); }
  static Formula conj(Formula a, Formula b) { return binary(Op::And, std::move(a), std::move(b)); }
  static Formula disj(Formula a, Formula b) { return binary(Op::Or, std::move(a), std::move(b)); }
  static Formula implies(Formula a, Formula b) { return binary(Op::Implies, std::move(a), std::move(b)); }
  static Formula globally(std::size_t lo, std::size_t hi, Formula f) { return windowed(Op::Globally, lo, hi, std::move(f)); }
  static Formula finally(std::size_t lo, std::size_t hi, Formula f) { return windowed(Op::Finally, lo, hi, std::move(f)); }

  Op op() const noexcept { return node_->op; }
  const std::string& name() const noexcept { return node_->name; }
  std::size_t lo() const noexcept { return node_->lo; }
  std::size_t hi() const noexcept { return node_->hi; }
  Formula lhs() const { return Formula(node_->lhs); }
  Formula rhs() const { return Formula(node_->rhs); }

  std::size_t depth() const {
    switch (op()) {
      case Op::Atom: return 0;
      case Op::Not:
      case Op::Globally:
      case Op::Finally: return 1 + lhs().depth();
      default: return 1 + std::max(lhs().depth(), rhs().depth());
    }
  }

 private:
  struct Node {
    Op op;
    std::string name;
    std::size_t lo;
    std::size_t hi;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
  };

  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  static std::shared_ptr<const Node> make(Op op, std::string name, std::size_t lo, std::size_t hi,
                                          std::shared_ptr<const Node> l, std::shared_ptr<const Node> r) {
    return std::make_shared<const Node>(Node{op, std::move(name), lo, hi, std::move(l), std::move(r)});
  }
  static Formula binary(Op op, Formula a, Formula b) {
    return Formula(make(op, {}, 0, 0, std::move(a.node_), std::move(b.node_)));
  }
  static Formula windowed(Op op, std::size_t lo, std::size_t hi, Formula f) {
    if (lo > hi) throw InvalidInput("temporal window [a,b] requires a <= b");
    return Formula(make(op, {}, lo, hi, std::move(f.node_), {}));
  }

  std::shared_ptr<const Node> node_;
};

/// Atoms with a meaning over VehicleState.
inline constexpr std::array<std::string_view, 3> kRegisteredAtoms = {"BER", "C", "Y"};

inline bool atom_value(const VehicleState& s, std::string_view name) {
  if (name == "BER") return s.ber_active;
  if (name == "C") return s.collided;
  if (name == "Y") return s.responsible;
  throw EvaluationError("unknown atom '" + std::string(name) + "' (expected BER, C or Y)");
}

namespace detail {

inline std::size_t saturating_add(std::size_t a, std::size_t b) {
  return a > kHorizon - b ? kHorizon : a + b;
}

inline std::vector<char> satisfaction(const Trace& trace, const Formula& f, BoundaryMode mode) {
  const std::size_t n = trace.size();
  using Op = Formula::Op;
  switch (f.op()) {
    case Op::Atom: {
      std::vector<char> out(n);
      for (std::size_t i = 0; i < n; ++i) out[i] = atom_value(trace.steps[i], f.name());
      return out;
    }
    case Op::Not: {
      auto out = satisfaction(trace, f.lhs(), mode);
      for (auto& v : out) v = !v;
      return out;
    }
    case Op::And:
    case Op::Or:
    case Op::Implies: {
      auto a = satisfaction(trace, f.lhs(), mode);
      const auto b = satisfaction(trace, f.rhs(), mode);
      for (std::size_t i = 0; i < n; ++i) {
        if (f.op() == Op::And) a[i] = a[i] && b[i];
        else if (f.op() == Op::Or) a[i] = a[i] || b[i];
        else a[i] = !a[i] || b[i];
      }
      return a;
    }
    case Op::Globally:
    case Op::Finally: {
      const auto inner = satisfaction(trace, f.lhs(), mode);
      // prefix[k] = number of true values among inner[0..k).
      std::vector<std::size_t> prefix(n + 1, 0);
      for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + (inner[i] ? 1 : 0);
      const bool globally = f.op() == Op::Globally;
      std::vector<char> out(n);
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t first = saturating_add(i, f.lo());
        std::size_t last = saturating_add(i, f.hi());
        if (mode == BoundaryMode::ClampToEnd) {
          first = std::min(first, n - 1);
        } else if (first > n - 1) {
          out[i] = globally;
          continue;
        }
        last = std::min(last, n - 1);
        const std::size_t width = last - first + 1;
        const std::size_t hits = prefix[last + 1] - prefix[first];
        out[i] = globally ? hits == width : hits > 0;
      }
      return out;
    }
  }
  throw EvaluationError("unknown formula operator");
}

}  // namespace detail

/// Truth value of `f` at every index of `trace`.
inline std::vector<bool> satisfaction(const Trace& trace, const Formula& f,
                                      BoundaryMode mode = BoundaryMode::ClampToEnd) {
  if (trace.steps.empty()) throw InvalidInput("cannot evaluate a formula over an empty trace");
  const auto raw = detail::satisfaction(trace, f, mode);
  return {raw.begin(), raw.end()};
}

/// (trace, i) |= f
inline bool evaluate(const Trace& trace, std::size_t i, const Formula& f,
                     BoundaryMode mode = BoundaryMode::ClampToEnd) {
  if (i >= trace.size()) {
    throw InvalidInput("evaluation index " + std::to_string(i) + " is outside a trace of length " +
                       std::to_string(trace.size()));
  }
  return detail::satisfaction(trace, f, mode)[i] != 0;
}

/// G[0,T](BER -> !Y): whenever the vehicle performs its best-effort reaction it carries no blame.
inline Formula vehicle_safe_formula() {
  return Formula::globally(0, kHorizon, Formula::implies(Formula::atom("BER"), Formula::negate(Formula::atom("Y"))));
}

/// Literal road-level formula !F[0,T](BER -> Y). It is strictly stronger than
/// vehicle_safe_formula (it also demands BER at every step) and is kept only
/// for comparison; road_safe uses the per-vehicle definition.
inline Formula road_safe_literal_formula() {
  return Formula::negate(Formula::finally(0, kHorizon, Formula::implies(Formula::atom("BER"), Formula::atom("Y"))));
}

inline bool vehicle_safe(const Trace& trace) { return evaluate(trace, 0, vehicle_safe_formula()); }

namespace detail {

inline void require_common_horizon(std::span<const Trace> traces) {
  if (traces.empty()) return;
  const Trace& first = traces.front();
  for (const Trace& t : traces) {
    if (t.size() != first.size() || std::abs(t.dt - first.dt) > 1e-12 * first.dt) {
      throw InvalidInput("trace '" + t.vehicle_id + "' does not share dt/horizon with '" + first.vehicle_id + "'");
    }
  }
}

}  // namespace detail

/// Safe driving throughput: number of vehicles in the safe state.
inline std::size_t sdt(std::span<const Trace> traces) {
  detail::require_common_horizon(traces);
  std::size_t count = 0;
  for (const Trace& t : traces) count += vehicle_safe(t) ? 1 : 0;
  return count;
}

/// A road is safe when every vehicle on it is. The empty road is safe.
inline bool road_safe(std::span<const Trace> traces) { return sdt(traces) == traces.size(); }

// ---------------------------------------------------------------------------
// Text syntax
//
//   formula  := implies
//   implies  := or ( "->" implies )?          right associative
//   or       := and ( "|" and )*
//   and      := unary ( "&" unary )*
//   unary    := "!" unary | ("G"|"F") "[" bound "," bound "]" unary | atom | "(" formula ")"
//   bound    := digits | "T"
//   atom     := identifier (BER, C, Y)

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Formula parse() {
    Formula f = parse_implies();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < pos_ && i < text_.size(); ++i) {
      if (text_[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError(what, line, column);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(std::string_view token) {
    skip_space();
    if (text_.substr(pos_, token.size()) == token) {
      pos_ += token.size();
      return true;
    }
    return false;
  }

  void expect(std::string_view token) {
    if (!accept(token)) {
      fail(pos_ < text_.size() ? "expected '" + std::string(token) + "'"
                               : "expected '" + std::string(token) + "' before end of input");
    }
  }

  Formula parse_implies() {
    Formula lhs = parse_or();
    if (accept("->")) return Formula::implies(std::move(lhs), parse_implies());
    return lhs;
  }

  Formula parse_or() {
    Formula f = parse_and();
    while (accept("|")) f = Formula::disj(std::move(f), parse_and());
    return f;
  }

  Formula parse_and() {
    Formula f = parse_unary();
    while (accept("&")) f = Formula::conj(std::move(f), parse_unary());
    return f;
  }

  static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

  std::size_t parse_bound() {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == 'T' && (pos_ + 1 == text_.size() || !ident_char(text_[pos_ + 1]))) {
      ++pos_;
      return kHorizon;
    }
    if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      fail("expected a step bound (non-negative integer or T)");
    }
    std::size_t value = 0;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      const std::size_t digit = static_cast<std::size_t>(text_[pos_] - '0');
      if (value > (kHorizon - 1 - digit) / 10) fail("step bound is too large");
      value = value * 10 + digit;
      ++pos_;
    }
    return value;
  }

  Formula parse_unary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    if (accept("!")) return Formula::negate(parse_unary());
    if (accept("(")) {
      Formula f = parse_implies();
      expect(")");
      return f;
    }
    const char c = text_[pos_];
    if ((c == 'G' || c == 'F') && pos_ + 1 < text_.size()) {
      const std::size_t save = pos_;
      ++pos_;
      if (accept("[")) {
        const std::size_t lo = parse_bound();
        expect(",");
        const std::size_t hi = parse_bound();
        expect("]");
        if (lo > hi) fail("window lower bound exceeds upper bound");
        Formula inner = parse_unary();
        return c == 'G' ? Formula::globally(lo, hi, std::move(inner)) : Formula::finally(lo, hi, std::move(inner));
      }
      pos_ = save;
    }
    if (!ident_char(c)) fail("unexpected '" + std::string(1, c) + "'");
    const std::size_t start = pos_;
    while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
    return Formula::atom(std::string(text_.substr(start, pos_ - start)));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses the text syntax above. Throws ParseError with line/column.
inline Formula parse_formula(std::string_view text) { return detail::Parser(text).parse(); }

/// Fully parenthesised rendering accepted by parse_formula.
inline std::string to_string(const Formula& f) {
  using Op = Formula::Op;
  auto bound = [](std::size_t b) { return b == kHorizon ? std::string("T") : std::to_string(b); };
  switch (f.op()) {
    case Op::Atom: return f.name();
    case Op::Not: return "!" + to_string(f.lhs());
    case Op::And: return "(" + to_string(f.lhs()) + " & " + to_string(f.rhs()) + ")";
    case Op::Or: return "(" + to_string(f.lhs()) + " | " + to_string(f.rhs()) + ")";
    case Op::Implies: return "(" + to_string(f.lhs()) + " -> " + to_string(f.rhs()) + ")";
    case Op::Globally:
    case Op::Finally:
      return std::string(f.op() == Op::Globally ? "G[" : "F[") + bound(f.lo()) + "," + bound(f.hi()) + "]" +
             to_string(f.lhs());
  }
  return "?";
}

}  // namespace sdc::ltl
