#pragma once

// Direct quantifier expansion of bounded LTL, one index at a time.
// Deliberately naive: no sharing, no prefix sums.

#include <algorithm>
#include <cstddef>
#include <random>
#include <string>

#include "sdc/ltl.hpp"

namespace testsupport {

using sdc::ltl::BoundaryMode;
using sdc::ltl::Formula;
using sdc::ltl::Trace;

inline bool reference_eval(const Trace& tr, std::size_t i, const Formula& f, BoundaryMode mode) {
  using Op = Formula::Op;
  const std::size_t last = tr.size() - 1;
  switch (f.op()) {
    case Op::Atom: return sdc::ltl::atom_value(tr.steps[i], f.name());
    case Op::Not: return !reference_eval(tr, i, f.lhs(), mode);
    case Op::And: return reference_eval(tr, i, f.lhs(), mode) && reference_eval(tr, i, f.rhs(), mode);
    case Op::Or: return reference_eval(tr, i, f.lhs(), mode) || reference_eval(tr, i, f.rhs(), mode);
    case Op::Implies: return !reference_eval(tr, i, f.lhs(), mode) || reference_eval(tr, i, f.rhs(), mode);
    case Op::Globally:
    case Op::Finally: {
      const bool all = f.op() == Op::Globally;
      // Offsets past the end either read the last state or are absent.
      for (std::size_t j = f.lo(); j <= f.hi(); ++j) {
        const std::size_t k = i + j;
        if (k > last && mode == BoundaryMode::Strict) break;
        const bool v = reference_eval(tr, std::min(k, last), f.lhs(), mode);
        if (all && !v) return false;
        if (!all && v) return true;
        if (k >= last) break;  // every further offset reads the same clamped state
        if (j == f.hi()) break;
      }
      return all;
    }
  }
  return false;
}

inline Trace random_trace(std::mt19937_64& rng, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  std::bernoulli_distribution coin(0.5);
  Trace t;
  t.vehicle_id = "R";
  t.dt = 0.1;
  const std::size_t n = len(rng);
  for (std::size_t i = 0; i < n; ++i) {
    sdc::ltl::VehicleState s;
    s.ber_active = coin(rng);
    s.collided = coin(rng);
    s.responsible = coin(rng);
    t.steps.push_back(s);
  }
  return t;
}

inline Formula random_formula(std::mt19937_64& rng, int depth) {
  static const char* atoms[] = {"BER", "C", "Y"};
  std::uniform_int_distribution<int> pick_atom(0, 2);
  if (depth <= 1) return Formula::atom(atoms[pick_atom(rng)]);
  std::uniform_int_distribution<int> pick(0, 7);
  std::uniform_int_distribution<std::size_t> bound(0, 8);
  std::bernoulli_distribution open_end(0.2);
  auto sub = [&] { return random_formula(rng, std::uniform_int_distribution<int>(1, depth - 1)(rng)); };
  switch (pick(rng)) {
    case 0: return Formula::atom(atoms[pick_atom(rng)]);
    case 1: return Formula::negate(sub());
    case 2: return Formula::conj(sub(), sub());
    case 3: return Formula::disj(sub(), sub());
    case 4: return Formula::implies(sub(), sub());
    case 5:
    case 6:
    case 7: {
      const std::size_t a = bound(rng);
      const std::size_t b = open_end(rng) ? sdc::ltl::kHorizon : a + bound(rng);
      return pick(rng) % 2 ? Formula::globally(a, b, sub()) : Formula::finally(a, b, sub());
    }
  }
  return Formula::atom("BER");
}

}  // namespace testsupport
