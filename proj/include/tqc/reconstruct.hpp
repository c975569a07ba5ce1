#pragma once

// Descendants with modified psi powers from psi-free data. Replaces one factor
// of psi-bar at a mark s using the ample class H with e = <H, delta>:
//
//   e^2 <psi^a g_s, R> = <psi^(a-1) g_s, H^2, R> - 2e <psi^(a-1) (g_s H), R>
//     + sum over delta1 + delta2 = delta (both nonzero) of <H, delta2>^2 times
//       the glued products, where on each side a mark with power p >= 1 either
//       keeps psi^p or collapses into the gluing mark (adding p - 1 to its
//       power and its class to the gluing class).

#include <map>
#include <optional>
#include <set>

#include "tqc/descendants.hpp"

namespace tqc {

class PsiReconstructor {
 public:
  explicit PsiReconstructor(const DescendantTable& table) : table_(table) {}

  /// Value of any key; nullopt with `missing` filled when some psi-free
  /// ingredient is not in the table.
  std::optional<Rational> value(const DescendantKey& key, std::set<DescendantKey>& missing);

  /// Which psi-carrying mark the recursion peels: the last one (default) or
  /// the first. Both must agree; tests use this as a cross-check.
  void peel_first(bool first) {
    first_ = first;
    memo_.clear();
    known_.clear();
  }

 private:
  using Cls = std::vector<Rational>;
  struct Slot {
    int a;
    Cls cls;
  };
  std::optional<Rational> general(const CurveClass& delta, const std::vector<Slot>& slots,
                                  std::set<DescendantKey>& missing);
  std::optional<Rational> recurse(const DescendantKey& key, std::set<DescendantKey>& missing);

  const DescendantTable& table_;
  std::map<DescendantKey, Rational> memo_;
  // lookups and results by the key as asked
  std::map<DescendantKey, Rational> known_;
  bool first_ = false;
};

/// Convenience wrapper for one key.
std::optional<Rational> reconstruct_psi(const DescendantTable& table, const DescendantKey& key,
                                        std::set<DescendantKey>& missing);

}  // namespace tqc
