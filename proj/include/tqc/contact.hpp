#pragma once

// The deforming element, the d-th order bullet product and the contact
// product alpha * beta = alpha cup beta + alpha bullet beta.

#include <cstdint>
#include <optional>
#include <string>
#include <set>
#include <vector>

#include "tqc/classes.hpp"

namespace tqc {

struct DeformingElement {
  std::vector<CohElement> chis;  // chi_0 .. chi_d
  int order() const { return static_cast<int>(chis.size()) - 1; }
};

/// Deterministic generator for random chi: state <- state * 6364136223846793005
/// + 1442695040888963407 (mod 2^64); draw(n) = (state >> 33) mod n.
class Lcg {
 public:
  explicit Lcg(std::uint64_t seed) : state_(seed) {}
  std::uint64_t draw(std::uint64_t n);
  /// numerator in [-9, 9], then denominator in [1, 9]
  Rational small_rational();

 private:
  std::uint64_t state_;
};

DeformingElement zero_deforming(const TargetModel& t, const VarTablePtr& vars, const TruncationProfile& pr, int d);
/// chi_t[i] drawn in the order t = 0..d, i = basis order.
DeformingElement random_deforming(const TargetModel& t, const VarTablePtr& vars, const TruncationProfile& pr, int d,
                                  std::uint64_t seed);
/// Parameter names "c<t>_<i>" for a symbolic deforming element.
std::vector<std::string> symbolic_parameter_names(const TargetModel& t, int d);
/// chi_t[i] = c<t>_<i>; the variable table must contain those parameters.
DeformingElement symbolic_deforming(const TargetModel& t, const VarTablePtr& vars, const TruncationProfile& pr, int d);

/// Checks arity (d >= 0) and that no chi coefficient involves q or z.
void validate(const TargetModel& t, const DeformingElement& chi);

/// Result of a basis-level product: value or the reduced keys it needs.
struct Product {
  std::optional<CohElement> value;
  std::set<DescendantKey> missing;
  bool known() const { return value.has_value(); }
};

/// T_a bullet T_b. Sums over nonzero effective delta and multisets of aux
/// insertions (t, T_i) weighted by prod c_{t,i}^m / m! z^{|M|} q^delta, then
/// cups with exp_alg(2 z chi_1).
Product basis_bullet(const EvalContext& ctx, const DeformingElement& chi, std::size_t a, std::size_t b);

/// Bilinear extension to q- and z-free inputs.
Product bullet(const EvalContext& ctx, const DeformingElement& chi, const CohElement& alpha,
               const CohElement& beta);
Product contact(const EvalContext& ctx, const DeformingElement& chi, const CohElement& alpha,
                const CohElement& beta);

/// M[i][j] = T_i * T_j for all basis pairs (symmetric pairs computed once).
struct ProductTable {
  std::vector<std::vector<CohElement>> m;
  std::set<DescendantKey> missing;
  bool known() const { return missing.empty(); }
};
ProductTable product_table(const EvalContext& ctx, const DeformingElement& chi);

/// Lambda[[z]]-bilinear extension through a complete product table.
CohElement contact_series(const TargetModel& t, const ProductTable& table, const CohElement& A,
                          const CohElement& B);

}  // namespace tqc
