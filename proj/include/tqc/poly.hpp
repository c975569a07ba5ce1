#pragma once

// Sparse multivariate polynomials over Q with per-group degree caps.
//
// Every scalar in the engine is a TruncatedPoly: Novikov variables q (one per
// curve-lattice component), the formal variable z, formal parameters, and
// solver-internal unknowns. Products never materialize a term that lies
// outside the truncation profile.

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "tqc/error.hpp"

namespace tqc {

using Rational = mpq_class;

/// Parses "p", "-p" or "p/q". Rejects a zero denominator.
Rational parse_rational(std::string_view text);
/// "p/q" in lowest terms, "/1" omitted.
std::string to_string(const Rational& value);

inline constexpr std::size_t kMaxVariables = 40;
inline constexpr int kMaxExponent = 250;

enum class VarGroup : std::uint8_t { Novikov, Z, Param, Unknown };

struct Variable {
  std::string name;
  VarGroup group = VarGroup::Param;
  int component = -1;  // lattice component for Novikov variables
};

/// Ordered variable list shared by every polynomial of one computation.
class VariableTable {
 public:
  /// Novikov variables ("q" for rank 1, "q1".."qk" otherwise), then z, then
  /// the given parameters, then `unknowns` solver variables "u0", "u1", ...
  static std::shared_ptr<const VariableTable> make(int curve_rank,
                                                   std::vector<std::string> params = {},
                                                   int unknowns = 0);
  static std::shared_ptr<const VariableTable> from_variables(std::vector<Variable> vars);

  std::size_t size() const { return vars_.size(); }
  const Variable& operator[](std::size_t i) const { return vars_[i]; }
  std::span<const Variable> variables() const { return vars_; }

  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;  // throws UsageError

  std::size_t z_index() const { return z_index_; }
  int curve_rank() const { return static_cast<int>(novikov_.size()); }
  std::size_t novikov_index(int component) const { return novikov_.at(component); }
  std::span<const std::size_t> param_indices() const { return params_; }
  std::span<const std::size_t> unknown_indices() const { return unknowns_; }

  bool operator==(const VariableTable& other) const;

 private:
  std::vector<Variable> vars_;
  std::size_t z_index_ = 0;
  std::vector<std::size_t> novikov_;
  std::vector<std::size_t> params_;
  std::vector<std::size_t> unknowns_;
};

using VarTablePtr = std::shared_ptr<const VariableTable>;

struct Monomial {
  std::array<std::uint8_t, kMaxVariables> exps{};

  std::uint8_t operator[](std::size_t i) const { return exps[i]; }
  std::uint8_t& operator[](std::size_t i) { return exps[i]; }
  int total_degree() const;
  bool is_one() const;
  friend bool operator==(const Monomial&, const Monomial&) = default;
};

struct MonomialHash {
  std::size_t operator()(const Monomial& m) const noexcept;
};

/// Graded-lexicographic: lower total degree first, ties by descending
/// exponent of the earliest differing variable.
struct GradedLexLess {
  bool operator()(const Monomial& a, const Monomial& b) const;
};

/// Caps on exponents. Unknown-group variables always have total degree <= 1.
struct TruncationProfile {
  std::vector<int> q_caps;           // per Novikov component
  std::optional<int> q_total_cap;    // optional cap on the summed q-degree
  int z_cap = 0;
  std::optional<int> param_cap;      // total degree in Param variables

  bool operator==(const TruncationProfile&) const = default;

  /// Pointwise minimum.
  static TruncationProfile meet(const TruncationProfile& a, const TruncationProfile& b);
  /// True if every cap here is <= the corresponding cap of `other`.
  bool no_looser_than(const TruncationProfile& other) const;
  bool admits(const Monomial& m, const VariableTable& vars) const;
};

using Term = std::pair<Monomial, Rational>;

class TruncatedPoly {
 public:
  TruncatedPoly(VarTablePtr vars, TruncationProfile profile);

  static TruncatedPoly constant(VarTablePtr vars, TruncationProfile profile, const Rational& c);
  static TruncatedPoly variable(VarTablePtr vars, TruncationProfile profile, std::size_t index,
                                int power = 1);
  static TruncatedPoly monomial(VarTablePtr vars, TruncationProfile profile, const Monomial& m,
                                const Rational& c);
  /// Builds from arbitrary terms; sums duplicates, drops zeros and anything
  /// outside the profile.
  static TruncatedPoly from_terms(VarTablePtr vars, TruncationProfile profile,
                                  std::vector<Term> terms);

  const VarTablePtr& vars() const { return vars_; }
  const TruncationProfile& profile() const { return profile_; }
  std::span<const Term> terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  Rational constant_term() const;
  Rational coefficient(const Monomial& m) const;

  TruncatedPoly zero_like() const { return TruncatedPoly(vars_, profile_); }
  TruncatedPoly constant_like(const Rational& c) const { return constant(vars_, profile_, c); }

  TruncatedPoly& operator+=(const TruncatedPoly& other);
  TruncatedPoly& operator-=(const TruncatedPoly& other);
  TruncatedPoly& operator*=(const Rational& c);

  friend TruncatedPoly operator+(TruncatedPoly a, const TruncatedPoly& b) { return a += b; }
  friend TruncatedPoly operator-(TruncatedPoly a, const TruncatedPoly& b) { return a -= b; }
  friend TruncatedPoly operator-(TruncatedPoly a) { return a *= Rational(-1); }
  friend TruncatedPoly operator*(TruncatedPoly a, const Rational& c) { return a *= c; }
  friend TruncatedPoly operator*(const Rational& c, TruncatedPoly a) { return a *= c; }
  friend TruncatedPoly operator*(const TruncatedPoly& a, const TruncatedPoly& b);

  bool operator==(const TruncatedPoly& other) const;

  /// Structural check used in debug builds and tests.
  bool invariants_hold() const;

 private:
  void check_compatible(const TruncatedPoly& other) const;

  VarTablePtr vars_;
  TruncationProfile profile_;
  std::vector<Term> terms_;  // GradedLexLess order, no zero coefficients
};

TruncatedPoly add(const TruncatedPoly& a, const TruncatedPoly& b);
TruncatedPoly mul(const TruncatedPoly& a, const TruncatedPoly& b);

/// Drops out-of-profile terms. Throws UsageError if `profile` is looser than
/// the polynomial's own profile in any capped direction.
TruncatedPoly truncate(const TruncatedPoly& p, const TruncationProfile& profile);

/// Σ p^m / m!, stopping once every new term falls outside the profile.
/// Throws NonTerminatingSeries on a nonzero constant term or a term built only
/// from uncapped variables.
TruncatedPoly exp_series(const TruncatedPoly& p);

/// Formal partial derivative.
TruncatedPoly derivative(const TruncatedPoly& p, std::size_t var, int times = 1);

/// Replaces variable `var` by `value` (same table); result uses value's profile
/// met with p's.
TruncatedPoly substitute(const TruncatedPoly& p, std::size_t var, const TruncatedPoly& value);

/// Coefficient of var^power, as a polynomial in the remaining variables.
TruncatedPoly coefficient_of(const TruncatedPoly& p, std::size_t var, int power);

/// Canonical text: "1 - 2*y0 + 5/6*q^2*z".
std::string to_string(const TruncatedPoly& p);
std::string monomial_to_string(const Monomial& m, const VariableTable& vars);
TruncatedPoly parse_poly(std::string_view text, VarTablePtr vars, TruncationProfile profile);

}  // namespace tqc
