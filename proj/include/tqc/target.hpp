#pragma once

// Structure-constant model of an even cohomology ring H*(X), its Poincare
// pairing and the curve-class grading data, plus basis-indexed elements.

#include <string>
#include <string_view>
#include <vector>

#include "tqc/poly.hpp"

namespace tqc {

using RationalMatrix = std::vector<std::vector<Rational>>;

/// Effective curve class in the nonnegative orthant of the curve lattice.
using CurveClass = std::vector<int>;

struct BasisElement {
  std::string name;
  int codim = 0;
};

class TargetModel {
 public:
  struct Data {
    std::string name;
    int dim = 0;
    std::vector<BasisElement> basis;
    // cup[i][j][k] = c_{ij}^k
    std::vector<RationalMatrix> cup;
    RationalMatrix pairing;
    int curve_rank = 0;
    std::vector<int> c1;
    // divisor_pairing[i][c] = <T_i, e_c>, only meaningful for codim-1 T_i
    std::vector<std::vector<int>> divisor_pairing;
    // coefficients of the ample class over the basis (codim-1 entries only)
    std::vector<Rational> ample;
  };

  /// Validates every axiom; throws InvalidTarget naming the failed one.
  explicit TargetModel(Data data);

  const std::string& name() const { return d_.name; }
  int dim() const { return d_.dim; }
  std::size_t size() const { return d_.basis.size(); }
  const BasisElement& basis(std::size_t i) const { return d_.basis[i]; }
  int codim(std::size_t i) const { return d_.basis[i].codim; }
  std::size_t identity() const { return 0; }
  std::size_t point() const { return point_; }
  int curve_rank() const { return d_.curve_rank; }
  const std::vector<int>& c1() const { return d_.c1; }
  const Data& data() const { return d_; }

  std::size_t index_of(std::string_view basis_name) const;  // throws UsageError

  const Rational& cup_coeff(std::size_t i, std::size_t j, std::size_t k) const {
    return d_.cup[i][j][k];
  }
  const Rational& pairing(std::size_t i, std::size_t j) const { return d_.pairing[i][j]; }
  const RationalMatrix& pairing_inverse() const { return inverse_; }

  /// <c1, delta>
  int c1_degree(const CurveClass& delta) const;
  /// <T_i, delta> for a codim-1 basis element.
  int divisor_degree(std::size_t i, const CurveClass& delta) const;
  /// <H, delta> for the ample class H.
  Rational ample_degree(const CurveClass& delta) const;
  const std::vector<Rational>& ample() const { return d_.ample; }

  bool operator==(const TargetModel& other) const;

 private:
  Data d_;
  std::size_t point_ = 0;
  RationalMatrix inverse_;
};

/// One of p1, p2, p3, p1xp1.
TargetModel builtin_target(std::string_view name);
std::vector<std::string> builtin_target_names();

/// JSON config: name, dim, basis[{name,codim}], cup[{i,j,k,coeff}],
/// pairing[{i,j,value}], curveRank, c1[]; optional divisorPairing[{i,component,value}]
/// and ample[{i,coeff}]. Rationals as "p/q" strings or integers.
TargetModel load_target(std::string_view config_text);
std::string target_to_json(const TargetModel& target);

/// Exact inverse; throws InvalidTarget if singular.
RationalMatrix invert(const RationalMatrix& m);

/// r + <c1,delta> + n - 3. Throws UsageError for non-effective delta.
int vdim(const TargetModel& target, const CurveClass& delta, int n_marks);

bool is_effective(const CurveClass& delta);
bool is_zero_class(const CurveClass& delta);

/// Nonzero effective classes whose q-monomial survives the profile, in
/// (|delta|, delta) order.
std::vector<CurveClass> effective_classes(const TruncationProfile& profile);
/// q^delta as a polynomial (zero if outside the profile).
TruncatedPoly q_power(const VarTablePtr& vars, const TruncationProfile& profile, const CurveClass& delta);

/// Basis-indexed vector of scalars over one variable table.
struct CohElement {
  std::vector<TruncatedPoly> coeffs;

  std::size_t size() const { return coeffs.size(); }
  const TruncatedPoly& operator[](std::size_t i) const { return coeffs[i]; }
  TruncatedPoly& operator[](std::size_t i) { return coeffs[i]; }
  bool is_zero() const;

  static CohElement zero(const TargetModel& t, const VarTablePtr& vars, const TruncationProfile& pr);
  static CohElement basis(const TargetModel& t, const VarTablePtr& vars, const TruncationProfile& pr,
                          std::size_t i, const Rational& c = 1);

  CohElement& operator+=(const CohElement& o);
  CohElement& operator-=(const CohElement& o);
  CohElement& operator*=(const TruncatedPoly& s);
  CohElement& operator*=(const Rational& s);
  friend CohElement operator+(CohElement a, const CohElement& b) { return a += b; }
  friend CohElement operator-(CohElement a, const CohElement& b) { return a -= b; }
  friend CohElement operator*(CohElement a, const TruncatedPoly& s) { return a *= s; }
  friend CohElement operator*(const TruncatedPoly& s, CohElement a) { return a *= s; }
  friend CohElement operator*(CohElement a, const Rational& s) { return a *= s; }
  bool operator==(const CohElement& o) const { return coeffs == o.coeffs; }
};

CohElement cup(const TargetModel& t, const CohElement& a, const CohElement& b);
TruncatedPoly integrate(const TargetModel& t, const CohElement& a);
/// exp_series of the identity component times the finite nilpotent series.
CohElement exp_alg(const TargetModel& t, const CohElement& a);
CohElement truncate(const CohElement& a, const TruncationProfile& pr);

/// e.g. "q + (1 - q)*h": one group per nonzero component in basis order, the
/// identity's name omitted; "0" when zero.
std::string to_string(const TargetModel& t, const CohElement& a);

/// Parses "2*h2 + 3*h - 1/2" style rational combinations of basis names
/// ("1" alone is the identity).
std::vector<Rational> parse_basis_expr(const TargetModel& t, std::string_view text);
CohElement from_rationals(const TargetModel& t, const VarTablePtr& vars, const TruncationProfile& pr,
                          const std::vector<Rational>& coeffs);

}  // namespace tqc
