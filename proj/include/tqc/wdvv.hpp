#pragma once

// Associativity residuals, the ring-axiom verification suite, and the solver
// that runs the associativity equations backwards to fill the table.

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tqc/contact.hpp"

namespace tqc {

/// Contradictory coefficient equations; `equation` is the offending row.
class InconsistentSystem : public Error {
 public:
  InconsistentSystem(const std::string& what, std::string equation)
      : Error(what), equation(std::move(equation)) {}
  std::string equation;
};

/// Keys the harvested equations do not pin down.
class Underdetermined : public Error {
 public:
  Underdetermined(const std::string& what, std::vector<DescendantKey> keys) : Error(what), keys(std::move(keys)) {}
  std::vector<DescendantKey> keys;
};

/// (T_i * T_j) * T_k - T_i * (T_j * T_k) through a complete product table.
CohElement assoc_residual(const TargetModel& t, const ProductTable& table, std::size_t i, std::size_t j,
                          std::size_t k);

/// contact_series(contact(a,b), c) - contact_series(a, contact(b,c)) for q-
/// and z-free inputs. Unknown propagates through `missing`.
struct Residual {
  std::optional<CohElement> value;
  std::set<DescendantKey> missing;
};
Residual assoc_residual(const EvalContext& ctx, const DeformingElement& chi, const CohElement& alpha,
                        const CohElement& beta, const CohElement& gamma);

/// Smallest total q-degree among the terms; nullopt for zero.
std::optional<int> leading_q_degree(const CohElement& a);

struct ChiSpec {
  enum class Kind { Zero, Random, Symbolic, Explicit };
  Kind kind = Kind::Zero;
  std::uint64_t seed = 1;
  /// Explicit: one rational basis vector per order 0..d.
  std::vector<std::vector<Rational>> values;
};

/// "zero", "random:<seed>", "symbolic", or basis expressions separated by ';'.
ChiSpec parse_chi_spec(const TargetModel& t, const std::string& text);

/// Variable table for a spec (parameters c<t>_<i> when symbolic).
VarTablePtr chi_variables(const TargetModel& t, const ChiSpec& spec, int d, int unknowns = 0);
DeformingElement make_deforming(const TargetModel& t, const ChiSpec& spec, int d, const VarTablePtr& vars,
                                const TruncationProfile& pr);

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;  // residual when nonzero
  std::optional<int> leading_q_degree;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  std::set<DescendantKey> missing;
  bool complete() const { return missing.empty(); }
  bool passed() const;
  /// Minimum over failing residuals.
  std::optional<int> leading_q_degree() const;
};

/// Identity, commutativity and associativity over all basis triples. An
/// incomplete table yields an empty check list and the missing keys.
VerifyReport verify_suite(const DescendantTable& table, int d, const TruncationProfile& profile,
                          const ChiSpec& spec);

/// When the psi recursion fills psi-carrying keys: before harvesting each
/// level, only for keys the harvested equations leave free, or never.
enum class PsiMode { Before, After, Off };

struct SolveOptions {
  int d = 0;
  TruncationProfile profile;
  /// z cap for the psi-free phase; default r + max <c1,delta> - 6.
  std::optional<int> z_cap_psi_free;
  /// Harvest mode: symbolic chi for the psi-free phase, random draws otherwise.
  bool symbolic_psi_free = true;
  std::vector<std::uint64_t> seeds{11, 12};
  PsiMode psi = PsiMode::Before;
  std::function<void(const std::string&)> log;
};

struct SolveReport {
  std::vector<std::string> log;
  std::size_t solved = 0;
  std::size_t filled = 0;  // via the psi recursion
};

/// Iterates q-degrees ascending and solves each level's residual equations
/// exactly. Throws InconsistentSystem or Underdetermined; keys solved before
/// the failure stay in the table.
SolveReport solve(DescendantTable& table, const SolveOptions& options);

/// Fills the psi-carrying keys that the product table for (d, profile, spec)
/// needs through the psi recursion alone, without harvesting associativity
/// equations. Returns the number of keys filled.
std::size_t fill_psi(DescendantTable& table, int d, const TruncationProfile& profile, const ChiSpec& spec);

}  // namespace tqc
