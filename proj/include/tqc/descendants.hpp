#pragma once

// Store of enumerative descendants {tau_a1(T_i1) ... tau_an(T_in)}_delta with
// the built-in vanishing and reduction rules.

#include <compare>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tqc/target.hpp"

namespace tqc {

struct Insertion {
  int a = 0;               // power of the modified psi class
  std::size_t index = 0;   // basis index
  auto operator<=>(const Insertion&) const = default;
};

struct DescendantKey {
  CurveClass delta;
  std::vector<Insertion> ins;  // sorted by (a, index)

  bool operator==(const DescendantKey&) const = default;
  /// Persist order: |delta|, delta, insertion count, insertions.
  bool operator<(const DescendantKey& o) const;
  int degree() const;  // |delta|
};

/// Sorts insertions. Throws DegenerateKey for delta = 0 unless exactly three
/// psi-free insertions; UsageError for a non-effective delta or bad index.
DescendantKey normalize_key(const TargetModel& t, CurveClass delta, std::vector<Insertion> ins);

std::string to_string(const TargetModel& t, const DescendantKey& key);

enum class Provenance { Base, Ingested, Solved };
std::string to_string(Provenance p);

struct RuleSet {
  bool dimension = true;    // R1
  bool fundamental = true;  // R2
  bool three_point = true;  // R3
  bool divisor = true;      // R4: (0, D) with codim D = 1 gives <D, delta>
  bool dilaton = true;      // R5: (1, 1) gives -2
};

struct LookupResult {
  enum class Kind { Zero, Value, Unknown };
  Kind kind = Kind::Zero;
  Rational value;         // Value: the invariant
  Rational factor = 1;    // Unknown: invariant = factor * {missing}
  DescendantKey missing;  // Unknown: reduced key that is not stored
  /// True if a rule (not the table) settled or reduced the key.
  bool by_rule = false;
};

class DescendantTable {
 public:
  struct Entry {
    Rational value;
    Provenance src = Provenance::Base;
  };

  explicit DescendantTable(TargetModel target, RuleSet rules = {});

  const TargetModel& target() const { return *target_; }
  const std::shared_ptr<const TargetModel>& target_ptr() const { return target_; }
  const RuleSet& rules() const { return rules_; }
  void set_rules(const RuleSet& r) { rules_ = r; }

  /// Rules first, then stored entries.
  LookupResult lookup(const DescendantKey& key) const;
  /// Applies R1-R5 only; `missing` holds the irreducible key on Unknown.
  LookupResult reduce(const DescendantKey& key) const;

  /// Stores the entry under its irreducible key. Re-inserting the same value
  /// is a no-op; a conflicting value throws ConsistencyError.
  void insert(const DescendantKey& key, const Rational& value, Provenance src);
  /// Overwrites without checks (test and perturbation use).
  void force(const DescendantKey& key, const Rational& value, Provenance src);
  bool erase(const DescendantKey& key);

  const std::map<DescendantKey, Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::shared_ptr<const TargetModel> target_;
  RuleSet rules_;
  std::map<DescendantKey, Entry> entries_;
};

/// Line format: `delta=1,0 ins=0:h;1:pt val=12 src=solved`; '#' comments.
void ingest(DescendantTable& table, std::istream& in, std::optional<Provenance> override_src = std::nullopt);
void ingest_text(DescendantTable& table, const std::string& text,
                 std::optional<Provenance> override_src = std::nullopt);
void persist(const DescendantTable& table, std::ostream& out);
std::string persist_text(const DescendantTable& table);
std::string format_entry(const TargetModel& t, const DescendantKey& key, const Rational& value, Provenance src);
DescendantKey parse_key(const TargetModel& t, const std::string& delta_text, const std::string& ins_text);

/// Stored invariants may be replaced by solver unknowns: each bound key maps
/// to an Unknown-group variable index.
using UnknownBinding = std::map<DescendantKey, std::size_t>;

struct EvalContext {
  const DescendantTable* table = nullptr;
  const UnknownBinding* unknowns = nullptr;
  VarTablePtr vars;
  TruncationProfile profile;
  /// Unknown keys outside `unknowns` evaluate to 0 instead of failing.
  bool unbound_zero = false;
};

/// Value of one basis-armed key as a scalar polynomial (a constant, or a
/// multiple of a bound unknown). nullopt and `missing` updated if unknown.
std::optional<TruncatedPoly> eval_key(const EvalContext& ctx, const DescendantKey& key,
                                      std::set<DescendantKey>& missing);

struct GeneralInsertion {
  int a = 0;
  CohElement cls;
};

/// Multilinear expansion of general classes over the basis. Identical slots
/// are expanded multinomially. Returns nullopt if any needed key is unknown.
std::optional<TruncatedPoly> multilinear_eval(const EvalContext& ctx, const CurveClass& delta,
                                              const std::vector<GeneralInsertion>& ins,
                                              std::set<DescendantKey>& missing);

/// All normalized keys of the given shape with a <= max_a that survive R1.
std::vector<DescendantKey> dimension_candidates(const TargetModel& t, const CurveClass& delta, int n_marks,
                                                int max_a);

}  // namespace tqc
