#include "tqc/poly.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace tqc {

// ---------------------------------------------------------------------------
// Rational

Rational parse_rational(std::string_view text) {
  std::string s(text);
  auto trim = [](std::string& t) {
    auto notsp = [](unsigned char c) { return !std::isspace(c); };
    t.erase(t.begin(), std::find_if(t.begin(), t.end(), notsp));
    t.erase(std::find_if(t.rbegin(), t.rend(), notsp).base(), t.end());
  };
  trim(s);
  auto valid_int = [](std::string_view t, bool allow_sign) {
    std::size_t i = 0;
    if (allow_sign && !t.empty() && (t[0] == '-' || t[0] == '+')) ++i;
    if (i >= t.size()) return false;
    for (; i < t.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(t[i]))) return false;
    return true;
  };
  auto slash = s.find('/');
  std::string num = s.substr(0, slash);
  std::string den = slash == std::string::npos ? "1" : s.substr(slash + 1);
  if (!valid_int(num, true) || !valid_int(den, false))
    throw ParseError("malformed rational '" + s + "'");
  if (num[0] == '+') num.erase(0, 1);
  mpz_class n(num, 10), d(den, 10);
  if (d == 0) throw ParseError("zero denominator in rational '" + s + "'");
  Rational r(n, d);
  r.canonicalize();
  return r;
}

std::string to_string(const Rational& value) {
  if (value.get_den() == 1) return value.get_num().get_str();
  return value.get_num().get_str() + "/" + value.get_den().get_str();
}

// ---------------------------------------------------------------------------
// VariableTable

std::shared_ptr<const VariableTable> VariableTable::make(int curve_rank,
                                                         std::vector<std::string> params,
                                                         int unknowns) {
  std::vector<Variable> vars;
  for (int c = 0; c < curve_rank; ++c) {
    std::string name = curve_rank == 1 ? "q" : "q" + std::to_string(c + 1);
    vars.push_back({name, VarGroup::Novikov, c});
  }
  vars.push_back({"z", VarGroup::Z, -1});
  for (auto& p : params) vars.push_back({std::move(p), VarGroup::Param, -1});
  for (int u = 0; u < unknowns; ++u) vars.push_back({"u" + std::to_string(u), VarGroup::Unknown, -1});
  return from_variables(std::move(vars));
}

std::shared_ptr<const VariableTable> VariableTable::from_variables(std::vector<Variable> vars) {
  if (vars.size() > kMaxVariables)
    throw UsageError("too many variables (" + std::to_string(vars.size()) + " > " +
                     std::to_string(kMaxVariables) + ")");
  auto table = std::make_shared<VariableTable>();
  int zcount = 0;
  std::vector<int> components;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    const auto& v = vars[i];
    if (v.name.empty()) throw UsageError("empty variable name");
    for (std::size_t j = 0; j < i; ++j)
      if (vars[j].name == v.name) throw UsageError("duplicate variable name '" + v.name + "'");
    switch (v.group) {
      case VarGroup::Z:
        ++zcount;
        table->z_index_ = i;
        break;
      case VarGroup::Novikov:
        components.push_back(v.component);
        table->novikov_.push_back(i);
        break;
      case VarGroup::Param:
        table->params_.push_back(i);
        break;
      case VarGroup::Unknown:
        table->unknowns_.push_back(i);
        break;
    }
  }
  if (components.size() > 8) throw UsageError("curve rank above 8 is not supported");
  if (zcount != 1 || vars[table->z_index_].name != "z")
    throw UsageError("a variable table needs exactly one z variable named 'z'");
  for (std::size_t c = 0; c < components.size(); ++c)
    if (components[c] != static_cast<int>(c))
      throw UsageError("Novikov variables must cover components 0..k-1 in order");
  table->vars_ = std::move(vars);
  return table;
}

std::optional<std::size_t> VariableTable::find(std::string_view name) const {
  for (std::size_t i = 0; i < vars_.size(); ++i)
    if (vars_[i].name == name) return i;
  return std::nullopt;
}

std::size_t VariableTable::index_of(std::string_view name) const {
  auto i = find(name);
  if (!i) throw UsageError("unknown variable '" + std::string(name) + "'");
  return *i;
}

bool VariableTable::operator==(const VariableTable& other) const {
  if (vars_.size() != other.vars_.size()) return false;
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    const auto& a = vars_[i];
    const auto& b = other.vars_[i];
    if (a.name != b.name || a.group != b.group || a.component != b.component) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Monomial

int Monomial::total_degree() const {
  int d = 0;
  for (auto e : exps) d += e;
  return d;
}

bool Monomial::is_one() const {
  return std::all_of(exps.begin(), exps.end(), [](std::uint8_t e) { return e == 0; });
}

std::size_t MonomialHash::operator()(const Monomial& m) const noexcept {
  std::size_t h = 1469598103934665603ull;
  for (auto e : m.exps) {
    h ^= e;
    h *= 1099511628211ull;
  }
  return h;
}

bool GradedLexLess::operator()(const Monomial& a, const Monomial& b) const {
  int da = a.total_degree(), db = b.total_degree();
  if (da != db) return da < db;
  for (std::size_t i = 0; i < kMaxVariables; ++i)
    if (a.exps[i] != b.exps[i]) return a.exps[i] > b.exps[i];
  return false;
}

// ---------------------------------------------------------------------------
// TruncationProfile

TruncationProfile TruncationProfile::meet(const TruncationProfile& a, const TruncationProfile& b) {
  if (a.q_caps.size() != b.q_caps.size()) throw UsageError("profiles of different curve rank");
  TruncationProfile out;
  out.q_caps.resize(a.q_caps.size());
  for (std::size_t i = 0; i < a.q_caps.size(); ++i) out.q_caps[i] = std::min(a.q_caps[i], b.q_caps[i]);
  auto opt_min = [](std::optional<int> x, std::optional<int> y) -> std::optional<int> {
    if (!x) return y;
    if (!y) return x;
    return std::min(*x, *y);
  };
  out.q_total_cap = opt_min(a.q_total_cap, b.q_total_cap);
  out.z_cap = std::min(a.z_cap, b.z_cap);
  out.param_cap = opt_min(a.param_cap, b.param_cap);
  return out;
}

bool TruncationProfile::no_looser_than(const TruncationProfile& other) const {
  if (q_caps.size() != other.q_caps.size()) return false;
  for (std::size_t i = 0; i < q_caps.size(); ++i)
    if (q_caps[i] > other.q_caps[i]) return false;
  if (z_cap > other.z_cap) return false;
  if (other.q_total_cap && (!q_total_cap || *q_total_cap > *other.q_total_cap)) return false;
  if (other.param_cap && (!param_cap || *param_cap > *other.param_cap)) return false;
  return true;
}

bool TruncationProfile::admits(const Monomial& m, const VariableTable& vars) const {
  int qtotal = 0, ptotal = 0, utotal = 0;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    int e = m.exps[i];
    if (e == 0) continue;
    const auto& v = vars[i];
    switch (v.group) {
      case VarGroup::Novikov:
        if (e > q_caps[v.component]) return false;
        qtotal += e;
        break;
      case VarGroup::Z:
        if (e > z_cap) return false;
        break;
      case VarGroup::Param:
        ptotal += e;
        break;
      case VarGroup::Unknown:
        utotal += e;
        break;
    }
  }
  if (q_total_cap && qtotal > *q_total_cap) return false;
  if (param_cap && ptotal > *param_cap) return false;
  return utotal <= 1;
}

namespace {

// Per-(profile, table) admission test without the group switch.
struct Admission {
  std::array<std::int16_t, kMaxVariables> cap{};   // per-variable cap, -1 = unbounded
  std::array<std::uint8_t, kMaxVariables> group{}; // 0 none, 1 q, 2 param, 3 unknown
  std::size_t n = 0;
  int q_total = -1, p_total = -1;

  Admission(const TruncationProfile& prof, const VariableTable& vars) : n(vars.size()) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto& v = vars[i];
      switch (v.group) {
        case VarGroup::Novikov:
          cap[i] = static_cast<std::int16_t>(prof.q_caps.at(v.component));
          group[i] = 1;
          break;
        case VarGroup::Z:
          cap[i] = static_cast<std::int16_t>(prof.z_cap);
          break;
        case VarGroup::Param:
          cap[i] = -1;
          group[i] = 2;
          break;
        case VarGroup::Unknown:
          cap[i] = 1;
          group[i] = 3;
          break;
      }
    }
    if (prof.q_total_cap) q_total = *prof.q_total_cap;
    if (prof.param_cap) p_total = *prof.param_cap;
  }

  // Writes a+b into out; false if outside the profile.
  bool combine(const Monomial& a, const Monomial& b, Monomial& out) const {
    int qt = 0, pt = 0, ut = 0;
    for (std::size_t i = 0; i < n; ++i) {
      int e = a.exps[i] + b.exps[i];
      if (cap[i] >= 0 && e > cap[i]) return false;
      if (e > kMaxExponent) throw UsageError("exponent overflow in polynomial product");
      out.exps[i] = static_cast<std::uint8_t>(e);
      if (group[i] == 1) qt += e;
      else if (group[i] == 2) pt += e;
      else if (group[i] == 3) ut += e;
    }
    if (q_total >= 0 && qt > q_total) return false;
    if (p_total >= 0 && pt > p_total) return false;
    return ut <= 1;
  }
};

void check_profile_shape(const TruncationProfile& p, const VariableTable& vars) {
  if (static_cast<int>(p.q_caps.size()) != vars.curve_rank())
    throw UsageError("profile q caps do not match the curve rank of the variable table");
  auto neg = [](int c) { return c < 0; };
  if (std::any_of(p.q_caps.begin(), p.q_caps.end(), neg) || p.z_cap < 0 ||
      (p.param_cap && *p.param_cap < 0) || (p.q_total_cap && *p.q_total_cap < 0))
    throw UsageError("truncation caps must be nonnegative");
}

}  // namespace

// ---------------------------------------------------------------------------
// TruncatedPoly

TruncatedPoly::TruncatedPoly(VarTablePtr vars, TruncationProfile profile)
    : vars_(std::move(vars)), profile_(std::move(profile)) {
  if (!vars_) throw UsageError("null variable table");
  check_profile_shape(profile_, *vars_);
}

TruncatedPoly TruncatedPoly::constant(VarTablePtr vars, TruncationProfile profile, const Rational& c) {
  TruncatedPoly p(std::move(vars), std::move(profile));
  if (c != 0) {
    p.terms_.emplace_back(Monomial{}, c);
    p.terms_.back().second.canonicalize();
  }
  return p;
}

TruncatedPoly TruncatedPoly::variable(VarTablePtr vars, TruncationProfile profile, std::size_t index,
                                      int power) {
  Monomial m;
  if (index >= vars->size()) throw UsageError("variable index out of range");
  if (power < 0 || power > kMaxExponent) throw UsageError("bad variable power");
  m.exps[index] = static_cast<std::uint8_t>(power);
  return monomial(std::move(vars), std::move(profile), m, Rational(1));
}

TruncatedPoly TruncatedPoly::monomial(VarTablePtr vars, TruncationProfile profile, const Monomial& m,
                                      const Rational& c) {
  TruncatedPoly p(std::move(vars), std::move(profile));
  if (c != 0 && p.profile_.admits(m, *p.vars_)) {
    p.terms_.emplace_back(m, c);
    p.terms_.back().second.canonicalize();
  }
  return p;
}

TruncatedPoly TruncatedPoly::from_terms(VarTablePtr vars, TruncationProfile profile,
                                        std::vector<Term> terms) {
  TruncatedPoly p(std::move(vars), std::move(profile));
  std::unordered_map<Monomial, Rational, MonomialHash> acc;
  for (auto& [m, c] : terms) {
    if (!p.profile_.admits(m, *p.vars_)) continue;
    auto [it, inserted] = acc.try_emplace(m, c);
    if (!inserted) it->second += c;
  }
  for (auto& [m, c] : acc) {
    c.canonicalize();
    if (c != 0) p.terms_.emplace_back(m, std::move(c));
  }
  std::sort(p.terms_.begin(), p.terms_.end(),
            [](const Term& a, const Term& b) { return GradedLexLess{}(a.first, b.first); });
  return p;
}

bool TruncatedPoly::is_constant() const {
  return terms_.empty() || (terms_.size() == 1 && terms_[0].first.is_one());
}

Rational TruncatedPoly::constant_term() const {
  if (!terms_.empty() && terms_[0].first.is_one()) return terms_[0].second;
  return Rational(0);
}

Rational TruncatedPoly::coefficient(const Monomial& m) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), m,
                             [](const Term& t, const Monomial& x) { return GradedLexLess{}(t.first, x); });
  if (it != terms_.end() && it->first == m) return it->second;
  return Rational(0);
}

void TruncatedPoly::check_compatible(const TruncatedPoly& other) const {
  if (vars_ != other.vars_ && !(*vars_ == *other.vars_))
    throw UsageError("polynomials over different variable tables");
}

namespace {

std::vector<Term> merge_terms(const std::vector<Term>& a, std::span<const Term> b, int sign,
                              const TruncationProfile& prof, const VariableTable& vars, bool recheck_a,
                              bool recheck_b) {
  std::vector<Term> out;
  out.reserve(a.size() + b.size());
  GradedLexLess less;
  std::size_t i = 0, j = 0;
  auto push = [&](const Monomial& m, Rational c, bool recheck) {
    if (c == 0) return;
    if (recheck && !prof.admits(m, vars)) return;
    out.emplace_back(m, std::move(c));
  };
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && less(a[i].first, b[j].first))) {
      push(a[i].first, a[i].second, recheck_a);
      ++i;
    } else if (i == a.size() || less(b[j].first, a[i].first)) {
      push(b[j].first, sign > 0 ? b[j].second : Rational(-b[j].second), recheck_b);
      ++j;
    } else {
      Rational c = sign > 0 ? Rational(a[i].second + b[j].second) : Rational(a[i].second - b[j].second);
      push(a[i].first, std::move(c), recheck_a || recheck_b);
      ++i;
      ++j;
    }
  }
  return out;
}

}  // namespace

TruncatedPoly& TruncatedPoly::operator+=(const TruncatedPoly& other) {
  check_compatible(other);
  auto prof = TruncationProfile::meet(profile_, other.profile_);
  bool ra = !(prof == profile_), rb = !(prof == other.profile_);
  terms_ = merge_terms(terms_, other.terms_, +1, prof, *vars_, ra, rb);
  profile_ = std::move(prof);
  return *this;
}

TruncatedPoly& TruncatedPoly::operator-=(const TruncatedPoly& other) {
  check_compatible(other);
  auto prof = TruncationProfile::meet(profile_, other.profile_);
  bool ra = !(prof == profile_), rb = !(prof == other.profile_);
  terms_ = merge_terms(terms_, other.terms_, -1, prof, *vars_, ra, rb);
  profile_ = std::move(prof);
  return *this;
}

TruncatedPoly& TruncatedPoly::operator*=(const Rational& c) {
  if (c == 0) {
    terms_.clear();
    return *this;
  }
  Rational k = c;
  k.canonicalize();
  for (auto& t : terms_) t.second *= k;
  return *this;
}

TruncatedPoly operator*(const TruncatedPoly& a, const TruncatedPoly& b) {
  a.check_compatible(b);
  auto prof = TruncationProfile::meet(a.profile_, b.profile_);
  TruncatedPoly out(a.vars_, prof);
  if (a.is_zero() || b.is_zero()) return out;
  const auto& vars = *a.vars_;
  Admission adm(prof, vars);

  if (a.terms_.size() == 1 && a.terms_[0].first.is_one()) {
    out = b;
    out.profile_ = prof;
    if (!(prof == b.profile_)) out = truncate(b, prof);
    out *= a.terms_[0].second;
    return out;
  }

  // Group b by its Novikov part so q-infeasible blocks are skipped wholesale.
  const auto rank = static_cast<std::size_t>(vars.curve_rank());
  auto qpart_less = [&](const Term& x, const Term& y) {
    for (std::size_t c = 0; c < rank; ++c) {
      auto i = vars.novikov_index(static_cast<int>(c));
      if (x.first.exps[i] != y.first.exps[i]) return x.first.exps[i] < y.first.exps[i];
    }
    return false;
  };
  std::vector<const Term*> bsorted;
  bsorted.reserve(b.terms_.size());
  for (const auto& t : b.terms_) bsorted.push_back(&t);
  std::stable_sort(bsorted.begin(), bsorted.end(), [&](const Term* x, const Term* y) { return qpart_less(*x, *y); });
  struct Block {
    std::size_t begin, end;
    std::array<std::uint8_t, 8> q{};
    int qsum = 0;
  };
  std::vector<Block> blocks;
  for (std::size_t k = 0; k < bsorted.size();) {
    std::size_t e = k + 1;
    while (e < bsorted.size() && !qpart_less(*bsorted[k], *bsorted[e]) && !qpart_less(*bsorted[e], *bsorted[k])) ++e;
    Block blk{k, e};
    for (std::size_t c = 0; c < rank && c < 8; ++c) {
      blk.q[c] = bsorted[k]->first.exps[vars.novikov_index(static_cast<int>(c))];
      blk.qsum += blk.q[c];
    }
    blocks.push_back(blk);
    k = e;
  }

  std::unordered_map<Monomial, Rational, MonomialHash> acc;
  acc.reserve(a.terms_.size() + b.terms_.size());
  Monomial prod;
  mpq_class tmp;
  for (const auto& ta : a.terms_) {
    int aqsum = 0;
    std::array<int, 8> aq{};
    for (std::size_t c = 0; c < rank && c < 8; ++c) {
      aq[c] = ta.first.exps[vars.novikov_index(static_cast<int>(c))];
      aqsum += aq[c];
    }
    for (const auto& blk : blocks) {
      bool ok = true;
      for (std::size_t c = 0; c < rank && c < 8; ++c)
        if (aq[c] + blk.q[c] > prof.q_caps[c]) {
          ok = false;
          break;
        }
      if (!ok || (prof.q_total_cap && aqsum + blk.qsum > *prof.q_total_cap)) continue;
      for (std::size_t k = blk.begin; k < blk.end; ++k) {
        const Term& tb = *bsorted[k];
        if (!adm.combine(ta.first, tb.first, prod)) continue;
        mpq_mul(tmp.get_mpq_t(), ta.second.get_mpq_t(), tb.second.get_mpq_t());
        auto [it, inserted] = acc.try_emplace(prod, tmp);
        if (!inserted) it->second += tmp;
      }
    }
  }
  out.terms_.reserve(acc.size());
  for (auto& [m, c] : acc)
    if (c != 0) out.terms_.emplace_back(m, std::move(c));
  std::sort(out.terms_.begin(), out.terms_.end(),
            [](const Term& x, const Term& y) { return GradedLexLess{}(x.first, y.first); });
  return out;
}

bool TruncatedPoly::operator==(const TruncatedPoly& other) const {
  if (!(*vars_ == *other.vars_)) return false;
  if (terms_.size() != other.terms_.size()) return false;
  for (std::size_t i = 0; i < terms_.size(); ++i)
    if (!(terms_[i].first == other.terms_[i].first) || terms_[i].second != other.terms_[i].second) return false;
  return true;
}

bool TruncatedPoly::invariants_hold() const {
  GradedLexLess less;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (terms_[i].second == 0) return false;
    if (!profile_.admits(terms_[i].first, *vars_)) return false;
    if (i > 0 && !less(terms_[i - 1].first, terms_[i].first)) return false;
  }
  return true;
}

TruncatedPoly add(const TruncatedPoly& a, const TruncatedPoly& b) { return a + b; }
TruncatedPoly mul(const TruncatedPoly& a, const TruncatedPoly& b) { return a * b; }

TruncatedPoly truncate(const TruncatedPoly& p, const TruncationProfile& profile) {
  if (!profile.no_looser_than(p.profile()))
    throw UsageError("truncate: requested profile is looser than the polynomial's profile");
  std::vector<Term> kept;
  for (const auto& t : p.terms())
    if (profile.admits(t.first, *p.vars())) kept.push_back(t);
  return TruncatedPoly::from_terms(p.vars(), profile, std::move(kept));
}

TruncatedPoly exp_series(const TruncatedPoly& p) {
  if (p.constant_term() != 0)
    throw NonTerminatingSeries("exp_series: nonzero constant term");
  const auto& vars = *p.vars();
  for (const auto& [m, c] : p.terms()) {
    bool capped = false;
    for (std::size_t i = 0; i < vars.size() && !capped; ++i) {
      if (m.exps[i] == 0) continue;
      capped = vars[i].group != VarGroup::Param || p.profile().param_cap.has_value();
    }
    if (!capped)
      throw NonTerminatingSeries("exp_series: term " + monomial_to_string(m, vars) +
                                 " involves only uncapped variables");
  }
  TruncatedPoly sum = p.constant_like(1);
  TruncatedPoly power = sum;
  for (int m = 1; !power.is_zero(); ++m) {
    power = power * p;
    power *= Rational(1, m);
    sum += power;
  }
  return sum;
}

TruncatedPoly derivative(const TruncatedPoly& p, std::size_t var, int times) {
  if (var >= p.vars()->size()) throw UsageError("derivative: variable index out of range");
  std::vector<Term> out;
  for (const auto& [m, c] : p.terms()) {
    int e = m.exps[var];
    if (e < times) continue;
    Rational f = c;
    for (int k = 0; k < times; ++k) f *= (e - k);
    Monomial n = m;
    n.exps[var] = static_cast<std::uint8_t>(e - times);
    out.emplace_back(n, f);
  }
  return TruncatedPoly::from_terms(p.vars(), p.profile(), std::move(out));
}

TruncatedPoly coefficient_of(const TruncatedPoly& p, std::size_t var, int power) {
  std::vector<Term> out;
  for (const auto& [m, c] : p.terms()) {
    if (m.exps[var] != power) continue;
    Monomial n = m;
    n.exps[var] = 0;
    out.emplace_back(n, c);
  }
  return TruncatedPoly::from_terms(p.vars(), p.profile(), std::move(out));
}

TruncatedPoly substitute(const TruncatedPoly& p, std::size_t var, const TruncatedPoly& value) {
  if (!(*p.vars() == *value.vars())) throw UsageError("substitute: variable tables differ");
  auto prof = TruncationProfile::meet(p.profile(), value.profile());
  int maxe = 0;
  for (const auto& t : p.terms()) maxe = std::max<int>(maxe, t.first.exps[var]);
  std::vector<std::vector<Term>> by_power(maxe + 1);
  for (const auto& [m, c] : p.terms()) {
    Monomial n = m;
    n.exps[var] = 0;
    by_power[m.exps[var]].emplace_back(n, c);
  }
  TruncatedPoly result(p.vars(), prof);
  TruncatedPoly power = TruncatedPoly::constant(p.vars(), prof, 1);
  for (int e = 0; e <= maxe; ++e) {
    if (e > 0) power = power * value;
    if (!by_power[e].empty())
      result += TruncatedPoly::from_terms(p.vars(), prof, by_power[e]) * power;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Text

std::string monomial_to_string(const Monomial& m, const VariableTable& vars) {
  std::string out;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (m.exps[i] == 0) continue;
    if (!out.empty()) out += '*';
    out += vars[i].name;
    if (m.exps[i] > 1) out += "^" + std::to_string(m.exps[i]);
  }
  return out;
}

std::string to_string(const TruncatedPoly& p) {
  if (p.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [m, c] : p.terms()) {
    Rational a = abs(c);
    bool neg = c < 0;
    if (first) {
      if (neg) out += "-";
    } else {
      out += neg ? " - " : " + ";
    }
    first = false;
    std::string mono = monomial_to_string(m, *p.vars());
    if (mono.empty()) {
      out += to_string(a);
    } else {
      if (a != 1) out += to_string(a) + "*";
      out += mono;
    }
  }
  return out;
}

namespace {

class PolyParser {
 public:
  PolyParser(std::string_view s, const VariableTable& vars) : s_(s), vars_(vars) {}

  std::vector<Term> parse() {
    std::vector<Term> terms;
    skip();
    if (pos_ == s_.size()) throw ParseError("empty polynomial");
    bool first = true;
    while (true) {
      skip();
      if (pos_ == s_.size()) break;
      int sign = 1;
      if (s_[pos_] == '+' || s_[pos_] == '-') {
        sign = s_[pos_] == '-' ? -1 : 1;
        ++pos_;
        skip();
      } else if (!first) {
        fail("expected '+' or '-'");
      }
      first = false;
      terms.push_back(term(sign));
    }
    return terms;
  }

 private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  [[noreturn]] void fail(const std::string& what) {
    throw ParseError("polynomial parse error at column " + std::to_string(pos_ + 1) + ": " + what);
  }
  Term term(int sign) {
    Rational coeff(sign);
    Monomial m;
    bool have_factor = false;
    while (true) {
      skip();
      if (pos_ >= s_.size()) fail("expected factor");
      char c = s_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '/')) ++pos_;
        coeff *= parse_rational(s_.substr(start, pos_ - start));
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
        auto name = s_.substr(start, pos_ - start);
        auto idx = vars_.find(name);
        if (!idx) fail("unknown variable '" + std::string(name) + "'");
        int e = 1;
        skip();
        if (pos_ < s_.size() && s_[pos_] == '^') {
          ++pos_;
          skip();
          std::size_t es = pos_;
          while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
          if (es == pos_) fail("expected exponent");
          e = std::stoi(std::string(s_.substr(es, pos_ - es)));
        }
        int total = m.exps[*idx] + e;
        if (total > kMaxExponent) fail("exponent too large");
        m.exps[*idx] = static_cast<std::uint8_t>(total);
      } else {
        fail(std::string("unexpected character '") + c + "'");
      }
      have_factor = true;
      skip();
      if (pos_ < s_.size() && s_[pos_] == '*') {
        ++pos_;
        continue;
      }
      break;
    }
    if (!have_factor) fail("empty term");
    return {m, coeff};
  }

  std::string_view s_;
  const VariableTable& vars_;
  std::size_t pos_ = 0;
};

}  // namespace

TruncatedPoly parse_poly(std::string_view text, VarTablePtr vars, TruncationProfile profile) {
  PolyParser parser(text, *vars);
  auto terms = parser.parse();
  return TruncatedPoly::from_terms(std::move(vars), std::move(profile), std::move(terms));
}

}  // namespace tqc
