#include "tqc/wdvv.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <sstream>
#include <tuple>

#include "tqc/reconstruct.hpp"

namespace tqc {

CohElement assoc_residual(const TargetModel& t, const ProductTable& table, std::size_t i, std::size_t j,
                          std::size_t k) {
  const auto& m = table.m;
  CohElement r = CohElement::zero(t, m[0][0][0].vars(), m[0][0][0].profile());
  for (std::size_t l = 0; l < t.size(); ++l) {
    if (!m[i][j][l].is_zero()) r += m[l][k] * m[i][j][l];
    if (!m[j][k][l].is_zero()) r -= m[i][l] * m[j][k][l];
  }
  return r;
}

Residual assoc_residual(const EvalContext& ctx, const DeformingElement& chi, const CohElement& alpha,
                        const CohElement& beta, const CohElement& gamma) {
  const TargetModel& t = ctx.table->target();
  Residual out;
  auto tab = product_table(ctx, chi);
  if (!tab.known()) {
    out.missing = std::move(tab.missing);
    return out;
  }
  out.value = contact_series(t, tab, contact_series(t, tab, alpha, beta), gamma) -
              contact_series(t, tab, alpha, contact_series(t, tab, beta, gamma));
  return out;
}

std::optional<int> leading_q_degree(const CohElement& a) {
  std::optional<int> best;
  for (const auto& c : a.coeffs) {
    if (c.is_zero()) continue;
    const auto& vars = *c.vars();
    for (const auto& term : c.terms()) {
      int q = 0;
      for (int r = 0; r < vars.curve_rank(); ++r) q += term.first[vars.novikov_index(r)];
      if (!best || q < *best) best = q;
    }
  }
  return best;
}

ChiSpec parse_chi_spec(const TargetModel& t, const std::string& text) {
  ChiSpec spec;
  if (text == "zero") return spec;
  if (text == "symbolic") {
    spec.kind = ChiSpec::Kind::Symbolic;
    return spec;
  }
  if (text.rfind("random:", 0) == 0) {
    spec.kind = ChiSpec::Kind::Random;
    try {
      std::size_t used = 0;
      spec.seed = std::stoull(text.substr(7), &used);
      if (used != text.size() - 7) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw UsageError("chi: bad seed in '" + text + "'");
    }
    return spec;
  }
  spec.kind = ChiSpec::Kind::Explicit;
  std::size_t start = 0;
  while (true) {
    auto end = text.find(';', start);
    spec.values.push_back(parse_basis_expr(t, text.substr(start, end == std::string::npos ? end : end - start)));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return spec;
}

VarTablePtr chi_variables(const TargetModel& t, const ChiSpec& spec, int d, int unknowns) {
  std::vector<std::string> params;
  if (spec.kind == ChiSpec::Kind::Symbolic) params = symbolic_parameter_names(t, d);
  return VariableTable::make(t.curve_rank(), std::move(params), unknowns);
}

DeformingElement make_deforming(const TargetModel& t, const ChiSpec& spec, int d, const VarTablePtr& vars,
                                const TruncationProfile& pr) {
  switch (spec.kind) {
    case ChiSpec::Kind::Zero:
      return zero_deforming(t, vars, pr, d);
    case ChiSpec::Kind::Random:
      return random_deforming(t, vars, pr, d, spec.seed);
    case ChiSpec::Kind::Symbolic:
      return symbolic_deforming(t, vars, pr, d);
    case ChiSpec::Kind::Explicit:
      break;
  }
  if (d < 0 || spec.values.size() != static_cast<std::size_t>(d) + 1)
    throw UsageError("deforming element: d must be >= 0 with a chi list of length d+1");
  DeformingElement chi;
  for (const auto& v : spec.values) chi.chis.push_back(from_rationals(t, vars, pr, v));
  return chi;
}

bool VerifyReport::passed() const {
  if (!complete() || checks.empty()) return false;
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

std::optional<int> VerifyReport::leading_q_degree() const {
  std::optional<int> best;
  for (const auto& c : checks)
    if (!c.pass && c.leading_q_degree && (!best || *c.leading_q_degree < *best)) best = c.leading_q_degree;
  return best;
}

namespace {

std::string clip(std::string s) {
  if (s.size() > 400) s = s.substr(0, 400) + " ...";
  return s;
}

CheckResult check_zero(const TargetModel& t, std::string name, const CohElement& residual) {
  CheckResult c;
  c.name = std::move(name);
  c.pass = residual.is_zero();
  if (!c.pass) {
    c.detail = clip(to_string(t, residual));
    c.leading_q_degree = leading_q_degree(residual);
  }
  return c;
}

}  // namespace

VerifyReport verify_suite(const DescendantTable& table, int d, const TruncationProfile& profile,
                          const ChiSpec& spec) {
  const TargetModel& t = table.target();
  auto vars = chi_variables(t, spec, d);
  EvalContext ctx{&table, nullptr, vars, profile};
  auto chi = make_deforming(t, spec, d, vars, profile);
  validate(t, chi);
  VerifyReport rep;
  auto tab = product_table(ctx, chi);
  if (!tab.known()) {
    rep.missing = std::move(tab.missing);
    return rep;
  }
  const std::size_t n = t.size();
  auto T = [&](std::size_t i) { return CohElement::basis(t, vars, profile, i); };
  for (std::size_t i = 0; i < n; ++i)
    rep.checks.push_back(check_zero(t, "identity 1*" + t.basis(i).name, tab.m[0][i] - T(i)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      auto ab = basis_bullet(ctx, chi, i, j), ba = basis_bullet(ctx, chi, j, i);
      rep.checks.push_back(check_zero(t, "commutativity " + t.basis(i).name + "," + t.basis(j).name,
                                      *ab.value - *ba.value));
    }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        rep.checks.push_back(check_zero(
            t, "associativity " + t.basis(i).name + "," + t.basis(j).name + "," + t.basis(k).name,
            assoc_residual(t, tab, i, j, k)));
  return rep;
}

namespace {

using Exps = std::array<std::uint8_t, kMaxVariables>;
using RowKey = std::tuple<int, int, int, Exps>;  // spec, triple, component, monomial

struct Row {
  Rational c;
  std::map<std::size_t, Rational> coef;
};

struct Harvest {
  int d = 0;
  TruncationProfile profile;
  std::vector<ChiSpec> specs;
};

std::vector<std::array<std::size_t, 3>> reduced_triples(const TargetModel& t) {
  std::vector<std::array<std::size_t, 3>> out;
  for (std::size_t i = 1; i < t.size(); ++i)
    for (std::size_t j = 1; j < t.size(); ++j)
      for (std::size_t k = i; k < t.size(); ++k) out.push_back({i, j, k});
  return out;
}

class LevelSolver {
 public:
  LevelSolver(DescendantTable& table, const SolveOptions& opt, SolveReport& rep)
      : table_(table), t_(table.target()), opt_(opt), rep_(rep), psi_(table) {}

  void run(const Harvest& h, int level) {
    auto missing = dry_run(h);
    if (opt_.psi == PsiMode::Before && fill(missing)) missing = dry_run(h);
    check_lower(missing, level);
    std::vector<DescendantKey> unknowns(missing.begin(), missing.end());
    harvest(h, unknowns);
    auto free = eliminate(unknowns);
    if (!free.empty() && opt_.psi == PsiMode::After) {
      std::set<DescendantKey> pending(free.begin(), free.end());
      if (fill(pending)) {
        missing = dry_run(h);
        unknowns.assign(missing.begin(), missing.end());
        harvest(h, unknowns);
        free = eliminate(unknowns);
      }
    }
    if (!free.empty()) {
      std::string names;
      for (std::size_t f = 0; f < free.size() && f < 5; ++f) names += (f ? ", " : "") + to_string(t_, free[f]);
      if (free.size() > 5) names += ", ...";
      throw Underdetermined("solve: " + std::to_string(free.size()) + " keys not determined: " + names, free);
    }
  }

 private:
  std::set<DescendantKey> dry_run(const Harvest& h) {
    std::set<DescendantKey> missing;
    for (const auto& spec : h.specs) {
      auto vars = chi_variables(t_, spec, h.d);
      EvalContext ctx{&table_, nullptr, vars, h.profile};
      auto chi = make_deforming(t_, spec, h.d, vars, h.profile);
      auto tab = product_table(ctx, chi);
      missing.insert(tab.missing.begin(), tab.missing.end());
    }
    return missing;
  }

  void harvest(const Harvest& h, const std::vector<DescendantKey>& unknowns) {
    rows_.clear();
    auto triples = reduced_triples(t_);
    int fixed = t_.curve_rank() + 1;
    if (!h.specs.empty() && h.specs.front().kind == ChiSpec::Kind::Symbolic)
      fixed += static_cast<int>(symbolic_parameter_names(t_, h.d).size());
    int batch = static_cast<int>(kMaxVariables) - fixed;
    if (batch < 1) throw UsageError("solve: no variable slots left for unknowns");
    for (std::size_t start = 0; start == 0 || start < unknowns.size(); start += batch) {
      std::size_t nb = std::min<std::size_t>(batch, unknowns.size() - start);
      UnknownBinding bind;
      for (std::size_t s = 0; s < h.specs.size(); ++s) {
        auto vars = chi_variables(t_, h.specs[s], h.d, static_cast<int>(nb));
        auto uidx = vars->unknown_indices();
        for (std::size_t u = 0; u < nb; ++u) bind[unknowns[start + u]] = uidx[u];
        EvalContext ctx{&table_, &bind, vars, h.profile, true};
        auto chi = make_deforming(t_, h.specs[s], h.d, vars, h.profile);
        auto tab = product_table(ctx, chi);
        for (std::size_t tr = 0; tr < triples.size(); ++tr) {
          auto [i, j, k] = triples[tr];
          auto res = assoc_residual(t_, tab, i, j, k);
          for (std::size_t c = 0; c < res.size(); ++c)
            for (const auto& [mono, coeff] : res[c].terms()) {
              Exps e = mono.exps;
              std::optional<std::size_t> col;
              for (std::size_t u = 0; u < nb; ++u)
                if (e[uidx[u]]) {
                  col = start + u;
                  e[uidx[u]] = 0;
                }
              Row& row = rows_[{static_cast<int>(s), static_cast<int>(tr), static_cast<int>(c), e}];
              if (col)
                row.coef[*col] += coeff;
              else if (start == 0)
                row.c += coeff;
            }
        }
      }
    }
  }

  std::string row_text(const Row& r, const std::vector<DescendantKey>& unknowns) const {
    std::ostringstream os;
    os << to_string(r.c);
    for (const auto& [col, a] : r.coef) os << " + (" << to_string(a) << ")*" << to_string(t_, unknowns[col]);
    os << " = 0";
    return os.str();
  }

  std::vector<DescendantKey> eliminate(const std::vector<DescendantKey>& unknowns) {
    std::map<std::size_t, Row> pivots;
    std::vector<std::size_t> uses(unknowns.size(), 0), redundant(unknowns.size(), 0);
    for (auto& [rk, row] : rows_) {
      for (auto it = row.coef.begin(); it != row.coef.end();) it = it->second == 0 ? row.coef.erase(it) : ++it;
      if (row.coef.empty() && row.c == 0) continue;
      std::vector<std::size_t> cols;
      for (const auto& [col, a] : row.coef) cols.push_back(col), ++uses[col];
      Row r = row;
      auto it = r.coef.begin();
      while (it != r.coef.end()) {
        auto p = pivots.find(it->first);
        if (p == pivots.end()) {
          ++it;
          continue;
        }
        std::size_t col = it->first;
        Rational f = it->second;
        r.c -= f * p->second.c;
        for (const auto& [pc, pa] : p->second.coef) {
          Rational& x = r.coef[pc];
          x -= f * pa;
        }
        for (auto jt = r.coef.begin(); jt != r.coef.end();) jt = jt->second == 0 ? r.coef.erase(jt) : ++jt;
        it = r.coef.upper_bound(col);
      }
      if (r.coef.empty()) {
        if (r.c != 0) {
          auto text = row_text(row, unknowns);
          const auto& [s, tr, comp, e] = rk;
          throw InconsistentSystem("solve: inconsistent equation (chi " + std::to_string(s) + ", triple " +
                                       std::to_string(tr) + ", component " + t_.basis(comp).name + "): " + text,
                                   text);
        }
        for (auto col : cols) ++redundant[col];
        continue;
      }
      Rational lead = r.coef.begin()->second;
      r.c /= lead;
      for (auto& [c, a] : r.coef) a /= lead;
      pivots.emplace(r.coef.begin()->first, std::move(r));
    }
    // back substitution, highest column first
    std::vector<std::optional<Rational>> value(unknowns.size());
    for (auto it = pivots.rbegin(); it != pivots.rend(); ++it) {
      Rational v = -it->second.c;
      bool ok = true;
      for (const auto& [col, a] : it->second.coef) {
        if (col == it->first) continue;
        if (!value[col]) {
          ok = false;
          break;
        }
        v -= a * *value[col];
      }
      if (ok) value[it->first] = v;
    }
    std::vector<DescendantKey> free;
    for (std::size_t u = 0; u < unknowns.size(); ++u) {
      if (!value[u]) {
        free.push_back(unknowns[u]);
        continue;
      }
      table_.insert(unknowns[u], *value[u], Provenance::Solved);
      ++rep_.solved;
      emit(to_string(t_, unknowns[u]) + " = " + to_string(*value[u]) + " (from " + std::to_string(uses[u]) +
           " equations, " + std::to_string(redundant[u]) + " redundant)");
    }
    return free;
  }

  // psi recursion on the psi-carrying keys of `keys`; true if any was filled
  bool fill(const std::set<DescendantKey>& keys) {
    std::size_t before = rep_.filled;
    for (const auto& key : keys) {
      bool psi = std::any_of(key.ins.begin(), key.ins.end(), [](const Insertion& x) { return x.a > 0; });
      if (!psi) continue;
      std::set<DescendantKey> need;
      if (auto v = psi_.value(key, need)) {
        table_.insert(key, *v, Provenance::Solved);
        ++rep_.filled;
        emit(to_string(t_, key) + " = " + to_string(*v) + " (psi recursion)");
      }
    }
    return rep_.filled != before;
  }

  void check_lower(const std::set<DescendantKey>& missing, int level) const {
    std::vector<DescendantKey> lower;
    for (const auto& key : missing)
      if (key.degree() < level) lower.push_back(key);
    if (!lower.empty())
      throw Underdetermined("solve: " + std::to_string(lower.size()) + " keys below degree " +
                                std::to_string(level) + " are unknown, first " + to_string(t_, lower.front()),
                            lower);
  }

  void emit(const std::string& line) {
    rep_.log.push_back(line);
    if (opt_.log) opt_.log(line);
  }

  DescendantTable& table_;
  const TargetModel& t_;
  const SolveOptions& opt_;
  SolveReport& rep_;
  std::map<RowKey, Row> rows_;
  PsiReconstructor psi_;
};

int top_degree(const TruncationProfile& pr) {
  int m = 0;
  for (int c : pr.q_caps) m += c;
  if (pr.q_total_cap) m = std::min(m, *pr.q_total_cap);
  return m;
}

TruncationProfile level_profile(const TruncationProfile& pr, int m) {
  TruncationProfile p = pr;
  p.q_total_cap = pr.q_total_cap ? std::min(*pr.q_total_cap, m) : m;
  return p;
}

}  // namespace

SolveReport solve(DescendantTable& table, const SolveOptions& opt) {
  const TargetModel& t = table.target();
  if (opt.d < 0) throw UsageError("solve: d must be >= 0");
  if (static_cast<int>(opt.profile.q_caps.size()) != t.curve_rank())
    throw UsageError("solve: profile has the wrong number of q caps");
  if (table.size() == 0) throw Underdetermined("solve: the table has no seed data", {});
  SolveReport rep;
  LevelSolver solver(table, opt, rep);
  int top = top_degree(opt.profile);
  for (int m = 1; m <= top; ++m) {
    TruncationProfile pr = level_profile(opt.profile, m);
    if (effective_classes(pr).empty()) continue;
    Harvest h;
    h.d = 0;
    h.profile = pr;
    int zc = 0;
    for (const auto& delta : effective_classes(pr)) zc = std::max(zc, t.dim() + t.c1_degree(delta) - 6);
    h.profile.z_cap = opt.z_cap_psi_free ? *opt.z_cap_psi_free : zc;
    if (opt.symbolic_psi_free) {
      h.specs.push_back({ChiSpec::Kind::Symbolic, 0, {}});
    } else {
      for (auto s : opt.seeds) h.specs.push_back({ChiSpec::Kind::Random, s, {}});
    }
    solver.run(h, m);
  }
  if (opt.d >= 1) {
    for (int m = 1; m <= top; ++m) {
      TruncationProfile pr = level_profile(opt.profile, m);
      if (effective_classes(pr).empty()) continue;
      Harvest h;
      h.d = opt.d;
      h.profile = pr;
      for (auto s : opt.seeds) h.specs.push_back({ChiSpec::Kind::Random, s, {}});
      solver.run(h, m);
    }
  }
  return rep;
}

std::size_t fill_psi(DescendantTable& table, int d, const TruncationProfile& profile, const ChiSpec& spec) {
  const TargetModel& t = table.target();
  PsiReconstructor psi(table);
  std::size_t filled = 0;
  while (true) {
    auto vars = chi_variables(t, spec, d);
    EvalContext ctx{&table, nullptr, vars, profile};
    auto tab = product_table(ctx, make_deforming(t, spec, d, vars, profile));
    std::size_t before = filled;
    for (const auto& key : tab.missing) {
      if (std::none_of(key.ins.begin(), key.ins.end(), [](const Insertion& x) { return x.a > 0; })) continue;
      std::set<DescendantKey> need;
      if (auto v = psi.value(key, need)) {
        table.insert(key, *v, Provenance::Solved);
        ++filled;
      }
    }
    if (filled == before) return filled;
  }
}

}  // namespace tqc
