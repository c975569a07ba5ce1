#include "tqc/contact.hpp"

namespace tqc {

std::uint64_t Lcg::draw(std::uint64_t n) {
  state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
  return (state_ >> 33) % n;
}

Rational Lcg::small_rational() {
  long num = static_cast<long>(draw(19)) - 9;
  long den = static_cast<long>(draw(9)) + 1;
  Rational r(num, den);
  r.canonicalize();
  return r;
}

DeformingElement zero_deforming(const TargetModel& t, const VarTablePtr& vars, const TruncationProfile& pr, int d) {
  if (d < 0) throw UsageError("deforming element: d must be >= 0");
  DeformingElement chi;
  chi.chis.assign(d + 1, CohElement::zero(t, vars, pr));
  return chi;
}

DeformingElement random_deforming(const TargetModel& t, const VarTablePtr& vars, const TruncationProfile& pr, int d,
                                  std::uint64_t seed) {
  DeformingElement chi = zero_deforming(t, vars, pr, d);
  Lcg rng(seed);
  for (int p = 0; p <= d; ++p)
    for (std::size_t i = 0; i < t.size(); ++i) chi.chis[p][i] = TruncatedPoly::constant(vars, pr, rng.small_rational());
  return chi;
}

std::vector<std::string> symbolic_parameter_names(const TargetModel& t, int d) {
  std::vector<std::string> out;
  for (int p = 0; p <= d; ++p)
    for (std::size_t i = 0; i < t.size(); ++i) out.push_back("c" + std::to_string(p) + "_" + std::to_string(i));
  return out;
}

DeformingElement symbolic_deforming(const TargetModel& t, const VarTablePtr& vars, const TruncationProfile& pr, int d) {
  DeformingElement chi = zero_deforming(t, vars, pr, d);
  for (int p = 0; p <= d; ++p)
    for (std::size_t i = 0; i < t.size(); ++i)
      chi.chis[p][i] = TruncatedPoly::variable(vars, pr, vars->index_of("c" + std::to_string(p) + "_" + std::to_string(i)));
  return chi;
}

void validate(const TargetModel& t, const DeformingElement& chi) {
  if (chi.chis.empty()) throw UsageError("deforming element: d must be >= 0 with a chi list of length d+1");
  for (const auto& c : chi.chis) {
    if (c.size() != t.size()) throw UsageError("deforming element: chi size differs from the target basis");
    for (const auto& p : c.coeffs) {
      const auto& vars = *p.vars();
      for (const auto& term : p.terms())
        for (std::size_t v = 0; v < vars.size(); ++v)
          if (term.first[v] != 0 && (vars[v].group == VarGroup::Novikov || vars[v].group == VarGroup::Z))
            throw UsageError("deforming element: chi coefficients must not involve q or z");
    }
  }
}

namespace {

struct Aux {
  int power;
  std::size_t index;
  TruncatedPoly coeff;  // c_{t,i} * z
  int excess;           // t + codim - 1
};

struct BulletSum {
  const EvalContext& ctx;
  const TargetModel& t;
  const std::vector<Aux>& aux;
  bool prune;
  CohElement& sum;
  std::set<DescendantKey>& missing;
  bool ok = true;

  CurveClass delta;
  std::size_t k = 0;
  int target_excess = 0;
  std::vector<Insertion> ins;

  void run(std::size_t j, int used, int excess, const TruncatedPoly& weight) {
    if (weight.is_zero()) return;
    if (j == aux.size()) {
      if (prune && excess != target_excess) return;
      auto key = normalize_key(t, delta, ins);
      auto v = eval_key(ctx, key, missing);
      if (!v) {
        ok = false;
        return;
      }
      if (v->is_zero()) return;
      TruncatedPoly contrib = weight * *v;
      for (std::size_t l = 0; l < t.size(); ++l) {
        const Rational& g = t.pairing_inverse()[k][l];
        if (g != 0) sum[l] += contrib * g;
      }
      return;
    }
    const Aux& x = aux[j];
    TruncatedPoly w = weight;
    int m = 0;
    std::size_t base = ins.size();
    while (true) {
      run(j + 1, used + m, excess + m * x.excess, w);
      if (used + m + 1 > ctx.profile.z_cap) break;
      if (prune && excess + (m + 1) * x.excess > target_excess) break;
      ++m;
      w = w * x.coeff * Rational(1, m);
      if (w.is_zero()) break;
      ins.push_back({x.power, x.index});
    }
    ins.resize(base);
  }
};

}  // namespace

Product basis_bullet(const EvalContext& ctx, const DeformingElement& chi, std::size_t a, std::size_t b) {
  const TargetModel& t = ctx.table->target();
  const RuleSet& rules = ctx.table->rules();
  const auto& vars = ctx.vars;
  const auto& pr = ctx.profile;
  TruncatedPoly z = TruncatedPoly::variable(vars, pr, vars->z_index());

  std::vector<Aux> aux;
  bool nonneg = true;
  for (int p = 0; p <= chi.order(); ++p)
    for (std::size_t i = 0; i < t.size(); ++i) {
      const auto& c = chi.chis[p][i];
      if (c.is_zero()) continue;
      if (p == 0 && i == t.identity() && rules.fundamental) continue;
      int ex = p + t.codim(i) - 1;
      if (ex < 0) nonneg = false;
      aux.push_back({p, i, c * z, ex});
    }
  bool prune = rules.dimension && nonneg;

  Product out;
  CohElement sum = CohElement::zero(t, vars, pr);
  BulletSum bs{ctx, t, aux, prune, sum, out.missing};
  for (const auto& delta : effective_classes(pr)) {
    TruncatedPoly qd = q_power(vars, pr, delta);
    if (qd.is_zero()) continue;
    int base = t.dim() + t.c1_degree(delta) - t.codim(a) - t.codim(b);
    bs.delta = delta;
    for (std::size_t k = 0; k < t.size(); ++k) {
      bs.k = k;
      bs.target_excess = base - t.codim(k);
      if (prune && bs.target_excess < 0) continue;
      bs.ins = {{0, a}, {0, b}, {0, k}};
      bs.run(0, 0, 0, qd);
    }
  }
  if (!bs.ok) return out;
  if (chi.order() >= 1 && !chi.chis[1].is_zero()) {
    CohElement twozchi = chi.chis[1] * (z * Rational(2));
    sum = cup(t, sum, exp_alg(t, twozchi));
  }
  out.value = std::move(sum);
  return out;
}

Product bullet(const EvalContext& ctx, const DeformingElement& chi, const CohElement& alpha,
               const CohElement& beta) {
  const TargetModel& t = ctx.table->target();
  Product out;
  CohElement sum = CohElement::zero(t, ctx.vars, ctx.profile);
  bool ok = true;
  for (std::size_t a = 0; a < t.size(); ++a) {
    if (alpha[a].is_zero()) continue;
    for (std::size_t b = 0; b < t.size(); ++b) {
      if (beta[b].is_zero()) continue;
      auto p = basis_bullet(ctx, chi, a, b);
      out.missing.insert(p.missing.begin(), p.missing.end());
      if (!p.value) {
        ok = false;
        continue;
      }
      sum += *p.value * (alpha[a] * beta[b]);
    }
  }
  if (ok) out.value = std::move(sum);
  return out;
}

Product contact(const EvalContext& ctx, const DeformingElement& chi, const CohElement& alpha,
                const CohElement& beta) {
  Product p = bullet(ctx, chi, alpha, beta);
  if (p.value) *p.value += cup(ctx.table->target(), alpha, beta);
  return p;
}

ProductTable product_table(const EvalContext& ctx, const DeformingElement& chi) {
  const TargetModel& t = ctx.table->target();
  std::size_t n = t.size();
  ProductTable out;
  out.m.assign(n, std::vector<CohElement>(n, CohElement::zero(t, ctx.vars, ctx.profile)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      auto p = basis_bullet(ctx, chi, i, j);
      out.missing.insert(p.missing.begin(), p.missing.end());
      if (!p.value) continue;
      CohElement v = std::move(*p.value);
      for (std::size_t k = 0; k < n; ++k)
        if (t.cup_coeff(i, j, k) != 0) v[k] += TruncatedPoly::constant(ctx.vars, ctx.profile, t.cup_coeff(i, j, k));
      out.m[i][j] = v;
      out.m[j][i] = std::move(v);
    }
  return out;
}

CohElement contact_series(const TargetModel& t, const ProductTable& table, const CohElement& A,
                          const CohElement& B) {
  if (!table.known()) throw UsageError("contact_series: product table is incomplete");
  CohElement out = CohElement::zero(t, A[0].vars(), TruncationProfile::meet(A[0].profile(), B[0].profile()));
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (A[i].is_zero()) continue;
    for (std::size_t j = 0; j < t.size(); ++j) {
      if (B[j].is_zero()) continue;
      out += table.m[i][j] * (A[i] * B[j]);
    }
  }
  return out;
}

}  // namespace tqc
