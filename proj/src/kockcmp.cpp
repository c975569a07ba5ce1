#include "tqc/kockcmp.hpp"

namespace tqc {

VarTablePtr kock_variable_table(const TargetModel& t, std::vector<std::string> extra) {
  for (std::size_t i = 0; i < t.size(); ++i) extra.push_back("x" + std::to_string(i));
  for (std::size_t i = 0; i < t.size(); ++i) extra.push_back("y" + std::to_string(i));
  return VariableTable::make(t.curve_rank(), std::move(extra));
}

KockVariables kock_variables(const TargetModel& t, const VarTablePtr& vars) {
  KockVariables kv;
  for (std::size_t i = 0; i < t.size(); ++i) kv.x.push_back(vars->index_of("x" + std::to_string(i)));
  for (std::size_t i = 0; i < t.size(); ++i) kv.y.push_back(vars->index_of("y" + std::to_string(i)));
  return kv;
}

namespace {

struct Slot {
  Insertion ins;
  TruncatedPoly var;
  int excess;  // a + codim - 1
  bool is_x;
};

// Sums prod_s var_s^{m_s} / m_s! {fixed, slots^m}_delta over multisets m.
struct Enumerator {
  const EvalContext& ctx;
  const TargetModel& t;
  std::vector<Slot> slots;
  std::set<DescendantKey>& missing;
  int min_x = 0;
  bool prune = true;
  bool ok = true;

  CurveClass delta;
  int target = 0;
  std::vector<Insertion> ins;
  TruncatedPoly* sum = nullptr;

  void run(std::size_t s, int excess, int nx, const TruncatedPoly& w) {
    if (w.is_zero()) return;
    if (s == slots.size()) {
      if (prune && excess != target) return;
      if (nx < min_x) return;
      auto v = eval_key(ctx, normalize_key(t, delta, ins), missing);
      if (!v) {
        ok = false;
        return;
      }
      if (!v->is_zero()) *sum += w * *v;
      return;
    }
    const Slot& x = slots[s];
    std::size_t base = ins.size();
    TruncatedPoly cur = w;
    for (int m = 0;; ++m) {
      if (prune && excess + m * x.excess > target) break;
      if (m > 0) {
        cur = cur * x.var * Rational(1, m);
        if (cur.is_zero()) break;
        ins.push_back(x.ins);
      }
      run(s + 1, excess + m * x.excess, nx + (x.is_x ? m : 0), cur);
    }
    ins.resize(base);
  }
};

Enumerator make_enumerator(const EvalContext& ctx, const KockVariables& kv, std::set<DescendantKey>& missing) {
  if (!ctx.profile.param_cap) throw UsageError("Kock product: the profile needs a parameter cap");
  const TargetModel& t = ctx.table->target();
  Enumerator e{ctx, t, {}, missing, 0, true, true, {}, 0, {}, nullptr};
  for (int a = 0; a <= 1; ++a)
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (a == 0 && i == t.identity() && ctx.table->rules().fundamental) continue;
      std::size_t v = a == 0 ? kv.x[i] : kv.y[i];
      e.slots.push_back({{a, i}, TruncatedPoly::variable(ctx.vars, ctx.profile, v), a + t.codim(i) - 1, a == 0});
      if (a + t.codim(i) - 1 < 0) e.prune = false;
    }
  e.prune = e.prune && ctx.table->rules().dimension;
  return e;
}

TruncatedPoly sum_over_classes(Enumerator& e, const std::vector<Insertion>& fixed) {
  const auto& ctx = e.ctx;
  TruncatedPoly total(ctx.vars, ctx.profile);
  for (const auto& delta : effective_classes(ctx.profile)) {
    TruncatedPoly qd = q_power(ctx.vars, ctx.profile, delta);
    if (qd.is_zero()) continue;
    TruncatedPoly part(ctx.vars, ctx.profile);
    e.delta = delta;
    e.ins = fixed;
    e.sum = &part;
    e.target = e.t.dim() + e.t.c1_degree(delta) - 3;
    for (const auto& f : fixed) e.target -= f.a + e.t.codim(f.index) - 1;
    e.run(0, 0, 0, TruncatedPoly::constant(ctx.vars, ctx.profile, 1));
    total += qd * part;
  }
  return total;
}

}  // namespace

TruncatedPoly gamma_series(const EvalContext& ctx, const KockVariables& kv, std::set<DescendantKey>& missing,
                           int min_x) {
  auto e = make_enumerator(ctx, kv, missing);
  e.min_x = min_x;
  return sum_over_classes(e, {});
}

TruncatedPoly gamma_series(const EvalContext& ctx, const KockVariables& kv, std::set<DescendantKey>& missing) {
  return gamma_series(ctx, kv, missing, 0);
}

TruncatedPoly gamma_third_partial(const TruncatedPoly& gamma, const KockVariables& kv, std::size_t i, std::size_t j,
                                  std::size_t l) {
  return derivative(derivative(derivative(gamma, kv.x.at(i)), kv.x.at(j)), kv.x.at(l));
}

GammaPartials gamma_partials(const TargetModel& t, const TruncatedPoly& gamma, const KockVariables& kv) {
  std::size_t n = t.size();
  GammaPartials g(n, std::vector<std::vector<TruncatedPoly>>(n, std::vector<TruncatedPoly>(n, gamma.zero_like())));
  for (std::size_t i = 0; i < n; ++i) {
    auto gi = derivative(gamma, kv.x[i]);
    for (std::size_t j = i; j < n; ++j) {
      auto gij = derivative(gi, kv.x[j]);
      for (std::size_t l = j; l < n; ++l) {
        auto v = derivative(gij, kv.x[l]);
        for (auto [a, b, c] : {std::array{i, j, l}, {i, l, j}, {j, i, l}, {j, l, i}, {l, i, j}, {l, j, i}})
          g[a][b][c] = v;
      }
    }
  }
  return g;
}

DeformedMetric deformed_metric(const TargetModel& t, const VarTablePtr& vars, const KockVariables& kv,
                               const TruncationProfile& profile) {
  if (!profile.param_cap) throw UsageError("deformed metric: the profile needs a parameter cap");
  std::size_t n = t.size();
  CohElement y = CohElement::zero(t, vars, profile);
  for (std::size_t i = 0; i < n; ++i) y[i] = TruncatedPoly::variable(vars, profile, kv.y[i]) * Rational(-2);
  CohElement e = exp_alg(t, y);
  DeformedMetric m;
  TruncatedPoly zero(vars, profile);
  m.gamma.assign(n, std::vector<TruncatedPoly>(n, zero));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      auto ti = CohElement::basis(t, vars, profile, i), tj = CohElement::basis(t, vars, profile, j);
      m.gamma[i][j] = integrate(t, cup(t, cup(t, ti, tj), e));
    }
  // gamma^-1 = sum_m (-g^-1 C)^m g^-1 with C = gamma - g
  const auto& ginv = t.pairing_inverse();
  std::vector<std::vector<TruncatedPoly>> step(n, std::vector<TruncatedPoly>(n, zero));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      TruncatedPoly s = zero;
      for (std::size_t k = 0; k < n; ++k) {
        if (ginv[i][k] == 0) continue;
        s -= (m.gamma[k][j] - zero.constant_like(t.pairing(k, j))) * ginv[i][k];
      }
      step[i][j] = std::move(s);
    }
  std::vector<std::vector<TruncatedPoly>> term(n, std::vector<TruncatedPoly>(n, zero));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) term[i][j] = zero.constant_like(ginv[i][j]);
  m.inverse = term;
  while (true) {
    std::vector<std::vector<TruncatedPoly>> next(n, std::vector<TruncatedPoly>(n, zero));
    bool any = false;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k)
          if (!step[i][k].is_zero() && !term[k][j].is_zero()) next[i][j] += step[i][k] * term[k][j];
        if (!next[i][j].is_zero()) any = true;
      }
    if (!any) break;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m.inverse[i][j] += next[i][j];
    term = std::move(next);
  }
  return m;
}

CohElement kock_bullet(const TargetModel& t, const GammaPartials& partials, const DeformedMetric& metric,
                       std::size_t i, std::size_t j) {
  const auto& z = metric.gamma[0][0];
  CohElement out = CohElement::zero(t, z.vars(), z.profile());
  for (std::size_t l = 0; l < t.size(); ++l) {
    const auto& g = partials[i][j][l];
    if (g.is_zero()) continue;
    for (std::size_t m = 0; m < t.size(); ++m)
      if (!metric.inverse[l][m].is_zero()) out[m] += g * metric.inverse[l][m];
  }
  return out;
}

std::optional<TruncatedPoly> three_point_series(const EvalContext& ctx, const KockVariables& kv, std::size_t i,
                                                std::size_t j, std::size_t k, std::set<DescendantKey>& missing) {
  auto e = make_enumerator(ctx, kv, missing);
  auto v = sum_over_classes(e, {{0, i}, {0, j}, {0, k}});
  if (!e.ok) return std::nullopt;
  return v;
}

namespace {

CheckResult zero_check(const TargetModel& t, std::string name, const CohElement& residual) {
  CheckResult c;
  c.name = std::move(name);
  c.pass = residual.is_zero();
  if (!c.pass) {
    c.detail = to_string(t, residual);
    if (c.detail.size() > 400) c.detail = c.detail.substr(0, 400) + " ...";
    c.leading_q_degree = leading_q_degree(residual);
  }
  return c;
}

}  // namespace

VerifyReport compare_kock(const DescendantTable& table, const KockOptions& opt) {
  const TargetModel& t = table.target();
  if (opt.q_cap < 0 || opt.z_cap < 0) throw UsageError("compare-kock: caps must be >= 0");
  TruncationProfile pr;
  pr.q_caps.assign(t.curve_rank(), opt.q_cap);
  pr.z_cap = opt.z_cap;
  pr.param_cap = opt.z_cap + 3;

  std::vector<std::string> extra;
  if (opt.chi.kind == ChiSpec::Kind::Symbolic) extra = symbolic_parameter_names(t, 1);
  auto vars = kock_variable_table(t, extra);
  auto kv = kock_variables(t, vars);
  EvalContext ctx{&table, nullptr, vars, pr};
  auto chi = make_deforming(t, opt.chi, 1, vars, pr);
  validate(t, chi);

  VerifyReport rep;
  auto gamma = gamma_series(ctx, kv, rep.missing, 3);
  // Gamma_ijl carries the parameter degree only up to z_cap
  TruncationProfile low = pr;
  low.param_cap = opt.z_cap;
  EvalContext low_ctx{&table, nullptr, vars, low};
  std::vector<std::optional<TruncatedPoly>> direct;
  std::size_t n = t.size();
  if (opt.pairing)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j)
        for (std::size_t k = j; k < n; ++k) direct.push_back(three_point_series(low_ctx, kv, i, j, k, rep.missing));
  std::vector<std::vector<Product>> ours(n, std::vector<Product>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      ours[i][j] = basis_bullet(ctx, chi, i, j);
      rep.missing.insert(ours[i][j].missing.begin(), ours[i][j].missing.end());
    }
  if (!rep.missing.empty()) return rep;

  auto partials = gamma_partials(t, gamma, kv);
  auto metric = deformed_metric(t, vars, kv, pr);
  TruncatedPoly z = TruncatedPoly::variable(vars, pr, vars->z_index());
  auto specialize = [&](TruncatedPoly p) {
    for (std::size_t i = 0; i < n; ++i) {
      p = substitute(p, kv.x[i], z * chi.chis[0][i]);
      p = substitute(p, kv.y[i], z * chi.chis[1][i]);
    }
    return p;
  };

  std::vector<std::vector<CohElement>> kb(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) kb[i].push_back(kock_bullet(t, partials, metric, i, j));

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      CohElement r = kb[i][j];
      for (auto& c : r.coeffs) c = specialize(c);
      r -= *ours[i][j].value;
      rep.checks.push_back(zero_check(t, "kock " + t.basis(i).name + "," + t.basis(j).name, r));
    }

  if (opt.pairing) {
    CohElement y = CohElement::zero(t, vars, pr);
    for (std::size_t i = 0; i < n; ++i) y[i] = TruncatedPoly::variable(vars, pr, kv.y[i]) * Rational(-2);
    CohElement e = exp_alg(t, y);
    std::size_t at = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j)
        for (std::size_t k = j; k < n; ++k) {
          auto lhs = integrate(t, cup(t, cup(t, kb[i][j], e), CohElement::basis(t, vars, pr, k)));
          CohElement r = CohElement::zero(t, vars, low);
          r[0] = truncate(lhs, low) - *direct[at++];
          rep.checks.push_back(zero_check(
              t, "pairing " + t.basis(i).name + "," + t.basis(j).name + "," + t.basis(k).name, r));
        }
  }
  return rep;
}

}  // namespace tqc
