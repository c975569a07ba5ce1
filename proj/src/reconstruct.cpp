#include "tqc/reconstruct.hpp"

#include <algorithm>

namespace tqc {

namespace {

using Cls = std::vector<Rational>;

Cls basis_cls(const TargetModel& t, std::size_t i) {
  Cls c(t.size(), Rational(0));
  c[i] = 1;
  return c;
}

Cls cup_cls(const TargetModel& t, const Cls& a, const Cls& b) {
  Cls out(t.size(), Rational(0));
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (a[i] == 0) continue;
    for (std::size_t j = 0; j < t.size(); ++j) {
      if (b[j] == 0) continue;
      for (std::size_t k = 0; k < t.size(); ++k)
        if (t.cup_coeff(i, j, k) != 0) out[k] += a[i] * b[j] * t.cup_coeff(i, j, k);
    }
  }
  return out;
}

Rational binom(int n, int k) {
  mpz_class r;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  return Rational(r);
}

// -1 for the zero class, -2 when not homogeneous
int cls_degree(const TargetModel& t, const Cls& c) {
  int deg = -1;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (c[i] == 0) continue;
    if (deg >= 0 && deg != t.codim(i)) return -2;
    deg = t.codim(i);
  }
  return deg;
}

// insertions grouped as (insertion, multiplicity)
using Groups = std::vector<std::pair<Insertion, int>>;

Groups group(const std::vector<Insertion>& ins) {
  Groups g;
  for (const auto& x : ins) {
    if (!g.empty() && g.back().first == x)
      ++g.back().second;
    else
      g.push_back({x, 1});
  }
  return g;
}

}  // namespace

std::optional<Rational> PsiReconstructor::value(const DescendantKey& key, std::set<DescendantKey>& missing) {
  if (auto it = known_.find(key); it != known_.end()) return it->second;
  LookupResult r = table_.lookup(key);
  if (r.kind == LookupResult::Kind::Zero) return known_.emplace(key, Rational(0)).first->second;
  if (r.kind == LookupResult::Kind::Value) return known_.emplace(key, r.value).first->second;
  const DescendantKey& k = r.missing;
  bool psi = std::any_of(k.ins.begin(), k.ins.end(), [](const Insertion& x) { return x.a > 0; });
  if (!psi || is_zero_class(k.delta)) {
    missing.insert(k);
    return std::nullopt;
  }
  auto v = recurse(k, missing);
  if (!v) return std::nullopt;
  return known_.emplace(key, r.factor * *v).first->second;
}

std::optional<Rational> PsiReconstructor::general(const CurveClass& delta, const std::vector<Slot>& slots,
                                                  std::set<DescendantKey>& missing) {
  const TargetModel& t = table_.target();
  // every slot class is homogeneous, so the dimension rule can drop the whole sum
  if (table_.rules().dimension && !is_zero_class(delta)) {
    int s = 0;
    for (const auto& sl : slots) {
      int deg = cls_degree(t, sl.cls);
      if (deg == -1) return Rational(0);
      if (deg == -2) {
        s = -1;
        break;
      }
      s += sl.a + deg;
    }
    if (s >= 0 && s != vdim(t, delta, static_cast<int>(slots.size()))) return Rational(0);
  }
  Rational total = 0;
  bool ok = true;
  std::vector<Insertion> ins(slots.size());
  auto rec = [&](auto&& self, std::size_t s, const Rational& w) -> void {
    if (s == slots.size()) {
      auto v = value(normalize_key(t, delta, ins), missing);
      if (!v)
        ok = false;
      else
        total += w * *v;
      return;
    }
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (slots[s].cls[i] == 0) continue;
      ins[s] = {slots[s].a, i};
      self(self, s + 1, w * slots[s].cls[i]);
    }
  };
  rec(rec, 0, Rational(1));
  if (!ok) return std::nullopt;
  return total;
}

std::optional<Rational> PsiReconstructor::recurse(const DescendantKey& key, std::set<DescendantKey>& missing) {
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  const TargetModel& t = table_.target();
  const std::size_t n = t.size();
  Rational e = t.ample_degree(key.delta);
  if (e == 0) throw UsageError("psi recursion: ample class has zero degree on " + to_string(t, key));

  // s = last insertion with a >= 1 (insertions are sorted), or the first
  std::size_t s_pos = key.ins.size() - 1;
  if (first_)
    while (s_pos > 0 && key.ins[s_pos - 1].a >= 1) --s_pos;
  const Insertion s = key.ins[s_pos];
  std::vector<Insertion> rest = key.ins;
  rest.erase(rest.begin() + s_pos);

  Cls H(t.ample().begin(), t.ample().end());
  Cls gs = basis_cls(t, s.index);
  std::vector<Slot> base;
  for (const auto& x : rest) base.push_back({x.a, basis_cls(t, x.index)});

  bool ok = true;
  Rational total = 0;
  auto add = [&](const std::optional<Rational>& v, const Rational& w) {
    if (!v)
      ok = false;
    else
      total += w * *v;
  };

  {
    auto slots = base;
    slots.push_back({s.a - 1, gs});
    slots.push_back({0, cup_cls(t, H, H)});
    add(general(key.delta, slots, missing), 1);
  }
  {
    auto slots = base;
    slots.push_back({s.a - 1, cup_cls(t, gs, H)});
    add(general(key.delta, slots, missing), -2 * e);
  }

  Groups groups = group(rest);
  CurveClass d1(key.delta.size(), 0);
  // iterate delta1 over the box [0, delta]
  auto next_class = [&](CurveClass& c) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (c[i] < key.delta[i]) {
        ++c[i];
        return true;
      }
      c[i] = 0;
    }
    return false;
  };
  while (next_class(d1)) {
    if (d1 == key.delta) continue;
    CurveClass d2 = key.delta;
    for (std::size_t i = 0; i < d2.size(); ++i) d2[i] -= d1[i];
    Rational h2 = t.ample_degree(d2);
    Rational hw = h2 * h2;
    if (hw == 0) continue;

    // split each group: k1 copies on side 1, of which j1 collapse; side 2
    // gets m - k1 copies of which j2 collapse
    struct Side {
      std::vector<Slot> stay;
      int power = 0;
      Cls glue;
    };
    std::vector<int> k1(groups.size()), j1(groups.size()), j2(groups.size());
    auto emit = [&](const Rational& w, int s_collapse) {
      Side a, b;
      a.glue = basis_cls(t, 0);
      b.glue = basis_cls(t, 0);
      for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto& [x, m] = groups[g];
        Cls c = basis_cls(t, x.index);
        for (int i = 0; i < k1[g] - j1[g]; ++i) a.stay.push_back({x.a, c});
        for (int i = 0; i < j1[g]; ++i) {
          a.power += x.a - 1;
          a.glue = cup_cls(t, a.glue, c);
        }
        for (int i = 0; i < m - k1[g] - j2[g]; ++i) b.stay.push_back({x.a, c});
        for (int i = 0; i < j2[g]; ++i) {
          b.power += x.a - 1;
          b.glue = cup_cls(t, b.glue, c);
        }
      }
      if (s_collapse) {
        a.power += s.a - 2;
        a.glue = cup_cls(t, a.glue, gs);
      } else {
        a.stay.push_back({s.a - 1, gs});
      }
      int want = -1;
      if (table_.rules().dimension) {
        int g = cls_degree(t, a.glue);
        if (g == -1) return;
        if (g >= 0) {
          int sum = a.power + g;
          for (const auto& sl : a.stay) sum += sl.a + cls_degree(t, sl.cls);
          want = vdim(t, d1, static_cast<int>(a.stay.size()) + 1) - sum;
          if (want < 0 || want > t.dim()) return;
        }
      }
      for (std::size_t k = 0; k < n; ++k) {
        if (want >= 0 && t.codim(k) != want) continue;
        Cls ck = cup_cls(t, a.glue, basis_cls(t, k));
        bool any = std::any_of(ck.begin(), ck.end(), [](const Rational& r) { return r != 0; });
        if (!any) continue;
        Cls dual(n, Rational(0));
        for (std::size_t l = 0; l < n; ++l) dual[l] = t.pairing_inverse()[k][l];
        Cls cl = cup_cls(t, b.glue, dual);
        if (std::all_of(cl.begin(), cl.end(), [](const Rational& r) { return r == 0; })) continue;
        auto sa = a.stay;
        sa.push_back({a.power, ck});
        auto v1 = general(d1, sa, missing);
        if (!v1) {
          ok = false;
          continue;
        }
        if (*v1 == 0) continue;
        auto sb = b.stay;
        sb.push_back({b.power, cl});
        auto v2 = general(d2, sb, missing);
        if (!v2) {
          ok = false;
          continue;
        }
        total += w * *v1 * *v2;
      }
    };
    // both sides must meet their dimension once the node class is added
    auto feasible = [&](int s_collapse) {
      if (!table_.rules().dimension) return true;
      int sa = 0, na = 1, sb = 0, nb = 1;
      for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto& [x, m] = groups[g];
        int c = t.codim(x.index);
        sa += (k1[g] - j1[g]) * (x.a + c) + j1[g] * (x.a - 1 + c);
        na += k1[g] - j1[g];
        sb += (m - k1[g] - j2[g]) * (x.a + c) + j2[g] * (x.a - 1 + c);
        nb += m - k1[g] - j2[g];
      }
      if (s_collapse) {
        sa += s.a - 2 + t.codim(s.index);
      } else {
        sa += s.a - 1 + t.codim(s.index);
        ++na;
      }
      int ka = vdim(t, d1, na) - sa, kb = vdim(t, d2, nb) - sb;
      return ka >= 0 && kb >= 0 && ka + kb == t.dim();
    };
    auto rec = [&](auto&& self, std::size_t g, const Rational& w) -> void {
      if (g == groups.size()) {
        if (feasible(0)) emit(w, 0);
        if (s.a - 1 >= 1 && feasible(1)) emit(w, 1);
        return;
      }
      const auto& [x, m] = groups[g];
      for (int a = 0; a <= m; ++a) {
        k1[g] = a;
        int c1max = x.a >= 1 ? a : 0, c2max = x.a >= 1 ? m - a : 0;
        for (int c1 = 0; c1 <= c1max; ++c1) {
          j1[g] = c1;
          for (int c2 = 0; c2 <= c2max; ++c2) {
            j2[g] = c2;
            self(self, g + 1, w * binom(m, a) * binom(a, c1) * binom(m - a, c2));
          }
        }
      }
    };
    rec(rec, 0, hw);
  }
  if (!ok) return std::nullopt;
  Rational v = total / (e * e);
  memo_.emplace(key, v);
  return v;
}

std::optional<Rational> reconstruct_psi(const DescendantTable& table, const DescendantKey& key,
                                        std::set<DescendantKey>& missing) {
  PsiReconstructor r(table);
  return r.value(key, missing);
}

}  // namespace tqc
