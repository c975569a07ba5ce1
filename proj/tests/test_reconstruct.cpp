#include <doctest.h>

#include <nlohmann/json.hpp>

#include "tqc/reconstruct.hpp"
#include "tqc/seeds.hpp"
#include "tqc/wdvv.hpp"

using namespace tqc;

namespace {

DescendantTable solved(const TargetModel& t, int q) {
  DescendantTable tab(t);
  add_base_seeds(tab);
  SolveOptions o;
  o.profile.q_caps.assign(t.curve_rank(), q);
  solve(tab, o);
  return tab;
}

// coefficients of u^0..u^n in prod_{k=1}^d (k + u)^(-r-1)
std::vector<Rational> j_coefficients(int d, int r, int n) {
  std::vector<Rational> out(n + 1, 0);
  out[0] = 1;
  for (int k = 1; k <= d; ++k) {
    // (k + u)^(-p) = k^(-p) sum_m binom(m + p - 1, p - 1) (-u/k)^m
    int p = r + 1;
    std::vector<Rational> f(n + 1, 0);
    Rational binom = 1;
    for (int m = 0; m <= n; ++m) {
      if (m > 0) {
        Rational step(m + p - 1, m);
        step.canonicalize();
        binom *= step;
      }
      Rational kp = 1;
      for (int e = 0; e < p + m; ++e) kp *= k;
      f[m] = binom / kp * (m % 2 ? -1 : 1);
    }
    std::vector<Rational> g(n + 1, 0);
    for (int a = 0; a <= n; ++a)
      for (int b = 0; a + b <= n; ++b) g[a + b] += out[a] * f[b];
    out = g;
  }
  return out;
}

}  // namespace

TEST_CASE("one-point descendants of P2 match the J-function") {
  auto tab = solved(builtin_target("p2"), 3);
  const auto& t = tab.target();
  PsiReconstructor rec(tab);
  for (int d = 1; d <= 3; ++d) {
    auto A = j_coefficients(d, 2, 2);
    for (int c = 0; c <= 2; ++c) {
      // <tau_{3d+c-2}(H^{2-c})>_d = A_c
      auto key = normalize_key(t, {d}, {{3 * d + c - 2, static_cast<std::size_t>(2 - c)}});
      std::set<DescendantKey> missing;
      auto v = rec.value(key, missing);
      REQUIRE(v);
      CHECK(*v == A[c]);
    }
  }
}

TEST_CASE("one-point descendants of P1 match the J-function") {
  auto tab = solved(builtin_target("p1"), 3);
  const auto& t = tab.target();
  PsiReconstructor rec(tab);
  for (int d = 1; d <= 3; ++d) {
    auto A = j_coefficients(d, 1, 1);
    for (int c = 0; c <= 1; ++c) {
      auto key = normalize_key(t, {d}, {{2 * d + c - 2, static_cast<std::size_t>(1 - c)}});
      std::set<DescendantKey> missing;
      auto v = rec.value(key, missing);
      REQUIRE(v);
      CHECK(*v == A[c]);
    }
  }
}

TEST_CASE("the recursion reproduces the dilaton value when the rule is off") {
  DescendantTable tab(builtin_target("p1"));
  add_base_seeds(tab);
  RuleSet r;
  r.dilaton = false;
  tab.set_rules(r);
  std::set<DescendantKey> missing;
  auto v = reconstruct_psi(tab, normalize_key(tab.target(), {1}, {{1, 0}}), missing);
  REQUIRE(v);
  CHECK(*v == -2);
}

TEST_CASE("small P2 examples") {
  auto tab = solved(builtin_target("p2"), 1);
  const auto& t = tab.target();
  std::set<DescendantKey> missing;
  CHECK(*reconstruct_psi(tab, normalize_key(t, {1}, {{1, 2}}), missing) == 1);
  CHECK(*reconstruct_psi(tab, normalize_key(t, {1}, {{1, 1}, {0, 2}}), missing) == -1);
  CHECK(missing.empty());
}

TEST_CASE("missing psi-free data is reported") {
  DescendantTable tab(builtin_target("p2"));
  std::set<DescendantKey> missing;
  auto v = reconstruct_psi(tab, normalize_key(tab.target(), {1}, {{1, 2}}), missing);
  CHECK(!v);
  CHECK(!missing.empty());
}

TEST_CASE("peeling the first or the last psi mark agrees") {
  for (auto [name, q] : {std::pair{"p2", 2}, std::pair{"p1xp1", 1}}) {
    auto tab = solved(builtin_target(name), q);
    const auto& t = tab.target();
    PsiReconstructor last(tab), first(tab);
    first.peel_first(true);
    TruncationProfile pr;
    pr.q_caps.assign(t.curve_rank(), q);
    int compared = 0;
    for (const auto& delta : effective_classes(pr))
      for (int n = 2; n <= 4; ++n)
        for (const auto& key : dimension_candidates(t, delta, n, 2)) {
          int np = 0;
          for (const auto& x : key.ins) np += x.a > 0;
          if (np < 2) continue;
          std::set<DescendantKey> m1, m2;
          auto a = last.value(key, m1), b = first.value(key, m2);
          REQUIRE(a);
          REQUIRE(b);
          CHECK(*a == *b);
          ++compared;
        }
    CHECK(compared > 0);
  }
}

TEST_CASE("the choice of ample class does not change the values") {
  auto base = builtin_target("p1xp1");
  auto j = nlohmann::json::parse(target_to_json(base));
  j["ample"] = nlohmann::json::array({{{"i", 1}, {"coeff", 1}}, {{"i", 2}, {"coeff", 2}}});
  auto alt = load_target(j.dump());
  auto t1 = solved(base, 1), t2 = solved(alt, 1);
  PsiReconstructor a(t1), b(t2);
  TruncationProfile pr;
  pr.q_caps = {1, 1};
  int compared = 0;
  for (const auto& delta : effective_classes(pr))
    for (int n = 1; n <= 4; ++n)
      for (const auto& key : dimension_candidates(base, delta, n, 2)) {
        std::set<DescendantKey> m1, m2;
        auto v1 = a.value(key, m1), v2 = b.value(key, m2);
        REQUIRE(v1);
        REQUIRE(v2);
        CHECK(*v1 == *v2);
        ++compared;
      }
  CHECK(compared > 20);
}
