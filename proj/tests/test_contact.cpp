#include <doctest.h>

#include "tqc/contact.hpp"
#include "tqc/seeds.hpp"

using namespace tqc;

namespace {

TruncationProfile prof(int rank, int q, int z, std::optional<int> p = std::nullopt) {
  TruncationProfile pr;
  pr.q_caps.assign(rank, q);
  pr.z_cap = z;
  pr.param_cap = p;
  return pr;
}

struct Env {
  DescendantTable table;
  VarTablePtr vars;
  TruncationProfile pr;
  EvalContext ctx;
  Env(const char* name, int q, int z, std::vector<std::string> params = {})
      : table(builtin_target(name)),
        vars(VariableTable::make(table.target().curve_rank(), std::move(params))),
        pr(prof(table.target().curve_rank(), q, z)),
        ctx{&table, nullptr, vars, pr} {
    add_base_seeds(table);
  }
  const TargetModel& t() const { return table.target(); }
  CohElement T(std::size_t i) const { return CohElement::basis(t(), vars, pr, i); }
  TruncatedPoly P(const char* s) const { return parse_poly(s, vars, pr); }
};

}  // namespace

TEST_CASE("bullet and contact examples with chi = 0") {
  Env p1("p1", 1, 0);
  auto chi = zero_deforming(p1.t(), p1.vars, p1.pr, 0);
  for (int d = 0; d <= 2; ++d) {
    auto c = zero_deforming(p1.t(), p1.vars, p1.pr, d);
    auto b = bullet(p1.ctx, c, p1.T(1), p1.T(1));
    REQUIRE(b.known());
    CHECK(to_string(p1.t(), *b.value) == "q");
  }
  CHECK(to_string(p1.t(), *contact(p1.ctx, chi, p1.T(1), p1.T(1)).value) == "q");
  CHECK(bullet(p1.ctx, chi, p1.T(0), p1.T(1)).value->is_zero());

  Env p2("p2", 1, 0);
  auto c2 = zero_deforming(p2.t(), p2.vars, p2.pr, 0);
  CHECK(to_string(p2.t(), *bullet(p2.ctx, c2, p2.T(2), p2.T(2)).value) == "q*h");
  CHECK(to_string(p2.t(), *contact(p2.ctx, c2, p2.T(1), p2.T(2)).value) == "q");
  CHECK(*contact(p2.ctx, c2, p2.T(0), p2.T(1)).value == p2.T(1));
}

TEST_CASE("identity, commutativity and q-positivity with random chi") {
  for (const char* name : {"p1", "p2", "p1xp1"}) {
    for (int d = 0; d <= 2; ++d) {
      // restricted to what the base seeds determine: degree 1, chi_0 on
      // divisors and the identity, chi_1 on the identity
      Env env(name, 1, 3);
      env.pr.q_total_cap = 1;
      env.ctx.profile = env.pr;
      auto chi = random_deforming(env.t(), env.vars, env.pr, d, 7 + d);
      for (int p = 0; p <= d; ++p)
        for (std::size_t i = 0; i < env.t().size(); ++i)
          if ((p == 0 && env.t().codim(i) > 1) || (p > 0 && i != 0) || p > 1)
            chi.chis[p][i] = chi.chis[p][i].zero_like();
      auto tab = product_table(env.ctx, chi);
      REQUIRE(tab.known());
      for (std::size_t i = 0; i < env.t().size(); ++i) {
        CHECK(tab.m[0][i] == env.T(i));
        for (std::size_t j = 0; j < env.t().size(); ++j) {
          auto b = bullet(env.ctx, chi, env.T(i), env.T(j));
          auto c = bullet(env.ctx, chi, env.T(j), env.T(i));
          CHECK(*b.value == *c.value);
          for (const auto& coeff : b.value->coeffs)
            for (const auto& term : coeff.terms()) {
              int qdeg = 0;
              for (int r = 0; r < env.t().curve_rank(); ++r) qdeg += term.first[env.vars->novikov_index(r)];
              CHECK(qdeg > 0);
            }
        }
      }
    }
  }
}

TEST_CASE("contact_series is bilinear over the series ring") {
  Env p1("p1", 2, 2);
  auto chi = zero_deforming(p1.t(), p1.vars, p1.pr, 0);
  auto tab = product_table(p1.ctx, chi);
  auto q = p1.P("q");
  CHECK(contact_series(p1.t(), tab, p1.T(1) * q, p1.T(1)) == tab.m[1][1] * q);
  CHECK(contact_series(p1.t(), tab, p1.T(1), CohElement::zero(p1.t(), p1.vars, p1.pr)).is_zero());
  auto a = p1.T(0) + p1.T(1) * q;
  CHECK(contact_series(p1.t(), tab, a, p1.T(0)) == a);
}

TEST_CASE("chi = 0 reduces to direct gw_class sums") {
  Env p2("p2", 2, 0);
  p2.table.insert(normalize_key(p2.t(), {2}, std::vector<Insertion>(5, Insertion{0, 2})), 1, Provenance::Solved);
  auto chi = zero_deforming(p2.t(), p2.vars, p2.pr, 1);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      auto b = bullet(p2.ctx, chi, p2.T(i), p2.T(j));
      REQUIRE(b.known());
      CohElement direct = CohElement::zero(p2.t(), p2.vars, p2.pr);
      std::set<DescendantKey> missing;
      for (int m = 1; m <= 2; ++m) {
        auto g = gw_class(p2.ctx, {m}, {{0, p2.T(i)}, {0, p2.T(j)}}, missing);
        REQUIRE(g);
        direct += *g * q_power(p2.vars, p2.pr, {m});
      }
      CHECK(*b.value == direct);
    }
}

TEST_CASE("z-grading: z^N collects aux marks plus the exp(2 z chi_1) order") {
  // with chi_0 = 0 and chi_1 = c*1 the output factor is exp(2 c z) and every
  // aux mark is a dilaton-reducible tau_1(1)
  Env p1("p1", 1, 3);
  auto chi = zero_deforming(p1.t(), p1.vars, p1.pr, 1);
  chi.chis[1][0] = TruncatedPoly::constant(p1.vars, p1.pr, 1);
  auto b = bullet(p1.ctx, chi, p1.T(1), p1.T(1));
  REQUIRE(b.known());
  // sum_n z^n/n! (-2)^n times exp(2z) = exp(0) = 1, so the result stays q
  CHECK(to_string(p1.t(), *b.value) == "q");
}

TEST_CASE("deforming element arity and q/z freedom") {
  Env p1("p1", 1, 1);
  DeformingElement empty;
  CHECK_THROWS_AS(validate(p1.t(), empty), UsageError);
  auto chi = zero_deforming(p1.t(), p1.vars, p1.pr, 0);
  chi.chis[0][1] = p1.P("q");
  CHECK_THROWS_AS(validate(p1.t(), chi), UsageError);
  Lcg a(7), b(7);
  for (int i = 0; i < 5; ++i) CHECK(a.small_rational() == b.small_rational());
}
