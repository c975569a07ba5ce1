#include <doctest.h>

#include <random>

#include "tqc/target.hpp"

using namespace tqc;

namespace {

TruncationProfile prof(int rank, int q, int z, std::optional<int> p = std::nullopt) {
  TruncationProfile pr;
  pr.q_caps.assign(rank, q);
  pr.z_cap = z;
  pr.param_cap = p;
  return pr;
}

CohElement random_element(std::mt19937& rng, const TargetModel& t, const VarTablePtr& vars,
                          const TruncationProfile& pr, bool homogeneous_codim = false, int codim = 0) {
  std::uniform_int_distribution<int> num(-5, 5), den(1, 4), expo(0, 2);
  CohElement e = CohElement::zero(t, vars, pr);
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (homogeneous_codim && t.codim(i) != codim) continue;
    std::vector<Term> terms;
    for (int k = 0; k < 3; ++k) {
      Monomial m;
      for (std::size_t v = 0; v < vars->size(); ++v) m[v] = static_cast<std::uint8_t>(expo(rng));
      terms.emplace_back(m, Rational(num(rng), den(rng)));
    }
    e[i] = TruncatedPoly::from_terms(vars, pr, std::move(terms));
  }
  return e;
}

std::string json_of(const std::string& body) { return "{" + body + "}"; }

}  // namespace

TEST_CASE("builtin targets") {
  auto p1 = builtin_target("p1");
  CHECK(p1.dim() == 1);
  CHECK(p1.size() == 2);
  CHECK(p1.basis(1).name == "h");
  CHECK(p1.c1() == std::vector<int>{2});
  auto p2 = builtin_target("p2");
  CHECK(p2.dim() == 2);
  CHECK(p2.c1() == std::vector<int>{3});
  CHECK(p2.cup_coeff(1, 1, 2) == 1);
  auto pp = builtin_target("p1xp1");
  CHECK(pp.dim() == 2);
  CHECK(pp.curve_rank() == 2);
  CHECK(pp.c1() == std::vector<int>{2, 2});
  CHECK(pp.divisor_degree(1, {1, 0}) == 1);
  CHECK(pp.divisor_degree(2, {1, 0}) == 0);
  CHECK(pp.ample_degree({2, 3}) == 5);
  CHECK(builtin_target("p3").point() == 3);
  CHECK_THROWS_AS(builtin_target("p4"), UsageError);
}

TEST_CASE("config round trip and axiom rejection") {
  for (const auto& name : builtin_target_names()) {
    auto t = builtin_target(name);
    CHECK(load_target(target_to_json(t)) == t);
  }
  const std::string basis =
      R"("name":"x","dim":1,"basis":[{"name":"1","codim":0},{"name":"h","codim":1}],"curveRank":1,"c1":[2],)";
  const std::string cup = R"("cup":[{"i":0,"j":0,"k":0,"coeff":1},{"i":0,"j":1,"k":1,"coeff":1},{"i":1,"j":0,"k":1,"coeff":1}],)";
  CHECK_NOTHROW(load_target(json_of(basis + cup + R"("pairing":[{"i":0,"j":1,"value":1},{"i":1,"j":0,"value":1}])")));
  try {
    load_target(json_of(basis + cup + R"("pairing":[{"i":0,"j":1,"value":1},{"i":1,"j":0,"value":"2"}])"));
    FAIL("non-symmetric pairing accepted");
  } catch (const InvalidTarget& e) {
    CHECK(std::string(e.what()).find("symmetric") != std::string::npos);
  }
  CHECK_THROWS_AS(load_target("{not json"), ParseError);
  CHECK_THROWS_AS(load_target(json_of(R"("name":"x")")), ParseError);
}

TEST_CASE("non-associative structure constants are rejected") {
  // a*a = s, a*b = s, a*s = pt, b*s = 0: (a*a)*b = 0 but a*(a*b) = pt
  TargetModel::Data d;
  d.name = "bad";
  d.dim = 3;
  d.basis = {{"1", 0}, {"a", 1}, {"b", 1}, {"s", 2}, {"pt", 3}};
  std::size_t n = 5;
  d.cup.assign(n, RationalMatrix(n, std::vector<Rational>(n, Rational(0))));
  for (std::size_t i = 0; i < n; ++i) d.cup[0][i][i] = d.cup[i][0][i] = 1;
  auto set = [&](int i, int j, int k) { d.cup[i][j][k] = d.cup[j][i][k] = 1; };
  set(1, 1, 3);
  set(1, 2, 3);
  set(1, 3, 4);
  d.pairing.assign(n, std::vector<Rational>(n, Rational(0)));
  d.curve_rank = 1;
  d.c1 = {4};
  try {
    TargetModel t(d);
    FAIL("accepted");
  } catch (const InvalidTarget& e) {
    CHECK(std::string(e.what()).find("associative") != std::string::npos);
  }
}

TEST_CASE("cup, integrate and the pairing inverse") {
  auto p2 = builtin_target("p2");
  auto vars = VariableTable::make(1);
  auto pr = prof(1, 2, 2);
  auto h = CohElement::basis(p2, vars, pr, 1);
  auto one = CohElement::basis(p2, vars, pr, 0);
  CHECK(cup(p2, h, h) == CohElement::basis(p2, vars, pr, 2));
  CHECK(cup(p2, one, h) == h);
  auto p1 = builtin_target("p1");
  auto h1 = CohElement::basis(p1, vars, pr, 1);
  CHECK(cup(p1, h1, h1).is_zero());
  CHECK(to_string(integrate(p2, CohElement::basis(p2, vars, pr, 2))) == "1");
  CHECK(integrate(p2, one).is_zero());
  auto mixed = from_rationals(p2, vars, pr, {0, 5, Rational(3, 2)});
  CHECK(to_string(integrate(p2, mixed)) == "3/2");
  CHECK(p1.pairing_inverse() == RationalMatrix{{0, 1}, {1, 0}});
  CHECK(p2.pairing_inverse() == p2.data().pairing);
  // p1xp1: pairing swaps 1<->pt and h1<->h2, so it is its own inverse
  auto pp = builtin_target("p1xp1");
  RationalMatrix want(4, std::vector<Rational>(4, Rational(0)));
  want[0][3] = want[3][0] = want[1][2] = want[2][1] = 1;
  CHECK(pp.pairing_inverse() == want);
  for (const auto& name : builtin_target_names()) {
    auto t = builtin_target(name);
    auto v = VariableTable::make(t.curve_rank());
    auto p = prof(t.curve_rank(), 1, 1);
    for (std::size_t i = 0; i < t.size(); ++i)
      for (std::size_t j = 0; j < t.size(); ++j) {
        auto c = integrate(t, cup(t, CohElement::basis(t, v, p, i), CohElement::basis(t, v, p, j)));
        CHECK(c == TruncatedPoly::constant(v, p, t.pairing(i, j)));
        Rational s = 0;
        for (std::size_t l = 0; l < t.size(); ++l) s += t.pairing_inverse()[i][l] * t.pairing(l, j);
        CHECK(s == Rational(i == j));
      }
  }
}

TEST_CASE("exp_alg") {
  auto p1 = builtin_target("p1");
  auto vars = VariableTable::make(1, {"y0", "y1"});
  auto pr = prof(1, 2, 2, 3);
  CHECK(exp_alg(p1, CohElement::zero(p1, vars, pr)) == CohElement::basis(p1, vars, pr, 0));
  auto y1h = CohElement::zero(p1, vars, pr);
  y1h[1] = TruncatedPoly::variable(vars, pr, vars->index_of("y1"));
  CHECK(to_string(p1, exp_alg(p1, y1h)) == "1 + y1*h");
  auto p2 = builtin_target("p2");
  auto zh = CohElement::zero(p2, vars, pr);
  zh[1] = parse_poly("2*z", vars, pr);
  CHECK(to_string(p2, exp_alg(p2, zh)) == "1 + 2*z*h + 2*z^2*h2");
}

TEST_CASE("vdim") {
  auto p2 = builtin_target("p2");
  CHECK(vdim(p2, {1}, 3) == 5);
  CHECK(vdim(builtin_target("p1"), {1}, 2) == 2);
  CHECK(vdim(p2, {0}, 3) == 2);
  CHECK_THROWS_AS(vdim(p2, {-1}, 3), UsageError);
  CHECK(vdim(builtin_target("p1xp1"), {1, 2}, 1) == 6);
}

TEST_CASE("basis expressions and rendering") {
  auto p2 = builtin_target("p2");
  CHECK(parse_basis_expr(p2, "2*h2 + 3*h - 1/2") == std::vector<Rational>{Rational(-1, 2), 3, 2});
  CHECK(parse_basis_expr(p2, "1") == std::vector<Rational>{1, 0, 0});
  CHECK_THROWS_AS(parse_basis_expr(p2, "2*w"), ParseError);
  auto vars = VariableTable::make(1);
  auto pr = prof(1, 2, 0);
  CohElement e = CohElement::zero(p2, vars, pr);
  e[0] = parse_poly("q", vars, pr);
  CHECK(to_string(p2, e) == "q");
  e[1] = parse_poly("1 - q", vars, pr);
  CHECK(to_string(p2, e) == "q + (1 - q)*h");
}

TEST_CASE("cup algebra properties on random elements") {
  std::mt19937 rng(99);
  for (const auto& name : builtin_target_names()) {
    auto t = builtin_target(name);
    auto vars = VariableTable::make(t.curve_rank(), {"y"});
    auto pr = prof(t.curve_rank(), 2, 2, 2);
    for (int trial = 0; trial < 20; ++trial) {
      auto a = random_element(rng, t, vars, pr), b = random_element(rng, t, vars, pr),
           c = random_element(rng, t, vars, pr);
      CHECK(cup(t, a, cup(t, b, c)) == cup(t, cup(t, a, b), c));
      CHECK(cup(t, a, b) == cup(t, b, a));
      int ca = trial % (t.dim() + 1), cb = (trial / 3) % (t.dim() + 1);
      auto ha = random_element(rng, t, vars, pr, true, ca), hb = random_element(rng, t, vars, pr, true, cb);
      auto prod = cup(t, ha, hb);
      for (std::size_t k = 0; k < t.size(); ++k)
        if (t.codim(k) != ca + cb) CHECK(prod[k].is_zero());
      // exp_alg(a) exp_alg(-a) = 1 needs a terminating scalar part
      auto n = random_element(rng, t, vars, pr);
      n[0] = n[0] - n[0].constant_like(n[0].constant_term());
      n[0] = n[0] * parse_poly("z", vars, pr);
      auto one = cup(t, exp_alg(t, n), exp_alg(t, n * Rational(-1)));
      CHECK(one == CohElement::basis(t, vars, pr, 0));
    }
  }
}
