// Acceptance run. Prints one PASS/FAIL line per criterion.

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tqc/kockcmp.hpp"
#include "tqc/seeds.hpp"
#include "tqc/wdvv.hpp"

using namespace tqc;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

TruncationProfile prof(int rank, int q, int z) {
  TruncationProfile pr;
  pr.q_caps.assign(rank, q);
  pr.z_cap = z;
  return pr;
}

DescendantTable seeded(const std::string& name) {
  DescendantTable tab(builtin_target(name));
  add_base_seeds(tab);
  return tab;
}

Rational rat(long n, long d) {
  Rational r(n, d);
  r.canonicalize();
  return r;
}

bool starts(const std::string& s, const char* p) { return s.rfind(p, 0) == 0; }

const std::vector<std::string> kTargets = {"p1", "p2", "p1xp1"};
const ChiSpec kChi{ChiSpec::Kind::Random, 5, {}};

// tables for criteria 1 and 2, q cap 3 and z cap 4
struct Config {
  std::string target;
  std::vector<std::unique_ptr<DescendantTable>> tables;  // by d
  std::vector<VerifyReport> reports;
  std::string d2_solve;  // empty when the d = 2 solve went through
  TruncationProfile profile;
};

std::vector<Config>& configs() {
  static std::vector<Config> all = [] {
    std::vector<Config> out;
    for (const auto& name : kTargets) {
      Config c;
      c.target = name;
      auto tab = std::make_unique<DescendantTable>(seeded(name));
      c.profile = prof(tab->target().curve_rank(), 3, 4);
      SolveOptions o;
      o.profile = c.profile;
      for (int d = 0; d <= 2; ++d) {
        auto next = std::make_unique<DescendantTable>(d == 0 ? *tab : *c.tables.back());
        o.d = d;
        if (d < 2) {
          solve(*next, o);
        } else {
          try {
            solve(*next, o);
          } catch (const InconsistentSystem& e) {
            c.d2_solve = e.what();
            // fall back to the recursion values so the ring checks can still run
            next = std::make_unique<DescendantTable>(*c.tables.back());
            fill_psi(*next, 2, c.profile, kChi);
          }
        }
        c.reports.push_back(verify_suite(*next, d, c.profile, kChi));
        c.tables.push_back(std::move(next));
      }
      out.push_back(std::move(c));
    }
    return out;
  }();
  return all;
}

Outcome criterion1() {
  Outcome o;
  int checks = 0;
  for (auto& c : configs())
    for (int d = 0; d <= 2; ++d) {
      const auto& rep = c.reports[d];
      std::string where = c.target + " d=" + std::to_string(d);
      if (!rep.complete()) {
        o.fail(where + ": " + std::to_string(rep.missing.size()) + " invariants missing");
        continue;
      }
      for (const auto& ch : rep.checks) {
        if (!starts(ch.name, "identity") && !starts(ch.name, "commutativity")) continue;
        ++checks;
        if (!ch.pass) o.fail(where + " " + ch.name + ": " + ch.detail);
      }
    }
  if (o.pass) o.detail = std::to_string(checks) + " checks over 9 configurations";
  return o;
}

Outcome criterion2() {
  Outcome o;
  std::vector<std::string> bad;
  int checks = 0;
  for (auto& c : configs())
    for (int d = 0; d <= 2; ++d) {
      const auto& rep = c.reports[d];
      std::string where = c.target + " d=" + std::to_string(d);
      if (!rep.complete()) {
        bad.push_back(where + " incomplete");
        continue;
      }
      int failed = 0;
      for (const auto& ch : rep.checks) {
        if (!starts(ch.name, "associativity")) continue;
        ++checks;
        if (!ch.pass) ++failed;
      }
      if (d == 2 && !c.d2_solve.empty()) {
        std::ostringstream os;
        os << where << " solve inconsistent, recursion values leave " << failed << " nonzero residuals";
        if (auto l = rep.leading_q_degree()) os << " from q-degree " << *l;
        bad.push_back(os.str());
      } else if (failed) {
        bad.push_back(where + " " + std::to_string(failed) + " nonzero residuals");
      }
    }
  // symbolic chi on p2
  {
    auto tab = seeded("p2");
    SolveOptions so;
    so.profile = prof(1, 1, 2);
    so.d = 1;
    solve(tab, so);
    auto rep = verify_suite(tab, 1, so.profile, ChiSpec{ChiSpec::Kind::Symbolic, 0, {}});
    if (!rep.passed()) bad.push_back("symbolic p2 d=1 fails");
  }
  std::string text;
  for (const auto& b : bad) text += (text.empty() ? "" : "; ") + b;
  o.pass = bad.empty();
  o.detail = o.pass ? std::to_string(checks) + " triples plus the symbolic run" : text;
  return o;
}

Outcome criterion3() {
  Outcome o;
  // two-term recursion for plane rational curves through 3m - 1 points
  auto choose = [](int n, int k) {
    Rational r = 1;
    for (int i = 1; i <= k; ++i) r *= rat(n - k + i, i);
    return r;
  };
  std::vector<Rational> oracle(6, 0);
  oracle[1] = 1;
  for (int m = 2; m <= 5; ++m)
    for (int a = 1; a < m; ++a) {
      int b = m - a;
      oracle[m] += oracle[a] * oracle[b] *
                   (Rational(a * a * b * b) * choose(3 * m - 4, 3 * a - 2) -
                    Rational(a * a * a * b) * choose(3 * m - 4, 3 * a - 1));
    }
  const std::vector<long> expected = {0, 1, 1, 12, 620, 87304};
  auto tab = seeded("p2");
  SolveOptions so;
  so.profile = prof(1, 5, 0);
  solve(tab, so);
  const auto& t = tab.target();
  std::string got;
  for (int m = 1; m <= 5; ++m) {
    if (oracle[m] != expected[m]) o.fail("oracle gives " + to_string(oracle[m]) + " at m=" + std::to_string(m));
    auto r = tab.lookup(normalize_key(t, {m}, std::vector<Insertion>(3 * m - 1, Insertion{0, t.point()})));
    std::string v = r.kind == LookupResult::Kind::Value ? to_string(r.value) : "?";
    got += (m > 1 ? ", " : "") + v;
    if (r.kind != LookupResult::Kind::Value || r.value != oracle[m]) o.fail("m=" + std::to_string(m) + " gives " + v);
  }
  if (o.pass) o.detail = got;
  return o;
}

Outcome criterion4() {
  Outcome o;
  int runs = 0;
  for (const char* name : {"p1", "p2"}) {
    auto tab = seeded(name);
    SolveOptions so;
    so.profile = prof(1, 2, 3);
    so.d = 1;
    solve(tab, so);
    std::vector<KockOptions> all;
    for (std::uint64_t seed : {3, 5, 6, 7, 11}) {
      KockOptions k;
      k.q_cap = 2;
      k.z_cap = 3;
      k.chi = ChiSpec{ChiSpec::Kind::Random, seed, {}};
      all.push_back(k);
    }
    KockOptions sym;
    sym.q_cap = 1;
    sym.z_cap = 2;
    sym.chi.kind = ChiSpec::Kind::Symbolic;
    all.push_back(sym);
    for (const auto& k : all) {
      auto rep = compare_kock(tab, k);
      ++runs;
      bool pairing = false;
      for (const auto& ch : rep.checks) pairing = pairing || starts(ch.name, "pairing");
      if (!rep.complete())
        o.fail(std::string(name) + ": " + std::to_string(rep.missing.size()) + " invariants missing");
      else if (!rep.passed())
        o.fail(std::string(name) + ": nonzero residual");
      else if (!pairing)
        o.fail(std::string(name) + ": no pairing checks ran");
    }
  }
  if (o.pass) o.detail = std::to_string(runs) + " runs on p1 and p2, products and pairings";
  return o;
}

// random class of one codimension (zero when nothing lives there)
CohElement random_class(std::mt19937& rng, const TargetModel& t, const VarTablePtr& vars,
                        const TruncationProfile& pr, int codim) {
  std::uniform_int_distribution<int> num(-9, 9), den(1, 9);
  CohElement c = CohElement::zero(t, vars, pr);
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t.codim(i) != codim) continue;
    int n = num(rng);
    if (n == 0) n = 1;
    c += CohElement::basis(t, vars, pr, i, rat(n, den(rng)));
  }
  return c;
}

Outcome criterion5() {
  Outcome o;
  std::mt19937 rng(2024);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  std::vector<std::string> names = {"p1", "p2", "p3", "p1xp1"};
  std::map<std::string, std::unique_ptr<DescendantTable>> solved;
  for (const auto& n : names) {
    auto tab = std::make_unique<DescendantTable>(seeded(n));
    SolveOptions so;
    so.profile = prof(tab->target().curve_rank(), 2, 2);
    solve(*tab, so);
    solved[n] = std::move(tab);
  }
  int fails[4] = {0, 0, 0, 0};
  int nonzero[4] = {0, 0, 0, 0};

  // zero-class three-point values are triple intersections
  for (int i = 0; i < 100; ++i) {
    const auto& tab = *solved[names[i % names.size()]];
    const auto& t = tab.target();
    auto vars = VariableTable::make(t.curve_rank());
    auto pr = prof(t.curve_rank(), 0, 0);
    EvalContext ctx{&tab, nullptr, vars, pr};
    int c1 = pick(0, t.dim()), c2 = pick(0, t.dim() - c1), c3 = i % 5 ? t.dim() - c1 - c2 : pick(0, t.dim());
    std::vector<GeneralInsertion> ins = {{0, random_class(rng, t, vars, pr, c1)},
                                         {0, random_class(rng, t, vars, pr, c2)},
                                         {0, random_class(rng, t, vars, pr, c3)}};
    std::set<DescendantKey> missing;
    auto lhs = multilinear_eval(ctx, CurveClass(t.curve_rank(), 0), ins, missing);
    auto rhs = integrate(t, cup(t, cup(t, ins[0].cls, ins[1].cls), ins[2].cls));
    if (!lhs || !(*lhs == rhs)) ++fails[0];
    if (!rhs.is_zero()) ++nonzero[0];
  }

  // {g_1..g_n, g} equals the integral of gw_class(g_1..g_n) cup g
  for (int i = 0; i < 100;) {
    const auto& tab = *solved[names[pick(0, 3)]];
    const auto& t = tab.target();
    auto vars = VariableTable::make(t.curve_rank());
    auto pr = prof(t.curve_rank(), 2, 0);
    EvalContext ctx{&tab, nullptr, vars, pr};
    CurveClass delta(t.curve_rank(), 0);
    for (auto& x : delta) x = pick(0, t.curve_rank() == 1 ? 2 : 1);
    int n = pick(1, 3);
    if (is_zero_class(delta)) n = 2;
    std::vector<GeneralInsertion> ins;
    int used = 0;
    for (int s = 0; s < n; ++s) {
      int c = pick(1, t.dim());
      used += c;
      ins.push_back({0, random_class(rng, t, vars, pr, c)});
    }
    // mostly the codimension that makes the invariant live
    int rest = vdim(t, delta, n + 1) - used;
    auto omega = random_class(rng, t, vars, pr, i % 5 && rest >= 0 && rest <= t.dim() ? rest : pick(0, t.dim()));
    std::set<DescendantKey> missing;
    std::optional<CohElement> g;
    try {
      g = gw_class(ctx, delta, ins, missing);
    } catch (const DegenerateKey&) {
      continue;
    }
    auto all = ins;
    all.push_back({0, omega});
    auto lhs = multilinear_eval(ctx, delta, all, missing);
    if (!g || !lhs) continue;  // outside what the solved table covers
    ++i;
    auto rhs = integrate(t, cup(t, *g, omega));
    if (!(*lhs == rhs)) ++fails[1];
    if (!rhs.is_zero()) ++nonzero[1];
  }

  // 1 bullet beta = 0
  for (int i = 0; i < 100; ++i) {
    const auto& tab = *solved[names[i % names.size()]];
    const auto& t = tab.target();
    int d = pick(0, 2);
    ChiSpec spec{ChiSpec::Kind::Random, static_cast<std::uint64_t>(100 + i), {}};
    auto pr = prof(t.curve_rank(), 1, 1);
    auto vars = chi_variables(t, spec, d);
    EvalContext ctx{&tab, nullptr, vars, pr};
    auto chi = make_deforming(t, spec, d, vars, pr);
    auto beta = random_class(rng, t, vars, pr, pick(0, t.dim()));
    auto b = bullet(ctx, chi, CohElement::basis(t, vars, pr, t.identity()), beta);
    if (!b.known() || !b.value->is_zero()) ++fails[2];
    if (!beta.is_zero()) ++nonzero[2];
  }

  // keys off the virtual dimension are zero, whatever the table holds
  for (int i = 0; i < 100;) {
    const auto& tab = *solved[names[pick(0, 3)]];
    const auto& t = tab.target();
    CurveClass delta(t.curve_rank(), 0);
    for (auto& x : delta) x = pick(0, 3);
    bool flat = is_zero_class(delta);
    int n = flat ? 3 : pick(1, 6);
    std::vector<Insertion> ins;
    int sum = 0;
    for (int s = 0; s < n; ++s) {
      Insertion x{flat ? 0 : pick(0, 2), static_cast<std::size_t>(pick(0, static_cast<int>(t.size()) - 1))};
      sum += x.a + t.codim(x.index);
      ins.push_back(x);
    }
    if (sum == vdim(t, delta, n)) continue;
    ++i;
    auto key = normalize_key(t, delta, ins);
    if (tab.lookup(key).kind != LookupResult::Kind::Zero) ++fails[3];
    auto vars = VariableTable::make(t.curve_rank());
    EvalContext ctx{&tab, nullptr, vars, prof(t.curve_rank(), 3, 0)};
    std::vector<GeneralInsertion> gen;
    for (const auto& x : ins) gen.push_back({x.a, random_class(rng, t, vars, ctx.profile, t.codim(x.index))});
    std::set<DescendantKey> missing;
    auto v = multilinear_eval(ctx, delta, gen, missing);
    if (!v || !v->is_zero()) ++fails[3];
    ++nonzero[3];
  }

  const char* what[4] = {"three-point", "output factorization", "fundamental class", "dimension filter"};
  std::string counts;
  for (int k = 0; k < 4; ++k) {
    if (fails[k]) o.fail(std::string(what[k]) + ": " + std::to_string(fails[k]) + " of 100 fail");
    counts += (k ? ", " : "") + std::string(what[k]) + " " + std::to_string(nonzero[k]) + " nontrivial";
  }
  if (o.pass) o.detail = "4 x 100 cases (" + counts + ")";
  return o;
}

TruncatedPoly random_poly(std::mt19937& rng, const VarTablePtr& vars, const TruncationProfile& pr) {
  std::uniform_int_distribution<int> nterms(0, 6), expo(0, 3), num(-9, 9), den(1, 9);
  std::vector<Term> terms;
  int n = nterms(rng);
  for (int i = 0; i < n; ++i) {
    Monomial m;
    for (std::size_t v = 0; v < vars->size(); ++v) m[v] = static_cast<std::uint8_t>(expo(rng));
    terms.emplace_back(m, rat(num(rng), den(rng)));
  }
  return TruncatedPoly::from_terms(vars, pr, std::move(terms));
}

Outcome criterion6() {
  Outcome o;
  std::mt19937 rng(99);
  auto vars = VariableTable::make(2, {"y0", "y1"});
  TruncationProfile big = prof(2, 3, 3), small = prof(2, 2, 1);
  big.param_cap = 4;
  small.param_cap = 3;
  int ring_fail = 0;
  for (int i = 0; i < 1000; ++i) {
    auto a = random_poly(rng, vars, big), b = random_poly(rng, vars, big), c = random_poly(rng, vars, big);
    bool ok = a * b == b * a && (a * b) * c == a * (b * c) && a * (b + c) == a * b + a * c &&
              (a + b) + c == a + (b + c) && (a - a).is_zero() && a * a.constant_like(1) == a &&
              truncate(a * b, small) == truncate(truncate(a, small) * truncate(b, small), small) &&
              truncate(a + b, small) == truncate(a, small) + truncate(b, small) && (a * b).invariants_hold();
    if (!ok) ++ring_fail;
  }
  if (ring_fail) o.fail(std::to_string(ring_fail) + " of 1000 polynomial cases fail");

  int trips = 0;
  auto round_trip = [&](const DescendantTable& tab) {
    auto text = persist_text(tab);
    DescendantTable back(tab.target());
    ingest_text(back, text);
    ++trips;
    if (persist_text(back) != text) o.fail("round trip changes the " + tab.target().name() + " table");
  };
  for (auto& c : configs())
    for (const auto& tab : c.tables) round_trip(*tab);
  // shuffled insertion order gives the same bytes
  for (auto& c : configs()) {
    const auto& full = *c.tables.back();
    std::vector<std::pair<DescendantKey, DescendantTable::Entry>> entries(full.entries().begin(), full.entries().end());
    std::shuffle(entries.begin(), entries.end(), rng);
    DescendantTable tab(full.target());
    for (const auto& [k, e] : entries) tab.insert(k, e.value, e.src);
    ++trips;
    if (persist_text(tab) != persist_text(full)) o.fail("persist depends on insertion order");
  }

  int inverses = 0;
  for (const char* name : {"p1", "p2", "p3", "p1xp1"}) {
    auto t = builtin_target(name);
    auto kvars = kock_variable_table(t);
    auto kv = kock_variables(t, kvars);
    for (int cap = 0; cap <= 4; ++cap) {
      TruncationProfile pr = prof(t.curve_rank(), 0, 0);
      pr.param_cap = cap;
      auto m = deformed_metric(t, kvars, kv, pr);
      for (std::size_t i = 0; i < t.size(); ++i)
        for (std::size_t j = 0; j < t.size(); ++j) {
          TruncatedPoly s(kvars, pr);
          for (std::size_t k = 0; k < t.size(); ++k) s += m.gamma[i][k] * m.inverse[k][j];
          if (!(s == s.constant_like(i == j ? 1 : 0))) o.fail(std::string(name) + " metric inverse at cap " + std::to_string(cap));
        }
      ++inverses;
    }
  }
  if (o.pass)
    o.detail = "1000 polynomial cases, " + std::to_string(trips) + " round trips, " + std::to_string(inverses) +
               " metric inverses";
  return o;
}

Outcome criterion7() {
  Outcome o;
  std::mt19937 rng(7);
  struct Setup {
    const char* name;
    int q, z;
  };
  std::vector<std::string> seen;
  for (const auto& s : {Setup{"p2", 3, 5}, Setup{"p1xp1", 2, 4}}) {
    auto tab = seeded(s.name);
    SolveOptions so;
    so.profile = prof(tab.target().curve_rank(), s.q, s.z);
    solve(tab, so);
    std::vector<DescendantKey> keys;
    for (const auto& [k, e] : tab.entries())
      if (e.src == Provenance::Solved) keys.push_back(k);
    for (int i = 0; i < 5; ++i) {
      const auto key = keys[std::uniform_int_distribution<std::size_t>(0, keys.size() - 1)(rng)];
      Rational old = tab.entries().at(key).value;
      tab.force(key, old + 1, Provenance::Solved);
      auto rep = verify_suite(tab, 0, so.profile, kChi);
      tab.force(key, old, Provenance::Solved);
      int degree = 0;
      for (int x : key.delta) degree += x;
      std::string label = to_string(tab.target(), key);
      seen.push_back(label);
      if (!rep.complete())
        o.fail(label + ": incomplete");
      else if (rep.passed())
        o.fail(label + ": perturbation not detected");
      else if (*rep.leading_q_degree() != degree)
        o.fail(label + ": leading q-degree " + std::to_string(*rep.leading_q_degree()) + ", key degree " +
               std::to_string(degree));
    }
  }
  if (o.pass) o.detail = std::to_string(seen.size()) + " perturbations detected at their own degree";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance run"};
  std::vector<int> known;
  app.add_option("--known-deviation", known, "criterion expected to fail; it is reported but does not set the exit code");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<const char*, std::function<Outcome()>>> all = {
      {"identity and commutativity", criterion1},
      {"associativity", criterion2},
      {"plane curve counts", criterion3},
      {"agreement with the first-order comparison product", criterion4},
      {"lemma suite", criterion5},
      {"kernel properties", criterion6},
      {"negative control", criterion7},
  };
  int bad = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    int n = static_cast<int>(i) + 1;
    auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = all[i].second();
    } catch (const std::exception& e) {
      out.fail(std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool expected = std::find(known.begin(), known.end(), n) != known.end();
    std::ostringstream line;
    line.precision(1);
    line << std::fixed << (out.pass ? "PASS" : "FAIL") << " " << n << " " << all[i].first << " [" << secs
         << " s]: " << out.detail;
    if (!out.pass && expected) line << " (known deviation)";
    std::cout << line.str() << std::endl;
    if (!out.pass && !expected) ++bad;
  }
  return bad == 0 ? 0 : 1;
}
