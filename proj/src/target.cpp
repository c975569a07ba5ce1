#include "tqc/target.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace tqc {

namespace {

RationalMatrix square(std::size_t n) { return RationalMatrix(n, std::vector<Rational>(n, Rational(0))); }

void fail(const std::string& axiom) { throw InvalidTarget("invalid target: " + axiom); }

}  // namespace

RationalMatrix invert(const RationalMatrix& m) {
  std::size_t n = m.size();
  RationalMatrix a = m, inv = square(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i].size() != n) throw InvalidTarget("invert: matrix is not square");
    inv[i][i] = 1;
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && a[piv][col] == 0) ++piv;
    if (piv == n) throw InvalidTarget("invalid target: pairing is singular");
    std::swap(a[piv], a[col]);
    std::swap(inv[piv], inv[col]);
    Rational s = 1 / a[col][col];
    for (std::size_t j = 0; j < n; ++j) {
      a[col][j] *= s;
      inv[col][j] *= s;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col] == 0) continue;
      Rational f = a[r][col];
      for (std::size_t j = 0; j < n; ++j) {
        a[r][j] -= f * a[col][j];
        inv[r][j] -= f * inv[col][j];
      }
    }
  }
  return inv;
}

TargetModel::TargetModel(Data data) : d_(std::move(data)) {
  const std::size_t n = d_.basis.size();
  const int r = d_.dim;
  if (r < 0) fail("negative dimension");
  if (n == 0) fail("empty basis");
  for (std::size_t i = 0; i < n; ++i) {
    if (d_.basis[i].codim < 0 || d_.basis[i].codim > r) fail("codim out of range for " + d_.basis[i].name);
    for (std::size_t j = 0; j < i; ++j)
      if (d_.basis[i].name == d_.basis[j].name) fail("duplicate basis name " + d_.basis[i].name);
  }
  if (d_.basis[0].codim != 0) fail("basis[0] must be the identity (codim 0)");
  int points = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (d_.basis[i].codim == r) {
      point_ = i;
      ++points;
    }
  if (points != 1) fail("exactly one basis element must have codim dim");
  if (d_.cup.size() != n) fail("cup table has wrong shape");
  for (auto& row : d_.cup) {
    if (row.size() != n) fail("cup table has wrong shape");
    for (auto& v : row)
      if (v.size() != n) fail("cup table has wrong shape");
  }
  if (d_.pairing.size() != n) fail("pairing has wrong shape");
  for (auto& row : d_.pairing)
    if (row.size() != n) fail("pairing has wrong shape");

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (d_.pairing[i][j] != d_.pairing[j][i]) fail("pairing is not symmetric");
      if (d_.pairing[i][j] != 0 && codim(i) + codim(j) != r) fail("pairing violates the grading");
      for (std::size_t k = 0; k < n; ++k) {
        const Rational& c = d_.cup[i][j][k];
        if (c != d_.cup[j][i][k]) fail("cup is not commutative");
        if (c != 0 && codim(i) + codim(j) != codim(k)) fail("cup violates the grading");
        Rational want = (i == 0 ? Rational(j == k) : Rational(0));
        if (i == 0 && c != want) fail("basis[0] is not the cup identity");
      }
    }
  // (T_i T_j) T_k = T_i (T_j T_k)
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t m = 0; m < n; ++m) {
          Rational lhs = 0, rhs = 0;
          for (std::size_t l = 0; l < n; ++l) {
            lhs += d_.cup[i][j][l] * d_.cup[l][k][m];
            rhs += d_.cup[j][k][l] * d_.cup[i][l][m];
          }
          if (lhs != rhs) fail("cup is not associative");
        }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (d_.pairing[i][j] != d_.cup[i][j][point_]) fail("pairing disagrees with integral of the cup product");
  inverse_ = invert(d_.pairing);

  if (d_.curve_rank < 0) fail("negative curve rank");
  if (static_cast<int>(d_.c1.size()) != d_.curve_rank) fail("c1 length differs from curveRank");
  std::vector<std::size_t> divisors;
  for (std::size_t i = 0; i < n; ++i)
    if (codim(i) == 1) divisors.push_back(i);
  if (d_.divisor_pairing.empty()) {
    // default: codim-1 classes dual to the lattice generators
    d_.divisor_pairing.assign(n, std::vector<int>(d_.curve_rank, 0));
    if (static_cast<int>(divisors.size()) == d_.curve_rank) {
      for (std::size_t c = 0; c < divisors.size(); ++c) d_.divisor_pairing[divisors[c]][c] = 1;
    } else if (d_.curve_rank > 0) {
      fail("divisorPairing required when the number of codim-1 classes differs from curveRank");
    }
  }
  if (d_.divisor_pairing.size() != n) fail("divisorPairing has wrong shape");
  for (std::size_t i = 0; i < n; ++i) {
    if (static_cast<int>(d_.divisor_pairing[i].size()) != d_.curve_rank) fail("divisorPairing has wrong shape");
    if (codim(i) != 1)
      for (int v : d_.divisor_pairing[i])
        if (v != 0) fail("divisorPairing set on a class that is not codim 1");
  }
  if (d_.ample.empty()) {
    d_.ample.assign(n, Rational(0));
    for (auto i : divisors) d_.ample[i] = 1;
  }
  if (d_.ample.size() != n) fail("ample has wrong shape");
  for (std::size_t i = 0; i < n; ++i)
    if (d_.ample[i] != 0 && codim(i) != 1) fail("ample class must be a combination of codim-1 classes");
  if (d_.curve_rank > 0) {
    for (int c = 0; c < d_.curve_rank; ++c) {
      CurveClass e(d_.curve_rank, 0);
      e[c] = 1;
      if (ample_degree(e) <= 0) fail("ample class is not positive on every lattice generator");
    }
  }
}

std::size_t TargetModel::index_of(std::string_view basis_name) const {
  for (std::size_t i = 0; i < d_.basis.size(); ++i)
    if (d_.basis[i].name == basis_name) return i;
  throw UsageError("unknown basis element '" + std::string(basis_name) + "' for target " + d_.name);
}

int TargetModel::c1_degree(const CurveClass& delta) const {
  if (static_cast<int>(delta.size()) != d_.curve_rank) throw UsageError("curve class of wrong rank");
  int s = 0;
  for (int c = 0; c < d_.curve_rank; ++c) s += d_.c1[c] * delta[c];
  return s;
}

int TargetModel::divisor_degree(std::size_t i, const CurveClass& delta) const {
  if (static_cast<int>(delta.size()) != d_.curve_rank) throw UsageError("curve class of wrong rank");
  int s = 0;
  for (int c = 0; c < d_.curve_rank; ++c) s += d_.divisor_pairing[i][c] * delta[c];
  return s;
}

Rational TargetModel::ample_degree(const CurveClass& delta) const {
  Rational s = 0;
  for (std::size_t i = 0; i < size(); ++i)
    if (d_.ample[i] != 0) s += d_.ample[i] * divisor_degree(i, delta);
  return s;
}

bool TargetModel::operator==(const TargetModel& o) const {
  auto same_basis = [&] {
    if (d_.basis.size() != o.d_.basis.size()) return false;
    for (std::size_t i = 0; i < d_.basis.size(); ++i)
      if (d_.basis[i].name != o.d_.basis[i].name || d_.basis[i].codim != o.d_.basis[i].codim) return false;
    return true;
  };
  return d_.name == o.d_.name && d_.dim == o.d_.dim && same_basis() && d_.cup == o.d_.cup &&
         d_.pairing == o.d_.pairing && d_.curve_rank == o.d_.curve_rank && d_.c1 == o.d_.c1 &&
         d_.divisor_pairing == o.d_.divisor_pairing && d_.ample == o.d_.ample;
}

namespace {

TargetModel::Data projective_space(int r) {
  TargetModel::Data d;
  d.name = "p" + std::to_string(r);
  d.dim = r;
  std::size_t n = r + 1;
  for (int i = 0; i <= r; ++i) {
    std::string nm = i == 0 ? "1" : i == 1 ? "h" : "h" + std::to_string(i);
    d.basis.push_back({nm, i});
  }
  d.cup.assign(n, square(n));
  d.pairing = square(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i + j <= static_cast<std::size_t>(r)) d.cup[i][j][i + j] = 1;
      if (i + j == static_cast<std::size_t>(r)) d.pairing[i][j] = 1;
    }
  d.curve_rank = 1;
  d.c1 = {r + 1};
  return d;
}

TargetModel::Data p1xp1() {
  TargetModel::Data d;
  d.name = "p1xp1";
  d.dim = 2;
  d.basis = {{"1", 0}, {"h1", 1}, {"h2", 1}, {"pt", 2}};
  d.cup.assign(4, square(4));
  for (std::size_t i = 0; i < 4; ++i) {
    d.cup[0][i][i] = 1;
    d.cup[i][0][i] = 1;
  }
  d.cup[1][2][3] = 1;
  d.cup[2][1][3] = 1;
  d.pairing = square(4);
  d.pairing[0][3] = d.pairing[3][0] = 1;
  d.pairing[1][2] = d.pairing[2][1] = 1;
  d.curve_rank = 2;
  d.c1 = {2, 2};
  return d;
}

Rational json_rational(const nlohmann::json& j, const char* what) {
  if (j.is_number_integer()) return Rational(j.get<long>());
  if (j.is_string()) return parse_rational(j.get<std::string>());
  throw ParseError(std::string("target config: ") + what + " must be an integer or a \"p/q\" string");
}

std::size_t json_index(const nlohmann::json& entry, const char* key, std::size_t n) {
  if (!entry.contains(key) || !entry[key].is_number_integer())
    throw ParseError(std::string("target config: missing integer '") + key + "'");
  long v = entry[key].get<long>();
  if (v < 0 || static_cast<std::size_t>(v) >= n) throw ParseError(std::string("target config: index out of range in '") + key + "'");
  return static_cast<std::size_t>(v);
}

const nlohmann::json& require(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw ParseError(std::string("target config: missing key '") + key + "'");
  return j[key];
}

}  // namespace

TargetModel builtin_target(std::string_view name) {
  if (name == "p1") return TargetModel(projective_space(1));
  if (name == "p2") return TargetModel(projective_space(2));
  if (name == "p3") return TargetModel(projective_space(3));
  if (name == "p1xp1") return TargetModel(p1xp1());
  throw UsageError("unknown built-in target '" + std::string(name) + "'");
}

std::vector<std::string> builtin_target_names() { return {"p1", "p2", "p3", "p1xp1"}; }

TargetModel load_target(std::string_view config_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(config_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("target config: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("target config: top level must be an object");
  TargetModel::Data d;
  try {
    d.name = require(j, "name").get<std::string>();
    d.dim = require(j, "dim").get<int>();
    for (const auto& b : require(j, "basis")) d.basis.push_back({b.at("name").get<std::string>(), b.at("codim").get<int>()});
    std::size_t n = d.basis.size();
    d.cup.assign(n, square(n));
    for (const auto& e : require(j, "cup"))
      d.cup[json_index(e, "i", n)][json_index(e, "j", n)][json_index(e, "k", n)] = json_rational(e.at("coeff"), "coeff");
    d.pairing = square(n);
    for (const auto& e : require(j, "pairing"))
      d.pairing[json_index(e, "i", n)][json_index(e, "j", n)] = json_rational(e.at("value"), "value");
    d.curve_rank = require(j, "curveRank").get<int>();
    d.c1 = require(j, "c1").get<std::vector<int>>();
    if (j.contains("divisorPairing")) {
      d.divisor_pairing.assign(n, std::vector<int>(std::max(d.curve_rank, 0), 0));
      for (const auto& e : j["divisorPairing"]) {
        std::size_t c = json_index(e, "component", static_cast<std::size_t>(std::max(d.curve_rank, 0)));
        d.divisor_pairing[json_index(e, "i", n)][c] = e.at("value").get<int>();
      }
    }
    if (j.contains("ample")) {
      d.ample.assign(n, Rational(0));
      for (const auto& e : j["ample"]) d.ample[json_index(e, "i", n)] = json_rational(e.at("coeff"), "coeff");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("target config: ") + e.what());
  }
  return TargetModel(std::move(d));
}

std::string target_to_json(const TargetModel& t) {
  const auto& d = t.data();
  nlohmann::ordered_json j;
  j["name"] = d.name;
  j["dim"] = d.dim;
  j["basis"] = nlohmann::ordered_json::array();
  for (const auto& b : d.basis) j["basis"].push_back({{"name", b.name}, {"codim", b.codim}});
  j["cup"] = nlohmann::ordered_json::array();
  j["pairing"] = nlohmann::ordered_json::array();
  std::size_t n = t.size();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      for (std::size_t c = 0; c < n; ++c)
        if (d.cup[a][b][c] != 0) j["cup"].push_back({{"i", a}, {"j", b}, {"k", c}, {"coeff", to_string(d.cup[a][b][c])}});
      if (d.pairing[a][b] != 0) j["pairing"].push_back({{"i", a}, {"j", b}, {"value", to_string(d.pairing[a][b])}});
    }
  j["curveRank"] = d.curve_rank;
  j["c1"] = d.c1;
  j["divisorPairing"] = nlohmann::ordered_json::array();
  for (std::size_t a = 0; a < n; ++a)
    for (int c = 0; c < d.curve_rank; ++c)
      if (d.divisor_pairing[a][c] != 0)
        j["divisorPairing"].push_back({{"i", a}, {"component", c}, {"value", d.divisor_pairing[a][c]}});
  j["ample"] = nlohmann::ordered_json::array();
  for (std::size_t a = 0; a < n; ++a)
    if (d.ample[a] != 0) j["ample"].push_back({{"i", a}, {"coeff", to_string(d.ample[a])}});
  return j.dump(2) + "\n";
}

bool is_effective(const CurveClass& delta) {
  return std::all_of(delta.begin(), delta.end(), [](int v) { return v >= 0; });
}

bool is_zero_class(const CurveClass& delta) {
  return std::all_of(delta.begin(), delta.end(), [](int v) { return v == 0; });
}

std::vector<CurveClass> effective_classes(const TruncationProfile& profile) {
  std::vector<CurveClass> out;
  std::size_t k = profile.q_caps.size();
  if (k == 0) return out;
  CurveClass cur(k, 0);
  auto rec = [&](auto&& self, std::size_t c, int total) -> void {
    if (c == k) {
      if (total > 0 && (!profile.q_total_cap || total <= *profile.q_total_cap)) out.push_back(cur);
      return;
    }
    for (int v = 0; v <= profile.q_caps[c]; ++v) {
      cur[c] = v;
      self(self, c + 1, total + v);
    }
    cur[c] = 0;
  };
  rec(rec, 0, 0);
  std::stable_sort(out.begin(), out.end(), [](const CurveClass& a, const CurveClass& b) {
    int sa = 0, sb = 0;
    for (int v : a) sa += v;
    for (int v : b) sb += v;
    return sa != sb ? sa < sb : a < b;
  });
  return out;
}

TruncatedPoly q_power(const VarTablePtr& vars, const TruncationProfile& profile, const CurveClass& delta) {
  Monomial m;
  for (std::size_t c = 0; c < delta.size(); ++c) {
    if (delta[c] > kMaxExponent) return TruncatedPoly(vars, profile);
    m[vars->novikov_index(static_cast<int>(c))] = static_cast<std::uint8_t>(delta[c]);
  }
  return TruncatedPoly::monomial(vars, profile, m, 1);
}

int vdim(const TargetModel& t, const CurveClass& delta, int n_marks) {
  if (static_cast<int>(delta.size()) != t.curve_rank()) throw UsageError("vdim: curve class of wrong rank");
  if (!is_effective(delta)) throw UsageError("vdim: curve class is not effective");
  if (is_zero_class(delta) && n_marks < 3) throw UsageError("vdim: zero class needs at least 3 marks");
  return t.dim() + t.c1_degree(delta) + n_marks - 3;
}

// ---- CohElement ----

bool CohElement::is_zero() const {
  return std::all_of(coeffs.begin(), coeffs.end(), [](const TruncatedPoly& p) { return p.is_zero(); });
}

CohElement CohElement::zero(const TargetModel& t, const VarTablePtr& vars, const TruncationProfile& pr) {
  CohElement e;
  e.coeffs.assign(t.size(), TruncatedPoly(vars, pr));
  return e;
}

CohElement CohElement::basis(const TargetModel& t, const VarTablePtr& vars, const TruncationProfile& pr,
                             std::size_t i, const Rational& c) {
  CohElement e = zero(t, vars, pr);
  e.coeffs.at(i) = TruncatedPoly::constant(vars, pr, c);
  return e;
}

CohElement& CohElement::operator+=(const CohElement& o) {
  if (o.size() != size()) throw UsageError("cohomology elements of different size");
  for (std::size_t i = 0; i < size(); ++i) coeffs[i] += o.coeffs[i];
  return *this;
}

CohElement& CohElement::operator-=(const CohElement& o) {
  if (o.size() != size()) throw UsageError("cohomology elements of different size");
  for (std::size_t i = 0; i < size(); ++i) coeffs[i] -= o.coeffs[i];
  return *this;
}

CohElement& CohElement::operator*=(const TruncatedPoly& s) {
  for (auto& c : coeffs) c = c * s;
  return *this;
}

CohElement& CohElement::operator*=(const Rational& s) {
  for (auto& c : coeffs) c *= s;
  return *this;
}

CohElement cup(const TargetModel& t, const CohElement& a, const CohElement& b) {
  std::size_t n = t.size();
  if (a.size() != n || b.size() != n) throw UsageError("cup: element size differs from the target basis");
  CohElement out;
  auto prof = TruncationProfile::meet(a[0].profile(), b[0].profile());
  out.coeffs.assign(n, TruncatedPoly(a[0].vars(), prof));
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i].is_zero()) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (b[j].is_zero()) continue;
      TruncatedPoly prod = a[i] * b[j];
      if (prod.is_zero()) continue;
      for (std::size_t k = 0; k < n; ++k) {
        const Rational& c = t.cup_coeff(i, j, k);
        if (c != 0) out.coeffs[k] += prod * c;
      }
    }
  }
  return out;
}

TruncatedPoly integrate(const TargetModel& t, const CohElement& a) { return a.coeffs.at(t.point()); }

CohElement exp_alg(const TargetModel& t, const CohElement& a) {
  const auto& vars = a[0].vars();
  auto prof = a[0].profile();
  for (const auto& c : a.coeffs) prof = TruncationProfile::meet(prof, c.profile());
  TruncatedPoly scalar = exp_series(a[t.identity()]);
  CohElement nil = a;
  nil.coeffs[t.identity()] = TruncatedPoly(vars, prof);
  CohElement term = CohElement::basis(t, vars, prof, t.identity());
  CohElement sum = term;
  for (int m = 1; m <= t.dim(); ++m) {
    term = cup(t, term, nil) * Rational(1, m);
    if (term.is_zero()) break;
    sum += term;
  }
  return sum * scalar;
}

CohElement truncate(const CohElement& a, const TruncationProfile& pr) {
  CohElement out;
  for (const auto& c : a.coeffs) out.coeffs.push_back(truncate(c, pr));
  return out;
}

std::string to_string(const TargetModel& t, const CohElement& a) {
  std::vector<std::string> parts;
  std::size_t nonzero = 0;
  for (const auto& c : a.coeffs)
    if (!c.is_zero()) ++nonzero;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& c = a[i];
    if (c.is_zero()) continue;
    std::string s = to_string(c);
    bool single = c.size() == 1;
    if (i == t.identity()) {
      parts.push_back(single || nonzero == 1 ? s : "(" + s + ")");
    } else if (s == "1") {
      parts.push_back(t.basis(i).name);
    } else if (s == "-1") {
      parts.push_back("-" + t.basis(i).name);
    } else {
      parts.push_back((single ? s : "(" + s + ")") + "*" + t.basis(i).name);
    }
  }
  if (parts.empty()) return "0";
  std::string out = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) {
    if (parts[i][0] == '-')
      out += " - " + parts[i].substr(1);
    else
      out += " + " + parts[i];
  }
  return out;
}

std::vector<Rational> parse_basis_expr(const TargetModel& t, std::string_view text) {
  std::vector<Rational> out(t.size(), Rational(0));
  std::string s;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
  if (s.empty()) throw ParseError("empty basis expression");
  std::size_t pos = 0;
  bool any = false;
  while (pos < s.size()) {
    int sign = 1;
    if (s[pos] == '+' || s[pos] == '-') {
      sign = s[pos] == '-' ? -1 : 1;
      ++pos;
    } else if (any) {
      throw ParseError("basis expression: expected '+' or '-' at '" + s.substr(pos) + "'");
    }
    std::size_t end = pos;
    while (end < s.size() && s[end] != '+' && s[end] != '-') ++end;
    std::string tok = s.substr(pos, end - pos);
    if (tok.empty()) throw ParseError("basis expression: empty term in '" + s + "'");
    Rational coeff = 1;
    std::string name = tok;
    auto star = tok.find('*');
    if (star != std::string::npos) {
      coeff = parse_rational(tok.substr(0, star));
      name = tok.substr(star + 1);
    }
    std::optional<std::size_t> idx;
    for (std::size_t i = 0; i < t.size(); ++i)
      if (t.basis(i).name == name) idx = i;
    if (!idx) {
      if (star != std::string::npos) throw ParseError("basis expression: unknown basis element '" + name + "'");
      coeff = parse_rational(name);  // bare rational means a multiple of 1
      idx = t.identity();
    }
    out[*idx] += sign * coeff;
    pos = end;
    any = true;
  }
  return out;
}

CohElement from_rationals(const TargetModel& t, const VarTablePtr& vars, const TruncationProfile& pr,
                          const std::vector<Rational>& coeffs) {
  if (coeffs.size() != t.size()) throw UsageError("coefficient vector size differs from the target basis");
  CohElement e = CohElement::zero(t, vars, pr);
  for (std::size_t i = 0; i < coeffs.size(); ++i) e.coeffs[i] = TruncatedPoly::constant(vars, pr, coeffs[i]);
  return e;
}

}  // namespace tqc
