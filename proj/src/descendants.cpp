#include "tqc/descendants.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace tqc {

int DescendantKey::degree() const { return std::accumulate(delta.begin(), delta.end(), 0); }

bool DescendantKey::operator<(const DescendantKey& o) const {
  int da = degree(), db = o.degree();
  if (da != db) return da < db;
  if (delta != o.delta) return delta < o.delta;
  if (ins.size() != o.ins.size()) return ins.size() < o.ins.size();
  return ins < o.ins;
}

DescendantKey normalize_key(const TargetModel& t, CurveClass delta, std::vector<Insertion> ins) {
  if (static_cast<int>(delta.size()) != t.curve_rank()) throw UsageError("descendant key: curve class of wrong rank");
  if (!is_effective(delta)) throw UsageError("descendant key: curve class is not effective");
  for (const auto& x : ins) {
    if (x.a < 0) throw UsageError("descendant key: negative psi power");
    if (x.index >= t.size()) throw UsageError("descendant key: basis index out of range");
  }
  if (is_zero_class(delta)) {
    bool psi_free = std::all_of(ins.begin(), ins.end(), [](const Insertion& x) { return x.a == 0; });
    if (ins.size() != 3 || !psi_free)
      throw DegenerateKey("zero-class invariants need exactly three insertions without psi powers");
  }
  std::sort(ins.begin(), ins.end());
  return DescendantKey{std::move(delta), std::move(ins)};
}

std::string to_string(const TargetModel& t, const DescendantKey& key) {
  std::string s = "{";
  for (std::size_t i = 0; i < key.ins.size(); ++i) {
    if (i) s += " ";
    s += "tau" + std::to_string(key.ins[i].a) + "(" + t.basis(key.ins[i].index).name + ")";
  }
  s += "}_(";
  for (std::size_t c = 0; c < key.delta.size(); ++c) {
    if (c) s += ",";
    s += std::to_string(key.delta[c]);
  }
  return s + ")";
}

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::Base:
      return "base";
    case Provenance::Ingested:
      return "ingested";
    case Provenance::Solved:
      return "solved";
  }
  return "base";
}

DescendantTable::DescendantTable(TargetModel target, RuleSet rules)
    : target_(std::make_shared<const TargetModel>(std::move(target))), rules_(rules) {}

LookupResult DescendantTable::reduce(const DescendantKey& key) const {
  const auto& t = *target_;
  LookupResult r;
  if (is_zero_class(key.delta)) {
    if (!rules_.three_point) {
      r.kind = LookupResult::Kind::Unknown;
      r.missing = key;
      return r;
    }
    std::size_t i = key.ins[0].index, j = key.ins[1].index, l = key.ins[2].index;
    Rational v = 0;
    for (std::size_t k = 0; k < t.size(); ++k)
      if (t.cup_coeff(i, j, k) != 0) v += t.cup_coeff(i, j, k) * t.cup_coeff(k, l, t.point());
    r.by_rule = true;
    r.kind = v == 0 ? LookupResult::Kind::Zero : LookupResult::Kind::Value;
    r.value = v;
    return r;
  }
  if (rules_.dimension) {
    int s = 0;
    for (const auto& x : key.ins) s += x.a + t.codim(x.index);
    if (s != vdim(t, key.delta, static_cast<int>(key.ins.size()))) {
      r.by_rule = true;
      return r;
    }
  }
  if (rules_.fundamental) {
    for (const auto& x : key.ins)
      if (x.a == 0 && x.index == t.identity()) {
        r.by_rule = true;
        return r;
      }
  }
  DescendantKey cur{key.delta, {}};
  Rational factor = 1;
  for (const auto& x : key.ins) {
    if (rules_.divisor && x.a == 0 && t.codim(x.index) == 1) {
      factor *= t.divisor_degree(x.index, key.delta);
    } else if (rules_.dilaton && x.a == 1 && x.index == t.identity()) {
      factor *= -2;
    } else {
      cur.ins.push_back(x);
    }
  }
  r.by_rule = cur.ins.size() != key.ins.size();
  if (factor == 0) return r;
  r.kind = LookupResult::Kind::Unknown;
  r.factor = factor;
  r.missing = std::move(cur);
  return r;
}

LookupResult DescendantTable::lookup(const DescendantKey& key) const {
  LookupResult r = reduce(key);
  if (r.kind != LookupResult::Kind::Unknown) return r;
  auto it = entries_.find(r.missing);
  if (it == entries_.end()) return r;
  r.kind = LookupResult::Kind::Value;
  r.value = r.factor * it->second.value;
  return r;
}

void DescendantTable::insert(const DescendantKey& key, const Rational& value, Provenance src) {
  const auto& t = *target_;
  LookupResult r = reduce(key);
  if (r.kind == LookupResult::Kind::Zero) {
    if (value != 0)
      throw ConsistencyError("value " + to_string(value) + " for " + to_string(t, key) + " contradicts a vanishing rule");
    return;
  }
  if (r.kind == LookupResult::Kind::Value) {
    if (value != r.value)
      throw ConsistencyError("value " + to_string(value) + " for " + to_string(t, key) + " contradicts the rule value " +
                             to_string(r.value));
    return;
  }
  Rational stored = value / r.factor;
  auto it = entries_.find(r.missing);
  if (it != entries_.end()) {
    if (it->second.value != stored)
      throw ConsistencyError("conflicting values for " + to_string(t, r.missing) + ": stored " +
                             to_string(it->second.value) + ", new " + to_string(stored));
    return;
  }
  entries_.emplace(r.missing, Entry{stored, src});
}

void DescendantTable::force(const DescendantKey& key, const Rational& value, Provenance src) {
  LookupResult r = reduce(key);
  if (r.kind != LookupResult::Kind::Unknown) throw UsageError("force: key is determined by a rule");
  entries_[r.missing] = Entry{value / r.factor, src};
}

bool DescendantTable::erase(const DescendantKey& key) { return entries_.erase(key) > 0; }

// ---- persistence ----

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

int parse_int(const std::string& s) {
  if (s.empty()) throw ParseError("empty integer");
  std::size_t pos = 0;
  int v = 0;
  try {
    v = std::stoi(s, &pos);
  } catch (const std::exception&) {
    throw ParseError("bad integer '" + s + "'");
  }
  if (pos != s.size()) throw ParseError("bad integer '" + s + "'");
  return v;
}

Provenance parse_provenance(const std::string& s) {
  if (s == "base") return Provenance::Base;
  if (s == "ingested") return Provenance::Ingested;
  if (s == "solved") return Provenance::Solved;
  throw ParseError("unknown src '" + s + "'");
}

}  // namespace

DescendantKey parse_key(const TargetModel& t, const std::string& delta_text, const std::string& ins_text) {
  CurveClass delta;
  for (const auto& part : split(delta_text, ',')) delta.push_back(parse_int(part));
  std::vector<Insertion> ins;
  if (!ins_text.empty()) {
    for (const auto& part : split(ins_text, ';')) {
      auto colon = part.find(':');
      if (colon == std::string::npos) throw ParseError("insertion '" + part + "' is not a:basisName");
      Insertion x;
      x.a = parse_int(part.substr(0, colon));
      std::string name = part.substr(colon + 1);
      bool found = false;
      for (std::size_t i = 0; i < t.size(); ++i)
        if (t.basis(i).name == name) {
          x.index = i;
          found = true;
        }
      if (!found) throw ParseError("unknown basis element '" + name + "'");
      ins.push_back(x);
    }
  }
  try {
    return normalize_key(t, std::move(delta), std::move(ins));
  } catch (const UsageError& e) {
    throw ParseError(e.what());
  }
}

std::string format_entry(const TargetModel& t, const DescendantKey& key, const Rational& value, Provenance src) {
  std::string s = "delta=";
  for (std::size_t c = 0; c < key.delta.size(); ++c) {
    if (c) s += ",";
    s += std::to_string(key.delta[c]);
  }
  s += " ins=";
  for (std::size_t i = 0; i < key.ins.size(); ++i) {
    if (i) s += ";";
    s += std::to_string(key.ins[i].a) + ":" + t.basis(key.ins[i].index).name;
  }
  return s + " val=" + to_string(value) + " src=" + to_string(src);
}

void ingest(DescendantTable& table, std::istream& in, std::optional<Provenance> override_src) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    try {
      std::istringstream fields(line);
      std::string tok;
      std::optional<std::string> delta, ins, val, src;
      while (fields >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) throw ParseError("field '" + tok + "' has no '='");
        std::string name = tok.substr(0, eq), body = tok.substr(eq + 1);
        std::optional<std::string>* slot = name == "delta" ? &delta
                                           : name == "ins" ? &ins
                                           : name == "val" ? &val
                                           : name == "src" ? &src
                                                           : nullptr;
        if (!slot) throw ParseError("unknown field '" + name + "'");
        if (*slot) throw ParseError("duplicate field '" + name + "'");
        *slot = body;
      }
      if (!delta || !ins || !val || !src) throw ParseError("entry needs delta=, ins=, val= and src=");
      auto key = parse_key(table.target(), *delta, *ins);
      Rational v = parse_rational(*val);
      Provenance p = override_src ? *override_src : parse_provenance(*src);
      table.insert(key, v, p);
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const DegenerateKey& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const ConsistencyError& e) {
      throw ConsistencyError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void ingest_text(DescendantTable& table, const std::string& text, std::optional<Provenance> override_src) {
  std::istringstream in(text);
  ingest(table, in, override_src);
}

void persist(const DescendantTable& table, std::ostream& out) {
  out << "# tqc descendant table target=" << table.target().name() << "\n";
  for (const auto& [key, e] : table.entries()) out << format_entry(table.target(), key, e.value, e.src) << "\n";
}

std::string persist_text(const DescendantTable& table) {
  std::ostringstream out;
  persist(table, out);
  return out.str();
}

// ---- evaluation ----

std::optional<TruncatedPoly> eval_key(const EvalContext& ctx, const DescendantKey& key,
                                      std::set<DescendantKey>& missing) {
  LookupResult r = ctx.table->lookup(key);
  switch (r.kind) {
    case LookupResult::Kind::Zero:
      return TruncatedPoly(ctx.vars, ctx.profile);
    case LookupResult::Kind::Value:
      return TruncatedPoly::constant(ctx.vars, ctx.profile, r.value);
    case LookupResult::Kind::Unknown:
      break;
  }
  if (ctx.unknowns) {
    auto it = ctx.unknowns->find(r.missing);
    if (it != ctx.unknowns->end()) return TruncatedPoly::variable(ctx.vars, ctx.profile, it->second) * r.factor;
  }
  if (ctx.unbound_zero) return TruncatedPoly(ctx.vars, ctx.profile);
  missing.insert(r.missing);
  return std::nullopt;
}

namespace {

struct Group {
  int a;
  const CohElement* cls;
  int mult;
  std::vector<std::size_t> support;
};

struct Expander {
  const EvalContext& ctx;
  const CurveClass& delta;
  std::vector<Group>& groups;
  std::set<DescendantKey>& missing;
  TruncatedPoly total;
  bool ok = true;
  std::vector<Insertion> ins;

  void group(std::size_t g, const TruncatedPoly& weight) {
    if (weight.is_zero()) return;
    if (g == groups.size()) {
      auto key = normalize_key(ctx.table->target(), delta, ins);
      auto v = eval_key(ctx, key, missing);
      if (!v) {
        ok = false;
        return;
      }
      if (!v->is_zero()) total += weight * *v;
      return;
    }
    slot(g, 0, groups[g].mult, weight, 1);
  }

  // distribute `left` copies of group g over support[s..]; multinom is the
  // running product of binomials, i.e. m!/prod(k!)
  void slot(std::size_t g, std::size_t s, int left, const TruncatedPoly& weight, const Rational& multinom) {
    const Group& gr = groups[g];
    if (left == 0) {
      group(g + 1, weight * multinom);
      return;
    }
    const auto& c = (*gr.cls)[gr.support[s]];
    TruncatedPoly w = weight;
    if (s + 1 == gr.support.size()) {
      for (int k = 0; k < left; ++k) {
        w = w * c;
        ins.push_back({gr.a, gr.support[s]});
      }
      group(g + 1, w * multinom);
      ins.resize(ins.size() - left);
      return;
    }
    Rational binom = 1;
    int pushed = 0;
    for (int k = 0; k <= left; ++k) {
      if (k > 0) {
        w = w * c;
        binom = binom * (left - k + 1) / k;
        ins.push_back({gr.a, gr.support[s]});
        ++pushed;
      }
      if (w.is_zero()) break;
      slot(g, s + 1, left - k, w, multinom * binom);
    }
    ins.resize(ins.size() - pushed);
  }
};

}  // namespace

std::optional<TruncatedPoly> multilinear_eval(const EvalContext& ctx, const CurveClass& delta,
                                              const std::vector<GeneralInsertion>& ins,
                                              std::set<DescendantKey>& missing) {
  std::vector<Group> groups;
  for (const auto& x : ins) {
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const Group& g) { return g.a == x.a && *g.cls == x.cls; });
    if (it != groups.end()) {
      ++it->mult;
      continue;
    }
    Group g{x.a, &x.cls, 1, {}};
    for (std::size_t i = 0; i < x.cls.size(); ++i)
      if (!x.cls[i].is_zero()) g.support.push_back(i);
    if (g.support.empty()) return TruncatedPoly(ctx.vars, ctx.profile);
    groups.push_back(std::move(g));
  }
  Expander ex{ctx, delta, groups, missing, TruncatedPoly(ctx.vars, ctx.profile)};
  ex.group(0, TruncatedPoly::constant(ctx.vars, ctx.profile, 1));
  if (!ex.ok) return std::nullopt;
  return ex.total;
}

std::vector<DescendantKey> dimension_candidates(const TargetModel& t, const CurveClass& delta, int n_marks,
                                                int max_a) {
  std::vector<DescendantKey> out;
  if (is_zero_class(delta) && n_marks != 3) return out;
  int want = vdim(t, delta, n_marks);
  std::vector<Insertion> universe;
  for (int a = 0; a <= (is_zero_class(delta) ? 0 : max_a); ++a)
    for (std::size_t i = 0; i < t.size(); ++i) universe.push_back({a, i});
  std::vector<Insertion> cur;
  auto rec = [&](auto&& self, std::size_t from, int left, int budget) -> void {
    if (left == 0) {
      if (budget == 0) out.push_back(DescendantKey{delta, cur});
      return;
    }
    for (std::size_t u = from; u < universe.size(); ++u) {
      int w = universe[u].a + t.codim(universe[u].index);
      if (w > budget) continue;
      cur.push_back(universe[u]);
      self(self, u, left - 1, budget - w);
      cur.pop_back();
    }
  };
  rec(rec, 0, n_marks, want);
  return out;
}

}  // namespace tqc
