#include "tqc/tqc.h"

#include <cstdlib>
#include <cstring>
#include <sstream>

#include "tqc/kockcmp.hpp"
#include "tqc/reconstruct.hpp"
#include "tqc/seeds.hpp"

struct tqc_engine {
  tqc::DescendantTable table;
};

namespace {

thread_local std::string last_error;

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p) std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void put(char** out, const std::string& s) {
  if (out) *out = dup(s);
}

template <class F>
int guard(F&& f) {
  last_error.clear();
  try {
    return f();
  } catch (const tqc::InconsistentSystem& e) {
    last_error = e.what();
    return TQC_E_INCONSISTENT;
  } catch (const tqc::Underdetermined& e) {
    last_error = e.what();
    return TQC_E_UNDERDETERMINED;
  } catch (const tqc::ParseError& e) {
    last_error = e.what();
    return TQC_E_PARSE;
  } catch (const tqc::InvalidTarget& e) {
    last_error = e.what();
    return TQC_E_TARGET;
  } catch (const tqc::ConsistencyError& e) {
    last_error = e.what();
    return TQC_E_CONSISTENCY;
  } catch (const tqc::Error& e) {
    last_error = e.what();
    return TQC_E_USAGE;
  } catch (const std::exception& e) {
    last_error = e.what();
    return TQC_E_INTERNAL;
  }
}

int need(const void* p, const char* what) {
  if (p) return TQC_OK;
  last_error = std::string(what) + " is null";
  return TQC_E_USAGE;
}

tqc::TruncationProfile profile(const tqc::TargetModel& t, const tqc_profile* p) {
  if (!p) throw tqc::UsageError("profile is null");
  if (p->n_q_caps != t.curve_rank())
    throw tqc::UsageError("expected " + std::to_string(t.curve_rank()) + " q caps, got " +
                          std::to_string(p->n_q_caps));
  tqc::TruncationProfile pr;
  for (int i = 0; i < p->n_q_caps; ++i) {
    if (p->q_caps[i] < 0) throw tqc::UsageError("q caps must be >= 0");
    pr.q_caps.push_back(p->q_caps[i]);
  }
  if (p->z_cap < 0) throw tqc::UsageError("z cap must be >= 0");
  pr.z_cap = p->z_cap;
  return pr;
}

std::string missing_text(const tqc::TargetModel& t, const std::set<tqc::DescendantKey>& missing) {
  std::string s;
  for (const auto& k : missing) s += "missing " + tqc::to_string(t, k) + "\n";
  return s;
}

int report(const tqc::TargetModel& t, const tqc::VerifyReport& rep, std::string note, char** out) {
  if (!rep.complete()) {
    put(out, missing_text(t, rep.missing));
    last_error = std::to_string(rep.missing.size()) + " invariants missing";
    return TQC_E_INCOMPLETE;
  }
  std::ostringstream os;
  for (const auto& c : rep.checks) {
    os << (c.pass ? "PASS " : "FAIL ") << c.name;
    if (!c.pass) os << ": " << c.detail;
    os << "\n";
  }
  if (auto l = rep.leading_q_degree()) os << "leading q-degree " << *l << "\n";
  if (!note.empty() && rep.passed()) os << note << "\n";
  put(out, os.str());
  if (rep.passed()) return TQC_OK;
  last_error = "nonzero residual";
  return TQC_E_FAILED;
}

}  // namespace

extern "C" {

const char* tqc_version(void) { return "1.0.0"; }
const char* tqc_last_error(void) { return last_error.c_str(); }
void tqc_free(char* s) { std::free(s); }

int tqc_engine_new(const char* target, tqc_engine** out) {
  if (int s = need(target, "target")) return s;
  if (int s = need(out, "out")) return s;
  return guard([&] {
    std::string text(target);
    auto first = text.find_first_not_of(" \t\r\n");
    bool json = first != std::string::npos && text[first] == '{';
    *out = new tqc_engine{tqc::DescendantTable(json ? tqc::load_target(text) : tqc::builtin_target(text))};
    return TQC_OK;
  });
}

void tqc_engine_free(tqc_engine* e) { delete e; }

int tqc_engine_target_json(const tqc_engine* e, char** out) {
  if (int s = need(e, "engine")) return s;
  return guard([&] {
    put(out, tqc::target_to_json(e->table.target()));
    return TQC_OK;
  });
}

int tqc_engine_shape(const tqc_engine* e, int* basis_size, int* curve_rank) {
  if (int s = need(e, "engine")) return s;
  if (basis_size) *basis_size = static_cast<int>(e->table.target().size());
  if (curve_rank) *curve_rank = e->table.target().curve_rank();
  return TQC_OK;
}

int tqc_engine_add_seeds(tqc_engine* e, int* offered) {
  if (int s = need(e, "engine")) return s;
  return guard([&] {
    int n = tqc::add_base_seeds(e->table);
    if (offered) *offered = n;
    return TQC_OK;
  });
}

int tqc_engine_set_rule(tqc_engine* e, const char* rule, int enabled) {
  if (int s = need(e, "engine")) return s;
  if (int s = need(rule, "rule")) return s;
  auto r = e->table.rules();
  std::string name(rule);
  bool on = enabled != 0;
  if (name == "dimension") r.dimension = on;
  else if (name == "fundamental") r.fundamental = on;
  else if (name == "three-point") r.three_point = on;
  else if (name == "divisor") r.divisor = on;
  else if (name == "dilaton") r.dilaton = on;
  else {
    last_error = "unknown rule '" + name + "'";
    return TQC_E_USAGE;
  }
  e->table.set_rules(r);
  return TQC_OK;
}

int tqc_table_ingest(tqc_engine* e, const char* text, int as_ingested) {
  if (int s = need(e, "engine")) return s;
  if (int s = need(text, "text")) return s;
  return guard([&] {
    std::optional<tqc::Provenance> src;
    if (as_ingested) src = tqc::Provenance::Ingested;
    tqc::ingest_text(e->table, text, src);
    return TQC_OK;
  });
}

int tqc_table_persist(const tqc_engine* e, char** out) {
  if (int s = need(e, "engine")) return s;
  return guard([&] {
    put(out, tqc::persist_text(e->table));
    return TQC_OK;
  });
}

int tqc_table_size(const tqc_engine* e, size_t* n) {
  if (int s = need(e, "engine")) return s;
  if (n) *n = e->table.size();
  return TQC_OK;
}

int tqc_table_lookup(const tqc_engine* e, const char* delta, const char* ins, char** out) {
  if (int s = need(e, "engine")) return s;
  if (int s = need(delta, "delta")) return s;
  return guard([&] {
    const auto& t = e->table.target();
    auto parsed = tqc::parse_key(t, delta, ins ? ins : "");
    auto key = tqc::normalize_key(t, parsed.delta, parsed.ins);
    auto r = e->table.lookup(key);
    if (r.kind == tqc::LookupResult::Kind::Unknown) {
      put(out, "missing " + tqc::to_string(t, r.missing) + "\n");
      last_error = "unknown invariant";
      return TQC_E_INCOMPLETE;
    }
    put(out, r.kind == tqc::LookupResult::Kind::Zero ? "0" : tqc::to_string(r.value));
    return TQC_OK;
  });
}

int tqc_product(const tqc_engine* e, int d, const char* chi, const tqc_profile* p, const char* alpha,
                const char* beta, char** out) {
  if (int s = need(e, "engine")) return s;
  if (int s = need(chi, "chi")) return s;
  if (int s = need(alpha, "alpha")) return s;
  if (int s = need(beta, "beta")) return s;
  return guard([&] {
    const auto& t = e->table.target();
    auto pr = profile(t, p);
    auto spec = tqc::parse_chi_spec(t, chi);
    auto vars = tqc::chi_variables(t, spec, d);
    tqc::EvalContext ctx{&e->table, nullptr, vars, pr};
    auto c = tqc::make_deforming(t, spec, d, vars, pr);
    tqc::validate(t, c);
    auto a = tqc::from_rationals(t, vars, pr, tqc::parse_basis_expr(t, alpha));
    auto b = tqc::from_rationals(t, vars, pr, tqc::parse_basis_expr(t, beta));
    auto r = tqc::contact(ctx, c, a, b);
    if (!r.known()) {
      put(out, missing_text(t, r.missing));
      last_error = std::to_string(r.missing.size()) + " invariants missing";
      return TQC_E_INCOMPLETE;
    }
    put(out, tqc::to_string(t, *r.value));
    return TQC_OK;
  });
}

int tqc_verify(const tqc_engine* e, int d, const char* chi, const tqc_profile* p, char** out) {
  if (int s = need(e, "engine")) return s;
  if (int s = need(chi, "chi")) return s;
  return guard([&] {
    const auto& t = e->table.target();
    auto spec = tqc::parse_chi_spec(t, chi);
    auto rep = tqc::verify_suite(e->table, d, profile(t, p), spec);
    std::string note;
    if (spec.kind == tqc::ChiSpec::Kind::Symbolic) note = "note: polynomial identity in the chi parameters";
    return report(t, rep, note, out);
  });
}

int tqc_solve(tqc_engine* e, int d, const tqc_profile* p, int z_cap_psi_free, char** log) {
  if (int s = need(e, "engine")) return s;
  std::string text;
  int status = guard([&] {
    tqc::SolveOptions o;
    o.d = d;
    o.profile = profile(e->table.target(), p);
    if (z_cap_psi_free >= 0) o.z_cap_psi_free = z_cap_psi_free;
    o.log = [&](const std::string& line) { text += line + "\n"; };
    tqc::solve(e->table, o);
    return TQC_OK;
  });
  if (status != TQC_OK) text += "error: " + last_error + "\n";
  put(log, text);
  return status;
}

int tqc_fill_psi(tqc_engine* e, int d, const char* chi, const tqc_profile* p, size_t* filled) {
  if (int s = need(e, "engine")) return s;
  if (int s = need(chi, "chi")) return s;
  return guard([&] {
    const auto& t = e->table.target();
    auto n = tqc::fill_psi(e->table, d, profile(t, p), tqc::parse_chi_spec(t, chi));
    if (filled) *filled = n;
    return TQC_OK;
  });
}

int tqc_compare_kock(const tqc_engine* e, const char* chi, int q_cap, int z_cap, int pairing, char** out) {
  if (int s = need(e, "engine")) return s;
  if (int s = need(chi, "chi")) return s;
  return guard([&] {
    const auto& t = e->table.target();
    tqc::KockOptions o;
    o.q_cap = q_cap;
    o.z_cap = z_cap;
    o.chi = tqc::parse_chi_spec(t, chi);
    o.pairing = pairing != 0;
    return report(t, tqc::compare_kock(e->table, o), "", out);
  });
}

int tqc_reconstruct(const tqc_engine* e, const char* delta, const char* ins, char** out) {
  if (int s = need(e, "engine")) return s;
  if (int s = need(delta, "delta")) return s;
  return guard([&] {
    const auto& t = e->table.target();
    auto parsed = tqc::parse_key(t, delta, ins ? ins : "");
    auto key = tqc::normalize_key(t, parsed.delta, parsed.ins);
    std::set<tqc::DescendantKey> missing;
    auto v = tqc::reconstruct_psi(e->table, key, missing);
    if (!v) {
      put(out, missing_text(t, missing));
      last_error = std::to_string(missing.size()) + " invariants missing";
      return TQC_E_INCOMPLETE;
    }
    put(out, tqc::to_string(*v));
    return TQC_OK;
  });
}

}  // extern "C"
