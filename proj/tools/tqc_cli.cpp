// Command-line front end over the C interface.

#include <unistd.h>

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "tqc/tqc.h"

namespace {

enum Exit { kPass = 0, kFail = 1, kUsage = 2, kIncomplete = 3, kSolver = 4 };

struct Usage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Engine {
  tqc_engine* e = nullptr;
  ~Engine() { tqc_engine_free(e); }
};

struct Text {
  char* s = nullptr;
  ~Text() { tqc_free(s); }
  std::string str() const { return s ? s : ""; }
};

struct Common {
  std::string target = "p2";
  std::string table;
  bool no_seeds = false;
  int d = 0;
  std::string chi = "zero";
  std::string q_max = "1";
  int z_max = 0;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Usage("cannot read '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_atomic(const std::string& path, const std::string& data) {
  std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Usage("cannot write '" + tmp + "'");
    out << data;
    out.flush();
    if (!out) {
      std::remove(tmp.c_str());
      throw Usage("write failed for '" + tmp + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    throw Usage("cannot replace '" + path + "': " + ec.message());
  }
}

int code_for(int status) {
  switch (status) {
    case TQC_OK:
      return kPass;
    case TQC_E_FAILED:
      return kFail;
    case TQC_E_INCOMPLETE:
      return kIncomplete;
    case TQC_E_INCONSISTENT:
    case TQC_E_UNDERDETERMINED:
      return kSolver;
    default:
      return kUsage;
  }
}

void check(int status) {
  if (status != TQC_OK) throw Usage(tqc_last_error());
}

// A config file path or a built-in name.
void open_engine(Engine& eng, const Common& c) {
  std::string spec = c.target;
  if (std::filesystem::is_regular_file(spec)) spec = read_file(spec);
  check(tqc_engine_new(spec.c_str(), &eng.e));
  if (!c.no_seeds) check(tqc_engine_add_seeds(eng.e, nullptr));
  if (!c.table.empty()) check(tqc_table_ingest(eng.e, read_file(c.table).c_str(), 0));
}

std::vector<int> q_caps(const Engine& eng, const std::string& text) {
  int rank = 0;
  tqc_engine_shape(eng.e, nullptr, &rank);
  std::vector<int> caps;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      int v = std::stoi(part, &used);
      if (used != part.size() || v < 0) throw std::invalid_argument(part);
      caps.push_back(v);
    } catch (const std::exception&) {
      throw Usage("bad --q-max '" + text + "'");
    }
  }
  if (caps.size() == 1) caps.assign(rank, caps[0]);
  if (static_cast<int>(caps.size()) != rank)
    throw Usage("--q-max needs 1 or " + std::to_string(rank) + " values");
  return caps;
}

void add_common(CLI::App* app, Common& c, bool with_chi) {
  app->add_option("--target", c.target, "built-in name (p1, p2, p3, p1xp1) or config file")->capture_default_str();
  app->add_option("--table", c.table, "descendant table file to load");
  app->add_flag("--no-seeds", c.no_seeds, "do not add the built-in degree-one data");
  app->add_option("--q-max", c.q_max, "q cap, one value or one per component")->capture_default_str();
  app->add_option("--z-max", c.z_max, "z cap")->capture_default_str()->check(CLI::NonNegativeNumber);
  if (with_chi) {
    app->add_option("--d", c.d, "order of the deforming element")->capture_default_str()->check(CLI::NonNegativeNumber);
    app->add_option("--chi,--chi-mode", c.chi, "zero, random:<seed>, symbolic, file, or 'expr;expr;...'")
        ->capture_default_str();
  }
}

std::string chi_text(const std::string& chi) {
  if (chi != "zero" && chi != "symbolic" && chi.rfind("random:", 0) != 0 && std::filesystem::is_regular_file(chi)) {
    std::string s = read_file(chi);
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
    return s;
  }
  return chi;
}

int run_solve(Engine& eng, int d, tqc_profile& p, int z_psi_free, bool echo) {
  Text log;
  int st = tqc_solve(eng.e, d, &p, z_psi_free, &log.s);
  if (echo || st != TQC_OK) std::cerr << log.str();
  return st;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contact product engine"};
  app.require_subcommand(1);

  Common pc, vc, sc, kc, rc, ic;

  std::string alpha, beta;
  bool p_solve = false;
  auto* product = app.add_subcommand("product", "print alpha * beta");
  add_common(product, pc, true);
  product->add_option("--alpha", alpha, "basis expression")->required();
  product->add_option("--beta", beta, "basis expression")->required();
  product->add_flag("--solve", p_solve, "solve the table through the caps first");

  bool v_solve = false;
  auto* verify = app.add_subcommand("verify", "identity, commutativity and associativity checks");
  add_common(verify, vc, true);
  verify->add_flag("--solve", v_solve, "solve the table through the caps first");

  std::string s_out;
  int s_zpsi = -1;
  bool s_quiet = false;
  auto* solve = app.add_subcommand("solve", "fill the table from the associativity equations");
  add_common(solve, sc, false);
  solve->add_option("--d", sc.d, "order")->capture_default_str()->check(CLI::NonNegativeNumber);
  solve->add_option("--out", s_out, "output table file (default: --table, else stdout)");
  solve->add_option("--z-psi-free", s_zpsi, "z cap for the psi-free phase (default automatic)");
  solve->add_flag("--quiet", s_quiet, "no per-key log on stderr");

  std::uint64_t k_seed = 0;
  bool k_no_solve = false, k_no_pairing = false;
  auto* kock = app.add_subcommand("compare-kock", "compare with Kock's product at d = 1");
  add_common(kock, kc, false);
  kock->add_option("--seed", k_seed, "random chi seed");
  kock->add_option("--chi,--chi-mode", kc.chi, "chi spec (overrides --seed)");
  kock->add_flag("--no-solve", k_no_solve, "use the table as given");
  kock->add_flag("--no-pairing", k_no_pairing, "skip the pairing-level checks");

  std::string r_delta, r_ins;
  bool r_solve = false;
  auto* recon = app.add_subcommand("reconstruct", "psi recursion for one key");
  add_common(recon, rc, false);
  recon->add_option("--delta", r_delta, "curve class, e.g. 2 or 1,0")->required();
  recon->add_option("--ins", r_ins, "insertions, e.g. 1:h;0:h2");
  recon->add_flag("--solve", r_solve, "solve the psi-free table through --q-max first");

  std::vector<std::string> i_files;
  std::string i_out;
  auto* ingest = app.add_subcommand("ingest", "merge table files and write the result");
  add_common(ingest, ic, false);
  ingest->add_option("files", i_files, "table files to merge")->required();
  ingest->add_option("--out", i_out, "output table file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc_ = app.exit(e);
    return rc_ == 0 ? 0 : kUsage;
  }

  try {
    Engine eng;
    if (product->parsed()) {
      open_engine(eng, pc);
      auto caps = q_caps(eng, pc.q_max);
      tqc_profile p{caps.data(), static_cast<int>(caps.size()), pc.z_max};
      if (p_solve) {
        int st = run_solve(eng, pc.d, p, -1, false);
        if (st != TQC_OK) return code_for(st);
      }
      Text out;
      std::string chi = chi_text(pc.chi);
      int st = tqc_product(eng.e, pc.d, chi.c_str(), &p, alpha.c_str(), beta.c_str(), &out.s);
      if (st == TQC_OK) {
        std::cout << out.str() << "\n";
      } else if (st == TQC_E_INCOMPLETE) {
        std::cout << out.str();
      } else {
        std::cerr << "error: " << tqc_last_error() << "\n";
      }
      return code_for(st);
    }
    if (verify->parsed()) {
      open_engine(eng, vc);
      auto caps = q_caps(eng, vc.q_max);
      tqc_profile p{caps.data(), static_cast<int>(caps.size()), vc.z_max};
      if (v_solve) {
        int st = run_solve(eng, vc.d, p, -1, false);
        if (st != TQC_OK) return code_for(st);
      }
      Text out;
      std::string chi = chi_text(vc.chi);
      int st = tqc_verify(eng.e, vc.d, chi.c_str(), &p, &out.s);
      std::cout << out.str();
      if (st != TQC_OK && st != TQC_E_FAILED && st != TQC_E_INCOMPLETE)
        std::cerr << "error: " << tqc_last_error() << "\n";
      return code_for(st);
    }
    if (solve->parsed()) {
      open_engine(eng, sc);
      auto caps = q_caps(eng, sc.q_max);
      tqc_profile p{caps.data(), static_cast<int>(caps.size()), sc.z_max};
      int st = run_solve(eng, sc.d, p, s_zpsi, !s_quiet);
      if (st != TQC_OK) return code_for(st);
      Text table;
      check(tqc_table_persist(eng.e, &table.s));
      std::string dest = !s_out.empty() ? s_out : sc.table;
      if (dest.empty())
        std::cout << table.str();
      else
        write_atomic(dest, table.str());
      return kPass;
    }
    if (kock->parsed()) {
      open_engine(eng, kc);
      auto caps = q_caps(eng, kc.q_max);
      for (int c : caps)
        if (c != caps[0]) throw Usage("compare-kock takes one q cap for all components");
      tqc_profile p{caps.data(), static_cast<int>(caps.size()), kc.z_max};
      if (!k_no_solve) {
        int st = run_solve(eng, 1, p, -1, false);
        if (st != TQC_OK) return code_for(st);
      }
      std::string chi = kock->count("--chi") ? chi_text(kc.chi) : "random:" + std::to_string(k_seed);
      Text out;
      int st = tqc_compare_kock(eng.e, chi.c_str(), caps.empty() ? 0 : caps[0], kc.z_max, !k_no_pairing, &out.s);
      std::cout << out.str();
      if (st != TQC_OK && st != TQC_E_FAILED && st != TQC_E_INCOMPLETE)
        std::cerr << "error: " << tqc_last_error() << "\n";
      return code_for(st);
    }
    if (recon->parsed()) {
      open_engine(eng, rc);
      if (r_solve) {
        auto caps = q_caps(eng, rc.q_max);
        tqc_profile p{caps.data(), static_cast<int>(caps.size()), 0};
        int st = run_solve(eng, 0, p, -1, false);
        if (st != TQC_OK) return code_for(st);
      }
      Text out;
      int st = tqc_reconstruct(eng.e, r_delta.c_str(), r_ins.c_str(), &out.s);
      if (st == TQC_OK)
        std::cout << out.str() << "\n";
      else if (st == TQC_E_INCOMPLETE)
        std::cout << out.str();
      else
        std::cerr << "error: " << tqc_last_error() << "\n";
      return code_for(st);
    }
    if (ingest->parsed()) {
      open_engine(eng, ic);
      for (const auto& f : i_files) check(tqc_table_ingest(eng.e, read_file(f).c_str(), 0));
      Text table;
      check(tqc_table_persist(eng.e, &table.s));
      if (i_out.empty())
        std::cout << table.str();
      else
        write_atomic(i_out, table.str());
      return kPass;
    }
  } catch (const Usage& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
