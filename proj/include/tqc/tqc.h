#ifndef TQC_H
#define TQC_H

/* C interface to the engine. Every call returns a status code; on failure
 * tqc_last_error() describes it (per thread). Strings handed out through
 * `char** out` are owned by the caller and released with tqc_free. */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

enum {
  TQC_OK = 0,
  TQC_E_USAGE = 1,
  TQC_E_PARSE = 2,
  TQC_E_TARGET = 3,
  TQC_E_CONSISTENCY = 4,
  TQC_E_INCOMPLETE = 5,     /* invariants missing; `out` lists them */
  TQC_E_INCONSISTENT = 6,   /* solver: contradictory equations */
  TQC_E_UNDERDETERMINED = 7,/* solver: keys left free */
  TQC_E_FAILED = 8,         /* a verification or comparison found a residual */
  TQC_E_INTERNAL = 9
};

typedef struct tqc_engine tqc_engine;

typedef struct {
  const int* q_caps; /* one per curve-lattice component */
  int n_q_caps;
  int z_cap;
} tqc_profile;

const char* tqc_version(void);
const char* tqc_last_error(void);
void tqc_free(char* s);

/* `target` is a built-in name (p1, p2, p3, p1xp1) or a JSON configuration. */
int tqc_engine_new(const char* target, tqc_engine** out);
void tqc_engine_free(tqc_engine* e);
int tqc_engine_target_json(const tqc_engine* e, char** out);
/* Number of basis classes and curve-lattice rank. */
int tqc_engine_shape(const tqc_engine* e, int* basis_size, int* curve_rank);
int tqc_engine_add_seeds(tqc_engine* e, int* offered);
/* rule: "dimension", "fundamental", "three-point", "divisor", "dilaton" */
int tqc_engine_set_rule(tqc_engine* e, const char* rule, int enabled);

/* Table text format: `delta=1,0 ins=0:h;1:pt val=12 src=solved` per line. */
int tqc_table_ingest(tqc_engine* e, const char* text, int as_ingested);
int tqc_table_persist(const tqc_engine* e, char** out);
int tqc_table_size(const tqc_engine* e, size_t* n);
/* Value of a key by rules and table; TQC_E_INCOMPLETE if unknown. */
int tqc_table_lookup(const tqc_engine* e, const char* delta, const char* ins, char** out);

/* chi: "zero", "random:<seed>", "symbolic", or basis expressions for
 * chi_0..chi_d separated by ';'. */
int tqc_product(const tqc_engine* e, int d, const char* chi, const tqc_profile* p, const char* alpha,
                const char* beta, char** out);
/* Report lines "PASS <check>" / "FAIL <check>: <residual>"; TQC_OK iff all pass. */
int tqc_verify(const tqc_engine* e, int d, const char* chi, const tqc_profile* p, char** report);
/* z_cap_psi_free < 0 selects the automatic cap. `log` gets one line per key. */
int tqc_solve(tqc_engine* e, int d, const tqc_profile* p, int z_cap_psi_free, char** log);
/* Psi recursion only, for the keys the product at (d, chi, p) needs. */
int tqc_fill_psi(tqc_engine* e, int d, const char* chi, const tqc_profile* p, size_t* filled);
int tqc_compare_kock(const tqc_engine* e, const char* chi, int q_cap, int z_cap, int pairing, char** report);
int tqc_reconstruct(const tqc_engine* e, const char* delta, const char* ins, char** out);

#ifdef __cplusplus
}
#endif

#endif
