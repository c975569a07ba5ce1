#pragma once

// Kock's tangency quantum product built from the generating function
//   Gamma(x, y) = sum_{delta > 0} q^delta {exp(tau_0(x) + tau_1(y))}_delta
// and the deformed metric gamma_ij = int T_i T_j exp(-2y), compared with the
// d = 1 bullet product on the line z chi_0 = x, z chi_1 = y.

#include <optional>
#include <set>
#include <vector>

#include "tqc/wdvv.hpp"

namespace tqc {

struct KockVariables {
  std::vector<std::size_t> x;  // indices of x0..xr
  std::vector<std::size_t> y;  // indices of y0..yr
};

/// Names "x0".."xr", "y0".."yr" after `extra` params; returns the table.
VarTablePtr kock_variable_table(const TargetModel& t, std::vector<std::string> extra = {});
KockVariables kock_variables(const TargetModel& t, const VarTablePtr& vars);

/// `profile` must cap the Param degree.
TruncatedPoly gamma_series(const EvalContext& ctx, const KockVariables& kv, std::set<DescendantKey>& missing);
/// Only the terms with at least `min_x` tau_0 insertions (3 suffices for the
/// third partials and avoids asking for unstable low-point keys).
TruncatedPoly gamma_series(const EvalContext& ctx, const KockVariables& kv, std::set<DescendantKey>& missing,
                           int min_x);

TruncatedPoly gamma_third_partial(const TruncatedPoly& gamma, const KockVariables& kv, std::size_t i, std::size_t j,
                                  std::size_t l);

struct DeformedMetric {
  std::vector<std::vector<TruncatedPoly>> gamma;
  std::vector<std::vector<TruncatedPoly>> inverse;
};

DeformedMetric deformed_metric(const TargetModel& t, const VarTablePtr& vars, const KockVariables& kv,
                               const TruncationProfile& profile);

/// Third partials of Gamma, indexed [i][j][l].
using GammaPartials = std::vector<std::vector<std::vector<TruncatedPoly>>>;
GammaPartials gamma_partials(const TargetModel& t, const TruncatedPoly& gamma, const KockVariables& kv);

/// T_i bullet_Kock T_j = sum_{l,m} Gamma_ijl gamma^{lm} T_m.
CohElement kock_bullet(const TargetModel& t, const GammaPartials& partials, const DeformedMetric& metric,
                       std::size_t i, std::size_t j);

/// sum_delta q^delta {exp(tau_0(x) + tau_1(y)) tau_0(T_i) tau_0(T_j) tau_0(T_k)}_delta,
/// enumerated directly rather than by differentiating Gamma.
std::optional<TruncatedPoly> three_point_series(const EvalContext& ctx, const KockVariables& kv, std::size_t i,
                                                std::size_t j, std::size_t k, std::set<DescendantKey>& missing);

struct KockOptions {
  int q_cap = 1;  // per component
  int z_cap = 2;
  ChiSpec chi;    // Random, Symbolic or Explicit (d = 1)
  bool pairing = true;
};

/// One check per basis pair (product route) and, if requested, one per triple
/// (pairing route: int (T_i bullet_Kock T_j) exp(-2y) T_k against the direct sum).
VerifyReport compare_kock(const DescendantTable& table, const KockOptions& options);

}  // namespace tqc
