#pragma once

// Gromov-Witten classes by Poincare duality over the descendant table.

#include <optional>
#include <set>

#include "tqc/descendants.hpp"

namespace tqc {

/// sum_{k,l} {inputs, tau_0(T_k)}_delta g^{kl} T_l. nullopt (with `missing`
/// filled) if any needed invariant is unknown.
std::optional<CohElement> gw_class(const EvalContext& ctx, const CurveClass& delta,
                                   const std::vector<GeneralInsertion>& inputs, std::set<DescendantKey>& missing);

/// gw_class cupped with a psi-free output class.
std::optional<CohElement> gw_class_with_output(const EvalContext& ctx, const CurveClass& delta,
                                               const std::vector<GeneralInsertion>& inputs, const CohElement& omega,
                                               std::set<DescendantKey>& missing);

}  // namespace tqc
