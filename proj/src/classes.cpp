#include "tqc/classes.hpp"

namespace tqc {

std::optional<CohElement> gw_class(const EvalContext& ctx, const CurveClass& delta,
                                   const std::vector<GeneralInsertion>& inputs, std::set<DescendantKey>& missing) {
  const auto& t = ctx.table->target();
  if (is_zero_class(delta)) {
    if (inputs.size() != 2 || inputs[0].a != 0 || inputs[1].a != 0)
      throw DegenerateKey("zero-class classes take exactly two psi-free inputs");
  }
  CohElement out = CohElement::zero(t, ctx.vars, ctx.profile);
  bool ok = true;
  std::vector<GeneralInsertion> ins = inputs;
  ins.push_back({0, CohElement::zero(t, ctx.vars, ctx.profile)});
  for (std::size_t k = 0; k < t.size(); ++k) {
    ins.back().cls = CohElement::basis(t, ctx.vars, ctx.profile, k);
    auto v = multilinear_eval(ctx, delta, ins, missing);
    if (!v) {
      ok = false;
      continue;
    }
    if (v->is_zero()) continue;
    for (std::size_t l = 0; l < t.size(); ++l) {
      const Rational& g = t.pairing_inverse()[k][l];
      if (g != 0) out[l] += *v * g;
    }
  }
  if (!ok) return std::nullopt;
  return out;
}

std::optional<CohElement> gw_class_with_output(const EvalContext& ctx, const CurveClass& delta,
                                               const std::vector<GeneralInsertion>& inputs, const CohElement& omega,
                                               std::set<DescendantKey>& missing) {
  auto g = gw_class(ctx, delta, inputs, missing);
  if (!g) return std::nullopt;
  return cup(ctx.table->target(), *g, omega);
}

}  // namespace tqc
