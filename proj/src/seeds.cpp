#include "tqc/seeds.hpp"

namespace tqc {

namespace {

struct Seed {
  const char* target;
  const char* delta;
  const char* ins;
  int value;
};

// Irreducible forms only: divisor and fundamental-class insertions are
// recovered by the lookup rules.
constexpr Seed kSeeds[] = {
    {"p1", "1", "", 1},                        // {}_1: the identity map
    {"p2", "1", "0:h2;0:h2", 1},               // one line through two points
    {"p3", "1", "0:h3;0:h3", 1},               // one line through two points
    {"p3", "1", "0:h2;0:h2;0:h3", 1},          // line through a point meeting two lines
    {"p3", "1", "0:h2;0:h2;0:h2;0:h2", 2},     // lines meeting four general lines
    {"p1xp1", "1,0", "0:pt", 1},               // the ruling through a point
    {"p1xp1", "0,1", "0:pt", 1},
};

}  // namespace

int add_base_seeds(DescendantTable& table) {
  int n = 0;
  for (const auto& s : kSeeds) {
    if (table.target().name() != s.target) continue;
    table.insert(parse_key(table.target(), s.delta, s.ins), Rational(s.value), Provenance::Base);
    ++n;
  }
  return n;
}

}  // namespace tqc
