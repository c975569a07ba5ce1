#pragma once

// Degree-one invariants shipped for the built-in targets.

#include "tqc/descendants.hpp"

namespace tqc {

/// Inserts the base entries for a built-in target (no-op for other names).
/// Returns the number of entries offered.
int add_base_seeds(DescendantTable& table);

}  // namespace tqc
