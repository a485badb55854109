#pragma once

#include "ftrepair/model.hpp"

namespace ftrepair {

// Adds delta_b-safe stabilization for k = 2. Transitions in delta_b and
// delta_r are never added. Throws UsageError if k != 2 or if delta_b and
// delta_e overlap.
RepairOutcome add_stabilization_k2(const Model& model);

// Same problem for any k > 1.
RepairOutcome add_stabilization_general(const Model& model);

// Picks the k = 2 algorithm when it applies, the general one otherwise.
RepairOutcome add_stabilization(const Model& model);

}  // namespace ftrepair
