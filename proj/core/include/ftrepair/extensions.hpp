#pragma once

#include "ftrepair/model.hpp"

namespace ftrepair {

// Environment that is only eventually fair: its moves are added to the
// faults, so fault-tolerance repair treats early unfair stretches as
// perturbations. Stabilization needs no transformation.
Model eventually_fair_transform(const Model& model);

// Environment that may take several steps in a row: delta_e becomes its
// transitive closure.
Model consecutive_env_transform(const Model& model);

// Demands S' = S: anything else becomes NotPossible.
RepairOutcome strict_invariant_mode(const RepairOutcome& outcome, const Predicate& original_invariant);

}  // namespace ftrepair
