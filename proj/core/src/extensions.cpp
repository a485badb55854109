#include "ftrepair/extensions.hpp"

namespace ftrepair {

Model eventually_fair_transform(const Model& model)
{
    Model out = model;
    out.faults |= model.delta_e;
    return out;
}

Model consecutive_env_transform(const Model& model)
{
    Model out = model;
    out.delta_e = transitive_closure(model.delta_e);
    return out;
}

RepairOutcome strict_invariant_mode(const RepairOutcome& outcome, const Predicate& original_invariant)
{
    if (!outcome.repaired() || outcome.invariant == original_invariant)
        return outcome;
    return RepairOutcome::not_possible(outcome.stats);
}

}  // namespace ftrepair
