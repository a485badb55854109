#pragma once

#include "ftrepair/model.hpp"

namespace ftrepair {

struct MsSets {
    Predicate ms1;  // states from which faults or the environment force a bad step
    Predicate ms2;  // states that must not be entered by a program or fault step
    Relation mt;    // transitions the repaired program may not use
};

struct FtOptions {
    // Accept k > 2. The algorithms stay sound there but may miss solutions,
    // so a failure is reported as Outcome::Unknown.
    bool sound_only = false;
};

// Largest subset of `pred` in which every state keeps a delta_p or delta_e
// successor inside the subset and no delta_e transition leaves the subset.
Predicate remove_deadlock(const Predicate& pred, const Relation& delta_p, const Relation& delta_e);

// `rel` without the transitions that leave `pred`.
Relation ensure_closure(const Relation& rel, const Predicate& pred);

RepairOutcome add_failsafe(const Model& model, const FtOptions& options = {});
RepairOutcome add_masking(const Model& model, const FtOptions& options = {});
// Masking with the safety specification dropped (delta_b cleared).
RepairOutcome add_nonmasking(const Model& model, const FtOptions& options = {});

}  // namespace ftrepair
