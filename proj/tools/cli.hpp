#pragma once

#include "ftrepair/dsl.hpp"
#include "ftrepair/model.hpp"
#include "ftrepair/semantics.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace ftrepair::cli {

enum Exit : int {
    kOk = 0,
    kNotPossible = 2,  // also: property violated (check)
    kUsage = 3,
    kMismatch = 4,     // repair claimed success but the verifier disagrees
};

enum class Mode { Stabilize, Failsafe, Masking, Nonmasking };

struct RepairOptions {
    Mode mode = Mode::Stabilize;
    std::optional<int> k_override;
    bool eventually_fair = false;
    bool consecutive_env = false;
    bool strict_invariant = false;
    bool sound_only = false;
    bool verify = true;
    bool trace = false;
    std::string out;  // empty: <model name>.repaired.json
};

enum class Property { Stabilization, Failsafe, Masking, Leadsto };

struct CheckOptions {
    Property property = Property::Stabilization;
    std::string candidate;  // JSON file; empty: the model's own program and invariant
    std::string from;       // leadsto predicates in model syntax
    std::string to;
};

struct LoadedModel {
    dsl::ModelSpec spec;
    Model model;
};

LoadedModel load_model_file(const std::string& path);

// Runs a repair on an already elaborated model and returns the exit code.
// Artifacts go to `opts.out` unless it is "-" (discard); the summary and any
// trace go to `out`, diagnostics to `err`.
int repair_model(const Model& model, const RepairOptions& opts, std::ostream& out, std::ostream& err);

int cmd_repair(const std::string& file, const RepairOptions& opts, std::ostream& out, std::ostream& err);
int cmd_check(const std::string& file, const CheckOptions& opts, std::ostream& out, std::ostream& err);

// Parses argv and dispatches to the subcommands.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ftrepair::cli
