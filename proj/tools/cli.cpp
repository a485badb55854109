#include "cli.hpp"

#include "ftrepair/case_studies.hpp"
#include "ftrepair/extensions.hpp"
#include "ftrepair/fault_tolerance.hpp"
#include "ftrepair/stabilize.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <unordered_map>

namespace ftrepair::cli {

using json = nlohmann::ordered_json;

namespace {

class Stopwatch {
public:
    double lap_ms()
    {
        const auto now = std::chrono::steady_clock::now();
        const double ms = std::chrono::duration<double, std::milli>(now - last_).count();
        last_ = now;
        return ms;
    }

private:
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

const char* mode_name(Mode m)
{
    switch (m) {
    case Mode::Stabilize: return "stabilize";
    case Mode::Failsafe: return "failsafe";
    case Mode::Masking: return "masking";
    case Mode::Nonmasking: return "nonmasking";
    }
    return "?";
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw UsageError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

json pairs_json(const Relation& rel)
{
    json arr = json::array();
    for (auto [a, b] : rel.pairs())
        arr.push_back({a, b});
    return arr;
}

json members_json(const Predicate& pred)
{
    json arr = json::array();
    pred.for_each([&](StateId s) { arr.push_back(s); });
    return arr;
}

json labels_json(const StateSpace& space, const Predicate& pred)
{
    json arr = json::array();
    pred.for_each([&](StateId s) { arr.push_back(space.label(s)); });
    return arr;
}

Verdict verify_outcome(const Model& target, Mode mode, const RepairOutcome& r)
{
    switch (mode) {
    case Mode::Stabilize: return verify_stabilization(target, r.program);
    case Mode::Failsafe: return verify_failsafe(target, r.program, r.invariant);
    case Mode::Masking:
    case Mode::Nonmasking: return verify_masking(target, r.program, r.invariant);
    }
    return Verdict::fail("unknown mode");
}

// Accepts either state indices or state labels.
StateId state_ref(const json& v, const StateSpace& space, const std::unordered_map<std::string, StateId>& by_label)
{
    if (v.is_number_unsigned()) {
        const auto id = v.get<std::uint64_t>();
        if (id >= space.count)
            throw UsageError("state index " + std::to_string(id) + " out of range");
        return static_cast<StateId>(id);
    }
    if (v.is_string()) {
        const auto it = by_label.find(v.get<std::string>());
        if (it == by_label.end())
            throw UsageError("unknown state label '" + v.get<std::string>() + "'");
        return it->second;
    }
    throw UsageError("state reference must be an index or a label");
}

struct Candidate {
    Relation program;
    Predicate invariant;
};

Candidate load_candidate(const std::string& path, const Model& model)
{
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw UsageError(path + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("delta_p_prime") || !doc["delta_p_prime"].is_array())
        throw UsageError(path + ": expected an object with a delta_p_prime array");
    if (doc.contains("states") && doc["states"].is_array() && doc["states"].size() != model.size())
        throw UsageError(path + ": candidate has " + std::to_string(doc["states"].size()) +
                         " states, the model has " + std::to_string(model.size()));

    std::unordered_map<std::string, StateId> by_label;
    for (StateId s = 0; s < model.size(); ++s)
        by_label.emplace(model.space.label(s), s);

    Candidate c{Relation(model.size()), model.invariant};
    for (const auto& p : doc["delta_p_prime"]) {
        if (!p.is_array() || p.size() != 2)
            throw UsageError(path + ": each transition must be a pair");
        c.program.insert(state_ref(p[0], model.space, by_label), state_ref(p[1], model.space, by_label));
    }
    if (doc.contains("invariant_prime")) {
        c.invariant = Predicate(model.size());
        for (const auto& s : doc["invariant_prime"])
            c.invariant.insert(state_ref(s, model.space, by_label));
    }
    return c;
}

}  // namespace

LoadedModel load_model_file(const std::string& path)
{
    LoadedModel lm;
    lm.spec = dsl::parse_model(read_file(path));
    lm.model = dsl::elaborate(lm.spec);
    return lm;
}

int repair_model(const Model& input, const RepairOptions& opts, std::ostream& out, std::ostream& err)
{
    Stopwatch clock;
    Model m = input;
    json transforms = json::array();
    if (opts.k_override) {
        if (*opts.k_override < 2) {
            err << "error: k must be greater than 1\n";
            return kUsage;
        }
        m.k = *opts.k_override;
    }
    if (opts.consecutive_env) {
        m = consecutive_env_transform(m);
        transforms.push_back("consecutive-env");
    }
    if (opts.eventually_fair && opts.mode != Mode::Stabilize) {
        m = eventually_fair_transform(m);
        transforms.push_back("eventually-fair");
    }
    Model target = m;
    if (opts.mode == Mode::Nonmasking)
        target.delta_b = Relation(m.size());
    const double prep_ms = clock.lap_ms();

    RepairOutcome r;
    try {
        const FtOptions ft{opts.sound_only};
        switch (opts.mode) {
        case Mode::Stabilize: r = add_stabilization(m); break;
        case Mode::Failsafe: r = add_failsafe(m, ft); break;
        case Mode::Masking: r = add_masking(m, ft); break;
        case Mode::Nonmasking: r = add_nonmasking(m, ft); break;
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
    if (opts.strict_invariant)
        r = strict_invariant_mode(r, m.invariant);
    const double repair_ms = clock.lap_ms();

    std::optional<Verdict> verdict;
    if (r.repaired() && opts.verify)
        verdict = verify_outcome(target, opts.mode, r);
    const double verify_ms = clock.lap_ms();

    // Timings stay out of the file so that identical inputs give identical
    // bytes; they are printed with the summary instead.
    json report;
    report["model"] = m.name;
    report["mode"] = mode_name(opts.mode);
    report["outcome"] = to_string(r.outcome);
    report["k"] = m.k;
    report["transforms"] = transforms;
    report["strict_invariant"] = opts.strict_invariant;
    report["sizes"] = {
        {"states", m.size()},
        {"delta_p", m.delta_p.size()},
        {"delta_e", m.delta_e.size()},
        {"delta_b", target.delta_b.size()},
        {"delta_r", m.delta_r.size()},
        {"faults", m.faults.size()},
        {"invariant", m.invariant.size()},
        {"delta_p_prime", r.repaired() ? r.program.size() : 0},
        {"invariant_prime", r.repaired() ? r.invariant.size() : 0},
        {"R", r.stats.r_size},
        {"ms1", r.stats.ms1_size},
        {"ms2", r.stats.ms2_size},
        {"iterations", r.stats.iterations},
    };
    if (verdict)
        report["verification"] = {{"pass", verdict->pass}, {"reason", verdict->reason}};
    report["synthetic_selfloops"] =
        r.synthetic_loops.universe() ? labels_json(m.space, r.synthetic_loops) : json::array();

    json doc;
    json states = json::array();
    for (StateId s = 0; s < m.size(); ++s)
        states.push_back(m.space.label(s));
    doc["states"] = std::move(states);
    doc["delta_p_prime"] = r.repaired() ? pairs_json(r.program) : json::array();
    doc["invariant_prime"] = r.repaired() ? members_json(r.invariant) : json::array();
    doc["report"] = report;

    const std::string path = opts.out.empty() ? m.name + ".repaired.json" : opts.out;
    if (path != "-") {
        std::ofstream f(path, std::ios::binary);
        if (!f) {
            err << "error: cannot write " << path << "\n";
            return kUsage;
        }
        f << doc.dump(2) << "\n";
    }

    out << mode_name(opts.mode) << ": " << to_string(r.outcome);
    if (r.repaired())
        out << " (|delta_p'| = " << r.program.size() << ", |S'| = " << r.invariant.size() << ")";
    out << "\n";
    out << "time: prepare " << prep_ms << " ms, repair " << repair_ms << " ms, verify " << verify_ms << " ms\n";

    if (!r.repaired())
        return kNotPossible;
    if (verdict && !verdict->pass) {
        err << "error: verification failed on the repaired program: " << verdict->reason << "\n";
        if (opts.trace)
            out << format_trace(m.space, *verdict);
        return kMismatch;
    }
    if (verdict)
        out << "verified\n";
    return kOk;
}

int cmd_repair(const std::string& file, const RepairOptions& opts, std::ostream& out, std::ostream& err)
{
    LoadedModel lm;
    try {
        lm = load_model_file(file);
    } catch (const std::exception& e) {
        err << file << ": " << e.what() << "\n";
        return kUsage;
    }
    return repair_model(lm.model, opts, out, err);
}

int cmd_check(const std::string& file, const CheckOptions& opts, std::ostream& out, std::ostream& err)
{
    try {
        LoadedModel lm = load_model_file(file);
        const Model& m = lm.model;
        Candidate c{m.delta_p, m.invariant};
        if (!opts.candidate.empty())
            c = load_candidate(opts.candidate, m);

        Verdict v;
        switch (opts.property) {
        case Property::Stabilization: v = verify_stabilization(m, c.program); break;
        case Property::Failsafe: v = verify_failsafe(m, c.program, c.invariant); break;
        case Property::Masking: v = verify_masking(m, c.program, c.invariant); break;
        case Property::Leadsto: {
            if (opts.from.empty() || opts.to.empty())
                throw UsageError("leadsto needs --from and --to");
            const Predicate L = dsl::evaluate_predicate(lm.spec, *dsl::parse_predicate(lm.spec, opts.from));
            const Predicate T = dsl::evaluate_predicate(lm.spec, *dsl::parse_predicate(lm.spec, opts.to));
            v = verify_leadsto(m, c.program, L, T);
            break;
        }
        }
        if (v.pass) {
            out << "pass\n";
            return kOk;
        }
        out << "fail: " << v.reason << "\n" << format_trace(m.space, v);
        return kNotPossible;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Repair finite transition systems for stabilization and fault tolerance"};
    app.require_subcommand(1);

    RepairOptions ropts;
    std::string rfile;
    std::string mode = "stabilize";
    int k_override = 0;
    bool no_verify = false;
    auto* repair = app.add_subcommand("repair", "Repair a model file");
    repair->add_option("file", rfile, "Model file")->required();
    repair->add_option("--mode", mode, "stabilize, failsafe, masking or nonmasking")
        ->check(CLI::IsMember({"stabilize", "failsafe", "masking", "nonmasking"}));
    repair->add_option("--k-override", k_override, "Use this k instead of the file's");
    repair->add_flag("--eventually-fair", ropts.eventually_fair, "Environment is only eventually fair");
    repair->add_flag("--consecutive-env", ropts.consecutive_env, "Environment may take consecutive steps");
    repair->add_flag("--strict-invariant", ropts.strict_invariant, "Fail unless S' = S");
    repair->add_flag("--sound-only", ropts.sound_only, "Allow fault-tolerance repair with k > 2");
    repair->add_flag("--no-verify", no_verify, "Skip the post-repair verification");
    repair->add_option("--out", ropts.out, "Output JSON path ('-' for none)");
    repair->add_flag("--trace", ropts.trace, "Print a counterexample if verification fails");

    CheckOptions copts;
    std::string cfile;
    std::string property = "stabilization";
    auto* check = app.add_subcommand("check", "Verify a program against a property");
    check->add_option("file", cfile, "Model file")->required();
    check->add_option("--candidate", copts.candidate, "JSON with delta_p_prime and optional invariant_prime");
    check->add_option("--property", property, "stabilization, failsafe, masking or leadsto")
        ->check(CLI::IsMember({"stabilization", "failsafe", "masking", "leadsto"}));
    check->add_option("--from", copts.from, "leadsto: source predicate");
    check->add_option("--to", copts.to, "leadsto: target predicate");

    std::string ename;
    int max = 3;
    std::string variant = "db";
    int ek = 0;
    std::string eout;
    auto* example = app.add_subcommand("example", "Write a bundled case-study model");
    example->add_option("name", ename, "pressure-cooker, pressure-cooker-no-valve or smart-grid")
        ->required()
        ->check(CLI::IsMember({"pressure-cooker", "pressure-cooker-no-valve", "smart-grid"}));
    example->add_option("--max", max, "smart-grid: largest sensor value");
    example->add_option("--variant", variant, "smart-grid: db or db2")->check(CLI::IsMember({"db", "db2"}));
    example->add_option("--k", ek, "smart-grid: fairness parameter");
    example->add_option("--out", eout, "Output path (default: standard output)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    if (*repair) {
        static const std::map<std::string, Mode> modes = {
            {"stabilize", Mode::Stabilize}, {"failsafe", Mode::Failsafe},
            {"masking", Mode::Masking}, {"nonmasking", Mode::Nonmasking}};
        ropts.mode = modes.at(mode);
        if (repair->count("--k-override"))
            ropts.k_override = k_override;
        ropts.verify = !no_verify;
        return cmd_repair(rfile, ropts, out, err);
    }
    if (*check) {
        static const std::map<std::string, Property> props = {
            {"stabilization", Property::Stabilization}, {"failsafe", Property::Failsafe},
            {"masking", Property::Masking}, {"leadsto", Property::Leadsto}};
        copts.property = props.at(property);
        return cmd_check(cfile, copts, out, err);
    }

    std::string text;
    try {
        if (ename == "pressure-cooker") {
            text = pressure_cooker_source();
        } else if (ename == "pressure-cooker-no-valve") {
            text = pressure_cooker_without_valve_source();
        } else {
            const int k = example->count("--k") ? ek : 2;
            if (max < 1 || k < 2)
                throw UsageError("smart-grid needs --max >= 1 and --k >= 2");
            text = smart_grid_source(max, variant == "db" ? GridVariant::Db : GridVariant::Db2, k);
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
    if (eout.empty()) {
        out << text;
        return kOk;
    }
    std::ofstream f(eout, std::ios::binary);
    if (!f) {
        err << "error: cannot write " << eout << "\n";
        return kUsage;
    }
    f << text;
    return kOk;
}

}  // namespace ftrepair::cli
