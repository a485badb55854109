#pragma once

#include "ftrepair/model.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ftrepair {

enum class EdgeKind { Program, Environment, Fault };

char edge_letter(EdgeKind kind);

struct ProductNode {
    StateId state = 0;
    int credit = 0;  // remaining steps in which program moves have priority

    friend bool operator==(const ProductNode&, const ProductNode&) = default;
};

struct ProductEdge {
    ProductNode from;
    ProductNode to;
    EdgeKind kind = EdgeKind::Program;

    friend bool operator==(const ProductEdge&, const ProductEdge&) = default;
};

// The k-window product of a program with the model's environment and, when
// requested, its faults. Edges are generated on demand; with dense
// environments an explicit edge list would not fit in memory.
class ProductGraph {
public:
    ProductGraph(const Relation& program, const Relation& env, const Relation* faults, int k);

    int k() const { return k_; }
    std::size_t state_count() const { return program_->universe(); }
    std::size_t node_count() const { return state_count() * static_cast<std::size_t>(k_); }
    std::size_t index(ProductNode n) const { return static_cast<std::size_t>(n.state) * k_ + n.credit; }
    ProductNode node(std::size_t index) const;

    // Environment moves are allowed when the window is spent or the
    // program is disabled.
    bool env_enabled(ProductNode n) const;

    template <class F>
    void for_each_edge(ProductNode n, F&& fn) const
    {
        const int dec = n.credit > 0 ? n.credit - 1 : 0;
        program_->for_each_successor(n.state, [&](StateId t) {
            fn(ProductEdge{n, {t, dec}, EdgeKind::Program});
        });
        if (env_enabled(n)) {
            env_->for_each_successor(n.state, [&](StateId t) {
                fn(ProductEdge{n, {t, k_ - 1}, EdgeKind::Environment});
            });
        }
        if (faults_) {
            faults_->for_each_successor(n.state, [&](StateId t) {
                fn(ProductEdge{n, {t, dec}, EdgeKind::Fault});
            });
        }
    }

    std::vector<ProductEdge> edges(ProductNode n) const;
    bool has_edge(const ProductEdge& e) const;
    bool terminal(ProductNode n) const;

private:
    const Relation* program_;
    const Relation* env_;
    const Relation* faults_;
    int k_;
};

ProductGraph build_product(const Model& model, const Relation& program, bool with_faults);

struct Verdict {
    bool pass = true;
    std::string reason;
    // Path from an initial node to the violation. For a bad transition the
    // last step is the bad one; for a deadlock it ends at the stuck node;
    // for non-convergence it ends where `cycle` starts.
    std::vector<ProductEdge> prefix;
    std::vector<ProductEdge> cycle;
    // The node where a deadlock was found.
    std::optional<ProductNode> stuck;

    static Verdict ok() { return {}; }
    static Verdict fail(std::string reason) { return Verdict{false, std::move(reason), {}, {}, {}}; }
};

Verdict verify_stabilization(const Model& model, const Relation& program);
bool check_C1(const Model& model, const Relation& program_prime, const Predicate& invariant_prime);
Verdict verify_failsafe(const Model& model, const Relation& program_prime, const Predicate& invariant_prime);
Verdict verify_masking(const Model& model, const Relation& program_prime, const Predicate& invariant_prime);
Verdict verify_leadsto(const Model& model, const Relation& program, const Predicate& from, const Predicate& to);

// Exhaustive check that every fault-free computation of `program_prime`
// starting in `invariant_prime` is also a computation of the model's own
// program: each step must be matched with the same kind (program or
// environment) and a finite computation must end where the original one can
// end too. Works for any k; check_C1 is its structural shortcut for k = 2.
bool fault_free_traces_contained(const Model& model, const Relation& program_prime,
                                 const Predicate& invariant_prime);

// Checks that every step of the counterexample is an edge of `graph`,
// that consecutive steps connect, and that the cycle (if any) closes.
bool replays(const Verdict& verdict, const ProductGraph& graph);

// One step per line: `<label> --[P|E|F]--> <label> (credit c)`.
std::string format_trace(const StateSpace& space, const Verdict& verdict);

enum class RepairMode { Stabilize, Failsafe, Masking };

constexpr std::size_t kDefaultBruteForceCap = 6;

// Exhaustive search for any program (and S' for the fault-tolerance modes)
// that passes the matching verifier. Throws UsageError above `cap` states.
bool brute_force_repair_exists(const Model& model, RepairMode mode, std::size_t cap = kDefaultBruteForceCap);

}  // namespace ftrepair
