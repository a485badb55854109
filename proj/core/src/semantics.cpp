#include "ftrepair/semantics.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace ftrepair {

char edge_letter(EdgeKind kind)
{
    switch (kind) {
    case EdgeKind::Program: return 'P';
    case EdgeKind::Environment: return 'E';
    case EdgeKind::Fault: return 'F';
    }
    return '?';
}

ProductGraph::ProductGraph(const Relation& program, const Relation& env, const Relation* faults, int k)
    : program_(&program), env_(&env), faults_(faults), k_(k)
{
    if (k < 2)
        throw UsageError("k must be greater than 1");
    if (env.universe() != program.universe() || (faults && faults->universe() != program.universe()))
        throw UsageError("product components over different state spaces");
}

ProductNode ProductGraph::node(std::size_t index) const
{
    return {static_cast<StateId>(index / k_), static_cast<int>(index % k_)};
}

bool ProductGraph::env_enabled(ProductNode n) const
{
    return n.credit == 0 || !program_->has_successor(n.state);
}

std::vector<ProductEdge> ProductGraph::edges(ProductNode n) const
{
    std::vector<ProductEdge> out;
    for_each_edge(n, [&](const ProductEdge& e) { out.push_back(e); });
    return out;
}

bool ProductGraph::has_edge(const ProductEdge& e) const
{
    if (e.from.state >= state_count() || e.to.state >= state_count())
        return false;
    if (e.from.credit < 0 || e.from.credit >= k_)
        return false;
    const int dec = e.from.credit > 0 ? e.from.credit - 1 : 0;
    switch (e.kind) {
    case EdgeKind::Program:
        return program_->contains(e.from.state, e.to.state) && e.to.credit == dec;
    case EdgeKind::Environment:
        return env_enabled(e.from) && env_->contains(e.from.state, e.to.state) && e.to.credit == k_ - 1;
    case EdgeKind::Fault:
        return faults_ && faults_->contains(e.from.state, e.to.state) && e.to.credit == dec;
    }
    return false;
}

bool ProductGraph::terminal(ProductNode n) const
{
    if (program_->has_successor(n.state))
        return false;
    if (env_->has_successor(n.state))  // program disabled, so environment is enabled
        return false;
    return !(faults_ && faults_->has_successor(n.state));
}

ProductGraph build_product(const Model& model, const Relation& program, bool with_faults)
{
    return ProductGraph(program, model.delta_e, with_faults ? &model.faults : nullptr, model.k);
}

namespace {

// Breadth-first search that remembers the edge through which each node was
// first reached, so shortest witness paths can be rebuilt.
struct Search {
    const ProductGraph& graph;
    std::vector<char> seen;
    std::vector<ProductEdge> via;
    std::vector<char> has_via;
    std::vector<std::size_t> order;

    explicit Search(const ProductGraph& g)
        : graph(g), seen(g.node_count(), 0), via(g.node_count()), has_via(g.node_count(), 0)
    {
    }

    void add_root(ProductNode n)
    {
        const auto i = graph.index(n);
        if (!seen[i]) {
            seen[i] = 1;
            order.push_back(i);
        }
    }

    // Expands from the roots. `follow(node)` limits which targets are
    // entered; `inspect(edge)` may return true to stop with that edge.
    template <class Follow, class Inspect>
    std::optional<ProductEdge> run(Follow&& follow, Inspect&& inspect)
    {
        for (std::size_t head = 0; head < order.size(); ++head) {
            const ProductNode x = graph.node(order[head]);
            std::optional<ProductEdge> hit;
            graph.for_each_edge(x, [&](const ProductEdge& e) {
                if (hit)
                    return;
                if (inspect(e)) {
                    hit = e;
                    return;
                }
                if (!follow(e.to))
                    return;
                const auto j = graph.index(e.to);
                if (!seen[j]) {
                    seen[j] = 1;
                    via[j] = e;
                    has_via[j] = 1;
                    order.push_back(j);
                }
            });
            if (hit)
                return hit;
        }
        return std::nullopt;
    }

    std::vector<ProductEdge> path_to(ProductNode n) const
    {
        std::vector<ProductEdge> path;
        auto i = graph.index(n);
        while (has_via[i]) {
            path.push_back(via[i]);
            i = graph.index(via[i].from);
        }
        std::reverse(path.begin(), path.end());
        return path;
    }
};

// Resumable position inside the ordered edge list of one product node:
// program successors, then environment successors, then faults.
struct EdgeCursor {
    int phase = 0;
    std::size_t pos = Bits::npos;
};

std::optional<ProductEdge> next_edge(const ProductGraph& g, const Relation& program, const Relation& env,
                                     const Relation* faults, ProductNode n, EdgeCursor& c)
{
    const int dec = n.credit > 0 ? n.credit - 1 : 0;
    while (c.phase < 3) {
        const Relation* rel = c.phase == 0 ? &program : c.phase == 1 ? &env : faults;
        const bool active = rel && (c.phase != 1 || g.env_enabled(n));
        if (active) {
            const Bits& row = rel->row(n.state);
            c.pos = c.pos == Bits::npos ? row.find_first() : row.find_next(c.pos);
            if (c.pos != Bits::npos) {
                const StateId t = static_cast<StateId>(c.pos);
                switch (c.phase) {
                case 0: return ProductEdge{n, {t, dec}, EdgeKind::Program};
                case 1: return ProductEdge{n, {t, g.k() - 1}, EdgeKind::Environment};
                default: return ProductEdge{n, {t, dec}, EdgeKind::Fault};
                }
            }
        }
        ++c.phase;
        c.pos = Bits::npos;
    }
    return std::nullopt;
}

std::string describe(const StateSpace& space, StateId a, StateId b)
{
    return "(" + space.label(a) + ", " + space.label(b) + ")";
}

std::optional<std::pair<StateId, StateId>> first_common(const Relation& a, const Relation& b)
{
    for (StateId s = 0; s < a.universe(); ++s) {
        const Bits both = a.row(s) & b.row(s);
        const auto t = both.find_first();
        if (t != Bits::npos)
            return std::make_pair(s, static_cast<StateId>(t));
    }
    return std::nullopt;
}

std::optional<std::pair<StateId, StateId>> first_escape(const Predicate& pred, const Relation& rel)
{
    for (StateId s = 0; s < rel.universe(); ++s) {
        if (!pred.contains(s))
            continue;
        const Bits out = rel.row(s) - pred.bits();
        const auto t = out.find_first();
        if (t != Bits::npos)
            return std::make_pair(s, static_cast<StateId>(t));
    }
    return std::nullopt;
}

// Searches for an execution that avoids `target` forever. Starts from
// `roots` (nodes already known to be reachable, with `reach` holding their
// witness paths), follows `graph` edges through nodes outside `target`, and
// reports the first terminal node or cycle found.
Verdict converge(const ProductGraph& graph, const Relation& program, const Relation& env, const Relation* faults,
                 const Search& reach, const std::vector<ProductNode>& roots, const Predicate& target)
{
    Search local(graph);
    for (const auto& r : roots)
        local.add_root(r);
    local.run([&](ProductNode n) { return !target.contains(n.state); },
              [](const ProductEdge&) { return false; });

    auto witness = [&](ProductNode n) {
        auto head = local.path_to(n);
        const ProductNode root = head.empty() ? n : head.front().from;
        auto path = reach.path_to(root);
        path.insert(path.end(), head.begin(), head.end());
        return path;
    };

    for (std::size_t i : local.order) {
        const ProductNode x = graph.node(i);
        if (graph.terminal(x)) {
            Verdict v = Verdict::fail("deadlock outside the target predicate");
            v.prefix = witness(x);
            v.stuck = x;
            return v;
        }
    }

    // Iterative three-colour DFS over the explored region.
    const std::size_t N = graph.node_count();
    std::vector<char> colour(N, 0);
    struct Frame {
        ProductNode node;
        EdgeCursor cursor;
        ProductEdge entered;
    };
    for (std::size_t start : local.order) {
        if (colour[start])
            continue;
        std::vector<Frame> stack;
        stack.push_back({graph.node(start), {}, {}});
        colour[start] = 1;
        while (!stack.empty()) {
            Frame& f = stack.back();
            auto e = next_edge(graph, program, env, faults, f.node, f.cursor);
            if (!e) {
                colour[graph.index(f.node)] = 2;
                stack.pop_back();
                continue;
            }
            if (target.contains(e->to.state))
                continue;
            const auto j = graph.index(e->to);
            if (colour[j] == 1) {
                Verdict v = Verdict::fail("cycle outside the target predicate");
                std::size_t at = stack.size();
                while (at > 0 && !(stack[at - 1].node == e->to))
                    --at;
                for (std::size_t q = at; q < stack.size(); ++q)
                    v.cycle.push_back(stack[q].entered);
                v.cycle.push_back(*e);
                v.prefix = witness(e->to);
                return v;
            }
            if (colour[j] == 0) {
                colour[j] = 1;
                stack.push_back({e->to, {}, *e});
            }
        }
    }
    return Verdict::ok();
}

Verdict find_bad_edge(Search& search, const Relation& bad, const char* what)
{
    auto hit = search.run([](ProductNode) { return true; },
                          [&](const ProductEdge& e) { return bad.contains(e.from.state, e.to.state); });
    if (!hit)
        return Verdict::ok();
    Verdict v = Verdict::fail(what);
    v.prefix = search.path_to(hit->from);
    v.prefix.push_back(*hit);
    return v;
}

}  // namespace

Verdict verify_stabilization(const Model& model, const Relation& program)
{
    model.validate();
    if (program.universe() != model.size())
        throw UsageError("program does not match the model's state space");
    const auto& sp = model.space;

    if (auto esc = first_escape(model.invariant, program | model.delta_e))
        return Verdict::fail("invariant not closed: " + describe(sp, esc->first, esc->second));
    if (auto r = first_common(program, model.delta_r))
        return Verdict::fail("program uses restricted transition " + describe(sp, r->first, r->second));

    const ProductGraph g = build_product(model, program, false);
    Search search(g);
    for (StateId s = 0; s < model.size(); ++s)
        search.add_root({s, 0});
    Verdict bad = find_bad_edge(search, model.delta_b, "bad transition reachable");
    if (!bad.pass)
        return bad;

    std::vector<ProductNode> roots;
    for (StateId s = 0; s < model.size(); ++s)
        if (!model.invariant.contains(s))
            roots.push_back({s, 0});
    return converge(g, program, model.delta_e, nullptr, search, roots, model.invariant);
}

bool check_C1(const Model& model, const Relation& program_prime, const Predicate& invariant_prime)
{
    model.validate();
    if (model.k != 2)
        throw UsageError("check_C1 is defined for k = 2 only");
    const Relation& P = model.delta_p;
    const Relation& E = model.delta_e;
    const Predicate& S2 = invariant_prime;

    if (!is_closed(S2, program_prime | E))
        return false;
    if (!S2.subset_of(model.invariant))
        return false;
    if (!project(program_prime, S2).subset_of(project(P, model.invariant)))
        return false;

    const Predicate entered = image(project(E, S2), S2);
    bool ok = true;
    S2.for_each([&](StateId s) {
        if (!ok)
            return;
        if (entered.contains(s) && E.has_successor(s) && P.has_successor(s) && !program_prime.has_successor(s))
            ok = false;
        const bool had_move = P.has_successor(s) || E.has_successor(s);
        if (had_move && !program_prime.has_successor(s) && !E.has_successor(s))
            ok = false;
    });
    return ok;
}

bool fault_free_traces_contained(const Model& model, const Relation& program_prime,
                                 const Predicate& invariant_prime)
{
    model.validate();
    if (!invariant_prime.subset_of(model.invariant))
        return false;
    const ProductGraph mine = build_product(model, program_prime, false);
    const ProductGraph orig = build_product(model, model.delta_p, false);

    // Each configuration pairs a node of the repaired product with every node
    // of the original product that can have produced the same labeled prefix.
    using Config = std::pair<std::size_t, std::vector<std::size_t>>;
    std::set<Config> seen;
    std::vector<Config> work;
    invariant_prime.for_each([&](StateId s) {
        Config c{mine.index({s, 0}), {orig.index({s, 0})}};
        if (seen.insert(c).second)
            work.push_back(std::move(c));
    });

    while (!work.empty()) {
        Config c = std::move(work.back());
        work.pop_back();
        const ProductNode x = mine.node(c.first);
        const auto steps = mine.edges(x);
        if (steps.empty()) {
            const bool can_stop = std::any_of(c.second.begin(), c.second.end(),
                                              [&](std::size_t q) { return orig.terminal(orig.node(q)); });
            if (!can_stop)
                return false;
        }
        for (const auto& e : steps) {
            std::vector<std::size_t> next;
            for (std::size_t q : c.second)
                orig.for_each_edge(orig.node(q), [&](const ProductEdge& o) {
                    if (o.kind == e.kind && o.to.state == e.to.state)
                        next.push_back(orig.index(o.to));
                });
            if (next.empty())
                return false;
            std::sort(next.begin(), next.end());
            next.erase(std::unique(next.begin(), next.end()), next.end());
            Config n{mine.index(e.to), std::move(next)};
            if (seen.insert(n).second)
                work.push_back(std::move(n));
        }
    }
    return true;
}

namespace {

Verdict failsafe_core(const Model& model, const Relation& program_prime, const Predicate& invariant_prime,
                      Search& search)
{
    const auto& sp = model.space;
    if (invariant_prime.empty())
        return Verdict::fail("empty invariant");
    if (auto esc = first_escape(invariant_prime, program_prime | model.delta_e))
        return Verdict::fail("invariant not closed: " + describe(sp, esc->first, esc->second));
    const bool same_behaviour = model.k == 2 ? check_C1(model, program_prime, invariant_prime)
                                             : fault_free_traces_contained(model, program_prime, invariant_prime);
    if (!same_behaviour)
        return Verdict::fail("fault-free behaviour from the invariant is not preserved");
    if (auto r = first_common(program_prime, model.delta_r))
        return Verdict::fail("program uses restricted transition " + describe(sp, r->first, r->second));
    invariant_prime.for_each([&](StateId s) { search.add_root({s, 0}); });
    return find_bad_edge(search, model.delta_b, "bad transition reachable under faults");
}

}  // namespace

Verdict verify_failsafe(const Model& model, const Relation& program_prime, const Predicate& invariant_prime)
{
    model.validate();
    const ProductGraph g = build_product(model, program_prime, true);
    Search search(g);
    return failsafe_core(model, program_prime, invariant_prime, search);
}

Verdict verify_masking(const Model& model, const Relation& program_prime, const Predicate& invariant_prime)
{
    model.validate();
    const ProductGraph with_faults = build_product(model, program_prime, true);
    Search search(with_faults);
    Verdict v = failsafe_core(model, program_prime, invariant_prime, search);
    if (!v.pass)
        return v;
    // The bad-edge search stopped early only on failure, so `search` now
    // holds the whole fault span.
    const ProductGraph fault_free = build_product(model, program_prime, false);
    std::vector<ProductNode> roots;
    for (std::size_t i : search.order) {
        const ProductNode n = with_faults.node(i);
        if (!invariant_prime.contains(n.state))
            roots.push_back(n);
    }
    return converge(fault_free, program_prime, model.delta_e, nullptr, search, roots, invariant_prime);
}

Verdict verify_leadsto(const Model& model, const Relation& program, const Predicate& from, const Predicate& to)
{
    model.validate();
    const ProductGraph g = build_product(model, program, false);
    Search search(g);
    for (StateId s = 0; s < model.size(); ++s)
        search.add_root({s, 0});
    search.run([](ProductNode) { return true; }, [](const ProductEdge&) { return false; });
    std::vector<ProductNode> roots;
    for (std::size_t i : search.order) {
        const ProductNode n = g.node(i);
        if (from.contains(n.state) && !to.contains(n.state))
            roots.push_back(n);
    }
    return converge(g, program, model.delta_e, nullptr, search, roots, to);
}

bool replays(const Verdict& verdict, const ProductGraph& graph)
{
    auto chain_ok = [&](const std::vector<ProductEdge>& steps) {
        for (std::size_t i = 0; i < steps.size(); ++i) {
            if (!graph.has_edge(steps[i]))
                return false;
            if (i > 0 && !(steps[i - 1].to == steps[i].from))
                return false;
        }
        return true;
    };
    if (!chain_ok(verdict.prefix) || !chain_ok(verdict.cycle))
        return false;
    if (!verdict.prefix.empty() && verdict.prefix.front().from.credit != 0)
        return false;
    if (!verdict.cycle.empty()) {
        if (!(verdict.cycle.back().to == verdict.cycle.front().from))
            return false;
        if (!verdict.prefix.empty() && !(verdict.prefix.back().to == verdict.cycle.front().from))
            return false;
    }
    if (verdict.stuck) {
        if (!graph.terminal(*verdict.stuck))
            return false;
        if (verdict.prefix.empty() ? verdict.stuck->credit != 0 : !(verdict.prefix.back().to == *verdict.stuck))
            return false;
    }
    return true;
}

std::string format_trace(const StateSpace& space, const Verdict& verdict)
{
    std::ostringstream out;
    auto step = [&](const ProductEdge& e) {
        out << space.label(e.from.state) << " --[" << edge_letter(e.kind) << "]--> " << space.label(e.to.state)
            << " (credit " << e.to.credit << ")\n";
    };
    if (!verdict.pass)
        out << "# " << verdict.reason << "\n";
    for (const auto& e : verdict.prefix)
        step(e);
    if (verdict.stuck)
        out << "# stuck at " << space.label(verdict.stuck->state) << " (credit " << verdict.stuck->credit << ")\n";
    if (!verdict.cycle.empty()) {
        out << "# cycle\n";
        for (const auto& e : verdict.cycle)
            step(e);
    }
    return out.str();
}

namespace {

// Odometer over one option per state; kNoChoice stands for "no transition".
constexpr StateId kNoChoice = static_cast<StateId>(-1);

template <class Accept>
bool any_selection(const std::vector<std::vector<StateId>>& options, const Relation& base, Accept&& accept)
{
    const std::size_t n = options.size();
    std::vector<std::size_t> pos(n, 0);
    for (;;) {
        Relation program = base;
        for (StateId s = 0; s < n; ++s)
            if (options[s][pos[s]] != kNoChoice)
                program.insert(s, options[s][pos[s]]);
        if (accept(program))
            return true;
        std::size_t i = 0;
        while (i < n && ++pos[i] == options[i].size())
            pos[i++] = 0;
        if (i == n)
            return false;
    }
}

}  // namespace

bool brute_force_repair_exists(const Model& model, RepairMode mode, std::size_t cap)
{
    model.validate();
    const std::size_t n = model.size();
    if (n > cap)
        throw UsageError("brute force is limited to " + std::to_string(cap) + " states");

    // Every state gets at most one transition; extra transitions never help
    // a state reach its target and only add ways to go wrong.
    if (mode == RepairMode::Stabilize) {
        const Relation forbid = model.delta_b | model.delta_r;
        std::vector<std::vector<StateId>> options(n, std::vector<StateId>{kNoChoice});
        for (StateId s = 0; s < n; ++s) {
            if (model.invariant.contains(s))
                continue;
            for (StateId t = 0; t < n; ++t)
                if (!forbid.contains(s, t))
                    options[s].push_back(t);
        }
        return any_selection(options, project(model.delta_p, model.invariant),
                             [&](const Relation& p) { return verify_stabilization(model, p).pass; });
    }

    const auto verify = mode == RepairMode::Failsafe ? verify_failsafe : verify_masking;
    const std::vector<StateId> inv = model.invariant.members();
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << inv.size()); ++mask) {
        Predicate sub(n);
        for (std::size_t i = 0; i < inv.size(); ++i)
            if (mask >> i & 1)
                sub.insert(inv[i]);
        if (!is_closed(sub, model.delta_e))
            continue;
        std::vector<std::vector<StateId>> options(n, std::vector<StateId>{kNoChoice});
        for (StateId s = 0; s < n; ++s) {
            for (StateId t = 0; t < n; ++t) {
                const bool ok = sub.contains(s) ? model.delta_p.contains(s, t) && sub.contains(t)
                                                : !model.delta_r.contains(s, t);
                if (ok)
                    options[s].push_back(t);
            }
        }
        if (any_selection(options, Relation(n), [&](const Relation& p) { return verify(model, p, sub).pass; }))
            return true;
    }
    return false;
}

}  // namespace ftrepair
