#include "testkit.hpp"

#include <functional>
#include <map>
#include <stdexcept>

namespace testkit {

Relation random_relation(Rng& rng, std::size_t n, double density)
{
    Relation r(n);
    for (StateId a = 0; a < n; ++a)
        for (StateId b = 0; b < n; ++b)
            if (rng.chance(density))
                r.insert(a, b);
    return r;
}

Predicate random_subset(Rng& rng, std::size_t n, std::size_t lo, std::size_t hi)
{
    std::vector<StateId> ids(n);
    for (StateId s = 0; s < n; ++s)
        ids[s] = s;
    for (std::size_t i = n; i > 1; --i)
        std::swap(ids[i - 1], ids[static_cast<std::size_t>(rng.between(0, static_cast<int>(i) - 1))]);
    const auto count = static_cast<std::size_t>(rng.between(static_cast<int>(lo), static_cast<int>(hi)));
    Predicate p(n);
    for (std::size_t i = 0; i < count; ++i)
        p.insert(ids[i]);
    return p;
}

namespace {

Relation without_escapes(const Relation& r, const Predicate& s)
{
    Relation out = r;
    s.for_each([&](StateId a) { out.row(a) &= s.bits(); });
    return out;
}

Model blank(std::size_t n, int k)
{
    Model m = Model::empty(n, k);
    m.name = "random";
    return m;
}

}  // namespace

Model random_stabilization_model(Rng& rng, std::size_t max_states, int k)
{
    const auto n = static_cast<std::size_t>(rng.between(2, static_cast<int>(max_states)));
    Model m = blank(n, k);
    m.invariant = random_subset(rng, n, 1, n - 1);
    m.delta_p = random_relation(rng, n, rng.uniform(0, 0.4));
    m.delta_e = random_relation(rng, n, rng.uniform(0, 0.4));
    m.delta_b = random_relation(rng, n, rng.uniform(0, 0.5));
    m.delta_r = random_relation(rng, n, rng.uniform(0, 0.3));
    m.delta_b -= m.delta_e;
    if (rng.chance(0.9)) {
        m.delta_p = without_escapes(m.delta_p, m.invariant);
        m.delta_e = without_escapes(m.delta_e, m.invariant);
    }
    m.delta_p -= m.delta_r;
    m.delta_b -= ftrepair::project(m.delta_p, m.invariant);
    return m;
}

Model random_ft_model(Rng& rng, std::size_t max_states, int k)
{
    for (;;) {
        const auto n = static_cast<std::size_t>(rng.between(2, static_cast<int>(max_states)));
        Model m = blank(n, k);
        m.invariant = random_subset(rng, n, 1, n);
        m.delta_p = random_relation(rng, n, rng.uniform(0, 0.5));
        m.delta_e = random_relation(rng, n, rng.uniform(0, 0.4));
        m.delta_b = random_relation(rng, n, rng.uniform(0, 0.4));
        m.delta_r = random_relation(rng, n, rng.uniform(0, 0.3));
        m.faults = random_relation(rng, n, rng.uniform(0, 0.3));
        m.delta_p = without_escapes(m.delta_p, m.invariant);
        m.delta_e = without_escapes(m.delta_e, m.invariant);
        m.delta_p -= m.delta_r;
        if (ref_refines(m))
            return m;
    }
}

std::vector<Move> moves(const Relation& program, const Relation& env, const Relation* faults, int k, Node x)
{
    std::vector<Move> out;
    const int dec = x.credit > 0 ? x.credit - 1 : 0;
    bool program_enabled = false;
    for (StateId t = 0; t < program.universe(); ++t) {
        if (program.contains(x.state, t)) {
            program_enabled = true;
            out.push_back({{t, dec}, Step::P});
        }
    }
    if (x.credit == 0 || !program_enabled)
        for (StateId t = 0; t < env.universe(); ++t)
            if (env.contains(x.state, t))
                out.push_back({{t, k - 1}, Step::E});
    if (faults)
        for (StateId t = 0; t < faults->universe(); ++t)
            if (faults->contains(x.state, t))
                out.push_back({{t, dec}, Step::F});
    return out;
}

namespace {

bool closed_in(const Predicate& s, const Relation& r)
{
    for (StateId a = 0; a < r.universe(); ++a)
        for (StateId b = 0; b < r.universe(); ++b)
            if (r.contains(a, b) && s.contains(a) && !s.contains(b))
                return false;
    return true;
}

bool disjoint(const Relation& a, const Relation& b)
{
    for (auto [x, y] : a.pairs())
        if (b.contains(x, y))
            return false;
    return true;
}

using Graph = std::function<std::vector<Move>(Node)>;

// Everything reachable from `roots`, entering only nodes accepted by `keep`.
std::set<Node> explore(const Graph& g, const std::vector<Node>& roots, const std::function<bool(Node)>& keep)
{
    std::set<Node> seen(roots.begin(), roots.end());
    std::vector<Node> todo(roots.begin(), roots.end());
    while (!todo.empty()) {
        const Node x = todo.back();
        todo.pop_back();
        for (const Move& mv : g(x))
            if (keep(mv.to) && seen.insert(mv.to).second)
                todo.push_back(mv.to);
    }
    return seen;
}

bool touches_bad(const Graph& g, const std::set<Node>& nodes, const Relation& bad)
{
    for (const Node& x : nodes)
        for (const Move& mv : g(x))
            if (bad.contains(x.state, mv.to.state))
                return true;
    return false;
}

// From every root, every maximal path through non-target nodes must be
// finite and end by entering the target: no stuck node, no cycle.
bool converges(const Graph& g, const std::vector<Node>& roots, const Predicate& target)
{
    auto outside = [&](Node x) { return !target.contains(x.state); };
    std::set<Node> region = explore(g, roots, outside);
    std::map<Node, std::vector<Node>> inner;
    for (const Node& x : region) {
        const auto ms = g(x);
        if (ms.empty())
            return false;
        for (const Move& mv : ms)
            if (outside(mv.to))
                inner[x].push_back(mv.to);
    }
    // Peel nodes whose remaining successors are all gone; a cycle survives.
    bool progress = true;
    while (progress && !region.empty()) {
        progress = false;
        for (auto it = region.begin(); it != region.end();) {
            bool sink = true;
            for (const Node& y : inner[*it])
                if (region.count(y))
                    sink = false;
            if (sink) {
                it = region.erase(it);
                progress = true;
            } else {
                ++it;
            }
        }
    }
    return region.empty();
}

Graph graph_of(const Model& m, const Relation& program, bool with_faults)
{
    const Relation* f = with_faults ? &m.faults : nullptr;
    return [&m, &program, f](Node x) { return moves(program, m.delta_e, f, m.k, x); };
}

}  // namespace

bool ref_refines(const Model& m)
{
    if (!closed_in(m.invariant, m.delta_p | m.delta_e))
        return false;
    const Graph g = graph_of(m, m.delta_p, false);
    std::vector<Node> roots;
    m.invariant.for_each([&](StateId s) { roots.push_back({s, 0}); });
    return !touches_bad(g, explore(g, roots, [](Node) { return true; }), m.delta_b);
}

bool ref_stabilizing(const Model& m, const Relation& program)
{
    if (!closed_in(m.invariant, program | m.delta_e) || !disjoint(program, m.delta_r))
        return false;
    const Graph g = graph_of(m, program, false);
    std::vector<Node> all, roots;
    for (StateId s = 0; s < m.size(); ++s) {
        all.push_back({s, 0});
        if (!m.invariant.contains(s))
            roots.push_back({s, 0});
    }
    if (touches_bad(g, explore(g, all, [](Node) { return true; }), m.delta_b))
        return false;
    return converges(g, roots, m.invariant);
}

bool ref_traces_contained(const Model& m, const Relation& program, const Predicate& inv)
{
    if (!inv.subset_of(m.invariant))
        return false;
    const Graph mine = graph_of(m, program, false);
    const Graph orig = graph_of(m, m.delta_p, false);
    using Config = std::pair<Node, std::set<Node>>;

    // Depth-first enumeration of labeled paths. A path stops growing when it
    // revisits a configuration already on the path or one whose subtree has
    // been fully explored.
    std::set<Config> on_path, finished;
    std::function<bool(const Config&)> walk = [&](const Config& c) -> bool {
        if (finished.count(c) || on_path.count(c))
            return true;
        on_path.insert(c);
        const auto steps = mine(c.first);
        if (steps.empty()) {
            bool can_stop = false;
            for (const Node& q : c.second)
                if (orig(q).empty())
                    can_stop = true;
            if (!can_stop)
                return false;
        }
        for (const Move& mv : steps) {
            std::set<Node> next;
            for (const Node& q : c.second)
                for (const Move& o : orig(q))
                    if (o.kind == mv.kind && o.to.state == mv.to.state)
                        next.insert(o.to);
            if (next.empty() || !walk({mv.to, next}))
                return false;
        }
        on_path.erase(c);
        finished.insert(c);
        return true;
    };
    for (StateId s : inv.members())
        if (!walk({Node{s, 0}, {Node{s, 0}}}))
            return false;
    return true;
}

bool ref_failsafe(const Model& m, const Relation& program, const Predicate& inv)
{
    if (inv.empty() || !closed_in(inv, program | m.delta_e) || !ref_traces_contained(m, program, inv) ||
        !disjoint(program, m.delta_r))
        return false;
    const Graph g = graph_of(m, program, true);
    std::vector<Node> roots;
    inv.for_each([&](StateId s) { roots.push_back({s, 0}); });
    return !touches_bad(g, explore(g, roots, [](Node) { return true; }), m.delta_b);
}

bool ref_masking(const Model& m, const Relation& program, const Predicate& inv)
{
    if (!ref_failsafe(m, program, inv))
        return false;
    const Graph g = graph_of(m, program, true);
    std::vector<Node> roots;
    inv.for_each([&](StateId s) { roots.push_back({s, 0}); });
    std::vector<Node> span_outside;
    for (const Node& x : explore(g, roots, [](Node) { return true; }))
        if (!inv.contains(x.state))
            span_outside.push_back(x);
    return converges(graph_of(m, program, false), span_outside, inv);
}

bool ref_stabilization_exists(const Model& m)
{
    std::vector<std::pair<StateId, StateId>> candidates;
    for (StateId a = 0; a < m.size(); ++a)
        if (!m.invariant.contains(a))
            for (StateId b = 0; b < m.size(); ++b)
                if (!m.delta_b.contains(a, b) && !m.delta_r.contains(a, b))
                    candidates.emplace_back(a, b);
    if (candidates.size() > 20)
        throw std::invalid_argument("ref_stabilization_exists: model too large");
    const Relation base = ftrepair::project(m.delta_p, m.invariant);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << candidates.size()); ++mask) {
        Relation p = base;
        for (std::size_t i = 0; i < candidates.size(); ++i)
            if (mask >> i & 1)
                p.insert(candidates[i].first, candidates[i].second);
        if (ref_stabilizing(m, p))
            return true;
    }
    return false;
}

}  // namespace testkit
