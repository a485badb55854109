#include "ftrepair/model.hpp"

#include <string>
#include <unordered_set>

namespace ftrepair {

Predicate::Predicate(std::size_t universe, std::initializer_list<StateId> members) : bits_(universe)
{
    for (StateId s : members) {
        if (s >= universe)
            throw UsageError("state " + std::to_string(s) + " out of range");
        bits_.set(s);
    }
}

Predicate Predicate::all(std::size_t universe)
{
    Predicate p(universe);
    p.bits_.set();
    return p;
}

Predicate Predicate::from_bits(Bits bits)
{
    Predicate p;
    p.bits_ = std::move(bits);
    return p;
}

void Predicate::check_same(const Predicate& o) const
{
    if (o.universe() != universe())
        throw UsageError("predicates over different state spaces");
}

bool Predicate::subset_of(const Predicate& other) const
{
    check_same(other);
    return bits_.is_subset_of(other.bits_);
}

bool Predicate::intersects(const Predicate& other) const
{
    check_same(other);
    return bits_.intersects(other.bits_);
}

Predicate Predicate::complement() const { return from_bits(~bits_); }

std::vector<StateId> Predicate::members() const
{
    std::vector<StateId> out;
    out.reserve(size());
    for_each([&](StateId s) { out.push_back(s); });
    return out;
}

Predicate& Predicate::operator|=(const Predicate& o)
{
    check_same(o);
    bits_ |= o.bits_;
    return *this;
}

Predicate& Predicate::operator&=(const Predicate& o)
{
    check_same(o);
    bits_ &= o.bits_;
    return *this;
}

Predicate& Predicate::operator-=(const Predicate& o)
{
    check_same(o);
    bits_ -= o.bits_;
    return *this;
}

Relation::Relation(std::size_t universe) : rows_(universe, Bits(universe)) {}

Relation::Relation(std::size_t universe, std::initializer_list<std::pair<StateId, StateId>> pairs)
    : Relation(universe)
{
    for (auto [a, b] : pairs) {
        if (a >= universe || b >= universe)
            throw UsageError("pair out of range");
        insert(a, b);
    }
}

std::size_t Relation::size() const
{
    std::size_t n = 0;
    for (const auto& r : rows_)
        n += r.count();
    return n;
}

bool Relation::empty() const
{
    for (const auto& r : rows_)
        if (r.any())
            return false;
    return true;
}

std::vector<StateId> Relation::successors(StateId a) const
{
    std::vector<StateId> out;
    for_each_successor(a, [&](StateId b) { out.push_back(b); });
    return out;
}

std::vector<std::pair<StateId, StateId>> Relation::pairs() const
{
    std::vector<std::pair<StateId, StateId>> out;
    for (StateId a = 0; a < rows_.size(); ++a)
        for_each_successor(a, [&](StateId b) { out.emplace_back(a, b); });
    return out;
}

Relation Relation::transpose() const
{
    Relation t(universe());
    for (StateId a = 0; a < rows_.size(); ++a)
        for_each_successor(a, [&](StateId b) { t.insert(b, a); });
    return t;
}

Predicate Relation::domain() const
{
    Predicate p(universe());
    for (StateId a = 0; a < rows_.size(); ++a)
        if (rows_[a].any())
            p.insert(a);
    return p;
}

void Relation::check_same(const Relation& o) const
{
    if (o.universe() != universe())
        throw UsageError("relations over different state spaces");
}

bool Relation::subset_of(const Relation& other) const
{
    check_same(other);
    for (std::size_t i = 0; i < rows_.size(); ++i)
        if (!rows_[i].is_subset_of(other.rows_[i]))
            return false;
    return true;
}

bool Relation::intersects(const Relation& other) const
{
    check_same(other);
    for (std::size_t i = 0; i < rows_.size(); ++i)
        if (rows_[i].intersects(other.rows_[i]))
            return true;
    return false;
}

Relation& Relation::operator|=(const Relation& o)
{
    check_same(o);
    for (std::size_t i = 0; i < rows_.size(); ++i)
        rows_[i] |= o.rows_[i];
    return *this;
}

Relation& Relation::operator&=(const Relation& o)
{
    check_same(o);
    for (std::size_t i = 0; i < rows_.size(); ++i)
        rows_[i] &= o.rows_[i];
    return *this;
}

Relation& Relation::operator-=(const Relation& o)
{
    check_same(o);
    for (std::size_t i = 0; i < rows_.size(); ++i)
        rows_[i] -= o.rows_[i];
    return *this;
}

std::string StateSpace::label(StateId s) const
{
    if (s < labels.size())
        return labels[s];
    return "s" + std::to_string(s);
}

void StateSpace::validate() const
{
    if (count == 0)
        throw UsageError("state space must contain at least one state");
    if (!labels.empty() && labels.size() != count)
        throw UsageError("label count does not match state count");
    std::unordered_set<std::string> seen;
    for (const std::string& l : labels)
        if (!seen.insert(l).second)
            throw UsageError("duplicate state label '" + l + "'");
}

Model Model::empty(std::size_t count, int k)
{
    Model m;
    m.space.count = count;
    m.delta_p = Relation(count);
    m.delta_e = Relation(count);
    m.delta_b = Relation(count);
    m.delta_r = Relation(count);
    m.faults = Relation(count);
    m.invariant = Predicate(count);
    m.k = k;
    return m;
}

void Model::validate() const
{
    space.validate();
    const std::size_t n = space.count;
    for (const Relation* r : {&delta_p, &delta_e, &delta_b, &delta_r, &faults})
        if (r->universe() != n)
            throw UsageError("relation does not match the model's state space");
    if (invariant.universe() != n)
        throw UsageError("invariant does not match the model's state space");
    if (k <= 1)
        throw UsageError("k must be greater than 1");
}

const char* to_string(Outcome o)
{
    switch (o) {
    case Outcome::Repaired: return "repaired";
    case Outcome::NotPossible: return "not-possible";
    case Outcome::Unknown: return "unknown";
    }
    return "?";
}

RepairOutcome RepairOutcome::not_possible(RepairStats stats)
{
    RepairOutcome r;
    r.outcome = Outcome::NotPossible;
    r.stats = stats;
    return r;
}

RepairOutcome RepairOutcome::success(Relation program, Predicate invariant, RepairStats stats)
{
    RepairOutcome r;
    r.outcome = Outcome::Repaired;
    r.synthetic_loops = Predicate(program.universe());
    r.program = std::move(program);
    r.invariant = std::move(invariant);
    r.stats = stats;
    return r;
}

Relation project(const Relation& rel, const Predicate& pred)
{
    if (rel.universe() != pred.universe())
        throw UsageError("project: relation and predicate over different state spaces");
    Relation out(rel.universe());
    pred.for_each([&](StateId a) { out.row(a) = rel.row(a) & pred.bits(); });
    return out;
}

bool is_closed(const Predicate& pred, const Relation& rel)
{
    if (rel.universe() != pred.universe())
        throw UsageError("is_closed: relation and predicate over different state spaces");
    bool closed = true;
    pred.for_each([&](StateId a) {
        if (closed && !rel.row(a).is_subset_of(pred.bits()))
            closed = false;
    });
    return closed;
}

Predicate image(const Relation& rel, const Predicate& pred)
{
    if (rel.universe() != pred.universe())
        throw UsageError("image: relation and predicate over different state spaces");
    Bits out(rel.universe());
    pred.for_each([&](StateId a) { out |= rel.row(a); });
    return Predicate::from_bits(std::move(out));
}

Predicate preimage(const Relation& rel, const Predicate& pred)
{
    if (rel.universe() != pred.universe())
        throw UsageError("preimage: relation and predicate over different state spaces");
    Predicate out(rel.universe());
    for (StateId a = 0; a < rel.universe(); ++a)
        if (rel.row(a).intersects(pred.bits()))
            out.insert(a);
    return out;
}

std::pair<Model, Predicate> augment_selfloops(const Model& model)
{
    Model out = model;
    Predicate looped(model.size());
    model.invariant.for_each([&](StateId s) {
        if (!model.delta_p.has_successor(s) && !model.delta_e.has_successor(s)) {
            out.delta_p.insert(s, s);
            looped.insert(s);
        }
    });
    return {std::move(out), std::move(looped)};
}

Relation strip_selfloops(Relation rel, const Predicate& looped)
{
    looped.for_each([&](StateId s) { rel.erase(s, s); });
    return rel;
}

Relation transitive_closure(const Relation& rel)
{
    // Row-wise Warshall: whenever i reaches j, i inherits j's successors.
    Relation out = rel;
    const std::size_t n = rel.universe();
    for (StateId j = 0; j < n; ++j)
        for (StateId i = 0; i < n; ++i)
            if (out.contains(i, j))
                out.row(i) |= out.row(j);
    return out;
}

Relation identity_on(const Predicate& pred)
{
    Relation out(pred.universe());
    pred.for_each([&](StateId s) { out.insert(s, s); });
    return out;
}

}  // namespace ftrepair
