#include "ftrepair/fault_tolerance.hpp"

#include <stdexcept>

namespace ftrepair {

Predicate remove_deadlock(const Predicate& pred, const Relation& delta_p, const Relation& delta_e)
{
    if (delta_p.universe() != pred.universe() || delta_e.universe() != pred.universe())
        throw UsageError("remove_deadlock: arguments over different state spaces");
    Predicate cur = pred;
    for (;;) {
        Predicate drop(pred.universe());
        cur.for_each([&](StateId s) {
            const bool stuck = !delta_p.row(s).intersects(cur.bits()) && !delta_e.row(s).intersects(cur.bits());
            const bool leaks = !delta_e.row(s).is_subset_of(cur.bits());
            if (stuck || leaks)
                drop.insert(s);
        });
        if (drop.empty())
            return cur;
        cur -= drop;
    }
}

Relation ensure_closure(const Relation& rel, const Predicate& pred)
{
    if (rel.universe() != pred.universe())
        throw UsageError("ensure_closure: arguments over different state spaces");
    Relation out = rel;
    pred.for_each([&](StateId s) { out.row(s) &= pred.bits(); });
    return out;
}

namespace {

void check_ft_input(const Model& model, const FtOptions& options)
{
    model.validate();
    if (model.k != 2 && !options.sound_only)
        throw UsageError("fault-tolerance repair is complete only for k = 2; use the sound-only option for k > 2");
    if (model.delta_p.intersects(model.delta_r))
        throw UsageError("fault-tolerance repair requires delta_p and delta_r to be disjoint");
    if (!is_closed(model.invariant, model.delta_p | model.delta_e))
        throw UsageError("fault-tolerance repair requires S to be closed in delta_p and delta_e");
}

RepairOutcome give_up(const Model& model, RepairStats stats)
{
    RepairOutcome r = RepairOutcome::not_possible(stats);
    if (model.k != 2)
        r.outcome = Outcome::Unknown;
    return r;
}

Predicate sources_of(const Relation& a, const Relation& b)
{
    Predicate out(a.universe());
    for (StateId s = 0; s < a.universe(); ++s)
        if (a.row(s).intersects(b.row(s)))
            out.insert(s);
    return out;
}

Relation into(const Relation& base, const Predicate& targets)
{
    Relation out = base;
    for (StateId s = 0; s < out.universe(); ++s)
        out.row(s) |= targets.bits();
    return out;
}

// Closes ms1/ms2 under the propagation rules and returns the matching mt.
// With `program` set, a state triggered by the environment is doomed only
// if none of its current program transitions survives mt; without it, only
// if every conceivable transition is in mt.
MsSets propagate(const Model& m, Predicate ms1, Predicate ms2, const Relation* program)
{
    const Relation forbidden = m.delta_b | m.delta_r;
    const Predicate env_bad = sources_of(m.delta_e, m.delta_b);
    Relation mt = into(forbidden, ms2);
    for (;;) {
        const Predicate old1 = ms1;
        const Predicate old2 = ms2;
        Predicate grow(m.size());
        for (StateId s = 0; s < m.size(); ++s) {
            if (m.faults.row(s).intersects(ms2.bits())) {
                grow.insert(s);
                continue;
            }
            if (!env_bad.contains(s) && !m.delta_e.row(s).intersects(ms1.bits()))
                continue;
            const bool trapped = program ? program->row(s).is_subset_of(mt.row(s)) : mt.row(s).all();
            if (trapped)
                grow.insert(s);
        }
        ms1 |= grow;
        ms2 |= ms1 | preimage(m.delta_e, ms1);
        mt = into(forbidden, ms2);
        if (ms1 == old1 && ms2 == old2)
            return {std::move(ms1), std::move(ms2), std::move(mt)};
    }
}

// Shrinks S' until every state whose original program and environment were
// both active keeps a repaired program transition, and no environment step
// leads into a state that lost it.
Predicate prune_silenced(const Model& m, Relation& program, Predicate inv)
{
    for (;;) {
        if (inv.empty())
            return inv;
        const Predicate before = inv;
        program = ensure_closure(program, inv);
        Predicate ms3(m.size());
        for (StateId s = 0; s < m.size(); ++s)
            if (m.delta_e.has_successor(s) && m.delta_p.has_successor(s) && !program.has_successor(s))
                ms3.insert(s);
        const Predicate ms4 = preimage(m.delta_e, ms3);
        inv = remove_deadlock(inv - ms4, m.delta_p, m.delta_e);
        if (inv == before)
            return inv;
    }
}

}  // namespace

RepairOutcome add_failsafe(const Model& model, const FtOptions& options)
{
    check_ft_input(model, options);
    auto [m, looped] = augment_selfloops(model);
    const Relation loops = identity_on(looped);
    RepairStats stats;

    Predicate ms1 = sources_of(m.faults, m.delta_b);
    Predicate ms2 = ms1 | sources_of(m.delta_e, m.delta_b);
    MsSets ms = propagate(m, std::move(ms1), std::move(ms2), nullptr);
    stats.ms1_size = ms.ms1.size();
    stats.ms2_size = ms.ms2.size();

    // The recorded self-loops are bookkeeping, not program behaviour; they
    // must not get their state removed just because they happen to be in mt.
    Relation program = project(m.delta_p, m.invariant) - (ms.mt - loops);
    Predicate inv = remove_deadlock(m.invariant - ms.ms2, program, m.delta_e);
    inv = prune_silenced(m, program, std::move(inv));
    ++stats.iterations;
    if (inv.empty())
        return give_up(model, stats);

    // Outside S' the program may do anything that mt does not forbid.
    const Predicate outside = inv.complement();
    outside.for_each([&](StateId s) { program.row(s).set(); });
    program -= ms.mt;
    program -= loops;

    RepairOutcome out = RepairOutcome::success(std::move(program), std::move(inv), stats);
    out.synthetic_loops = looped;
    return out;
}

RepairOutcome add_masking(const Model& model, const FtOptions& options)
{
    check_ft_input(model, options);
    auto [m, looped] = augment_selfloops(model);
    const Relation loops = identity_on(looped);
    const std::size_t n = m.size();
    const Relation base_forbidden = m.delta_b | m.delta_r;
    const Predicate fault_bad = sources_of(m.faults, m.delta_b);
    const Predicate env_bad = sources_of(m.delta_e, m.delta_b);

    RepairStats stats;
    Relation forbid = base_forbidden;
    Predicate doomed(n);
    Predicate inv = m.invariant;
    Relation program(n);

    // The recovery region is rebuilt each round with every transition that
    // an earlier round had to forbid, so recovery never relies on a
    // transition that mt later removes. Both forbid and doomed only grow.
    const std::size_t limit = 4 * n * n + 8;
    for (std::size_t round = 0;; ++round) {
        if (round > limit)
            throw std::logic_error("add_masking: outer fixpoint did not stabilise");
        ++stats.iterations;
        program = project(m.delta_p, inv) - (forbid - loops);

        Predicate R = inv;
        Predicate Rp(n);
        for (;;) {
            Rp = Predicate(n);
            for (StateId s = 0; s < n; ++s)
                if (!R.contains(s) && !R.bits().is_subset_of(forbid.row(s)))
                    Rp.insert(s);
            Rp.for_each([&](StateId s) {
                if (!program.has_successor(s))
                    program.row(s) = R.bits() - forbid.row(s);
            });
            const Predicate reach = R | Rp;
            Predicate joined(n);
            for (StateId s = 0; s < n; ++s) {
                if (R.contains(s))
                    continue;
                const Bits& env = m.delta_e.row(s);
                if (env.is_subset_of(reach.bits()) && (env.any() || Rp.contains(s)))
                    joined.insert(s);
            }
            if (joined.empty())
                break;
            R |= joined;
        }
        stats.r_size = R.size();

        Predicate ms1 = (R | Rp).complement() | fault_bad;
        Predicate ms2 = R.complement() | doomed | ms1 | env_bad;
        MsSets ms = propagate(m, std::move(ms1), std::move(ms2), &program);
        stats.ms1_size = ms.ms1.size();
        stats.ms2_size = ms.ms2.size();

        program -= (ms.mt - loops);
        Predicate next = remove_deadlock(m.invariant - ms.ms2, program, m.delta_e);
        next = prune_silenced(m, program, std::move(next));
        if (next.empty())
            return give_up(model, stats);

        const bool stable = next == inv && ms.mt.subset_of(forbid);
        if (stable)
            break;
        forbid |= ms.mt;
        doomed |= ms.ms2;
        inv = std::move(next);
    }

    program -= loops;
    RepairOutcome out = RepairOutcome::success(std::move(program), std::move(inv), stats);
    out.synthetic_loops = looped;
    return out;
}

RepairOutcome add_nonmasking(const Model& model, const FtOptions& options)
{
    Model relaxed = model;
    relaxed.delta_b = Relation(model.size());
    return add_masking(relaxed, options);
}

}  // namespace ftrepair
