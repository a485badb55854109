#include "ftrepair/stabilize.hpp"

#include <deque>
#include <limits>
#include <optional>

namespace ftrepair {

namespace {

constexpr StateId kNoState = std::numeric_limits<StateId>::max();

void check_stabilization_input(const Model& model)
{
    model.validate();
    if (model.delta_b.intersects(model.delta_e))
        throw UsageError("stabilization repair requires delta_b and delta_e to be disjoint");
}

// Because delta'_p|S must equal delta_p|S, an invariant that the environment
// can leave, or an inherited program that already misbehaves inside S,
// rules out every candidate before any search starts.
bool hopeless(const Model& model, const Relation& base, const Relation& forbid)
{
    return !is_closed(model.invariant, model.delta_e) || base.intersects(forbid);
}

}  // namespace

RepairOutcome add_stabilization_k2(const Model& model)
{
    check_stabilization_input(model);
    if (model.k != 2)
        throw UsageError("add_stabilization_k2 requires k = 2");

    const std::size_t n = model.size();
    const Relation forbid = model.delta_b | model.delta_r;
    Relation program = project(model.delta_p, model.invariant);
    RepairStats stats;
    if (hopeless(model, program, forbid))
        return RepairOutcome::not_possible(stats);

    Predicate R = model.invariant;
    for (;;) {
        ++stats.iterations;
        Predicate Rp(n);
        for (StateId s = 0; s < n; ++s)
            if (!R.contains(s) && !R.bits().is_subset_of(forbid.row(s)))
                Rp.insert(s);

        // Only states reaching R for the first time get transitions. Giving
        // an established state extra edges into the newly grown R could
        // close a loop through the environment outside S.
        Rp.for_each([&](StateId s) {
            if (!program.has_successor(s))
                program.row(s) = R.bits() - forbid.row(s);
        });

        const Predicate reach = R | Rp;
        Predicate joined(n);
        for (StateId s = 0; s < n; ++s) {
            if (R.contains(s))
                continue;
            const Bits& env = model.delta_e.row(s);
            if (env.is_subset_of(reach.bits()) && (env.any() || Rp.contains(s)))
                joined.insert(s);
        }
        if (joined.empty())
            break;
        R |= joined;
    }

    stats.r_size = R.size();
    if (R.size() < n)
        return RepairOutcome::not_possible(stats);
    return RepairOutcome::success(std::move(program), model.invariant, stats);
}

namespace {

// Grows the recovery region W one state at a time. Every state outside the
// invariant carries at most one program transition ("choice"); once a
// state's choice is relied upon by some member of W it never changes.
class GeneralRepair {
public:
    explicit GeneralRepair(const Model& m)
        : model_(m),
          n_(m.size()),
          forbid_(m.delta_b | m.delta_r),
          forbid_t_(forbid_.transpose()),
          W_(m.invariant),
          decided_(n_),
          choice_(n_, kNoState),
          chosen_by_(n_),
          dist_(n_),
          next_(n_)
    {
    }

    RepairStats run()
    {
        bool changed = true;
        while (changed) {
            changed = false;
            ++stats_.iterations;
            for (StateId s = 0; s < n_; ++s) {
                if (W_.contains(s))
                    continue;
                if (decided_.contains(s)) {
                    const StateId t = choice_[s];
                    if (t != kNoState && W_.contains(t) && try_join(s, t))
                        changed = true;
                    continue;
                }
                const Bits usable = W_.bits() - forbid_.row(s);
                const auto t = usable.find_first();
                if (t != Bits::npos && try_join(s, static_cast<StateId>(t))) {
                    changed = true;
                    continue;
                }
                if (model_.delta_e.has_successor(s) && try_join(s, kNoState))
                    changed = true;
            }
        }
        stats_.r_size = W_.size();
        return stats_;
    }

    bool complete() const { return W_.size() == n_; }

    Relation program() const
    {
        Relation p = project(model_.delta_p, model_.invariant);
        for (StateId s = 0; s < n_; ++s)
            if (!model_.invariant.contains(s) && choice_[s] != kNoState)
                p.insert(s, choice_[s]);
        return p;
    }

private:
    static constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max();

    void set_choice(StateId s, StateId t)
    {
        if (choice_[s] != kNoState)
            std::erase(chosen_by_[choice_[s]], s);
        choice_[s] = t;
        if (t != kNoState)
            chosen_by_[t].push_back(s);
    }

    // Program-step distance to W. Decided states may only use their own
    // choice; everyone else may use any permitted transition.
    void distances(StateId pending)
    {
        std::fill(dist_.begin(), dist_.end(), kInf);
        std::fill(next_.begin(), next_.end(), kNoState);
        std::deque<StateId> queue;
        Bits open = ~W_.bits();
        for (StateId s : decided_.members())
            open.reset(s);
        open.reset(pending);
        W_.for_each([&](StateId s) {
            dist_[s] = 0;
            queue.push_back(s);
        });
        auto visit = [&](StateId x, StateId y) {
            dist_[x] = dist_[y] + 1;
            next_[x] = y;
            queue.push_back(x);
        };
        while (!queue.empty()) {
            const StateId y = queue.front();
            queue.pop_front();
            const Bits cand = open - forbid_t_.row(y);
            for (auto x = cand.find_first(); x != Bits::npos; x = cand.find_next(x)) {
                open.reset(x);
                visit(static_cast<StateId>(x), y);
            }
            for (StateId x : chosen_by_[y])
                if (!W_.contains(x) && dist_[x] == kInf)
                    visit(x, y);
        }
    }

    bool try_join(StateId s, StateId t)
    {
        const bool was_decided = decided_.contains(s);
        const StateId old = choice_[s];
        set_choice(s, t);
        decided_.insert(s);
        distances(s);

        bool ok = true;
        model_.delta_e.for_each_successor(s, [&](StateId u) {
            if (dist_[u] == kInf || dist_[u] >= static_cast<std::size_t>(model_.k))
                ok = false;
        });
        if (!ok) {
            set_choice(s, old);
            if (!was_decided)
                decided_.erase(s);
            return false;
        }
        model_.delta_e.for_each_successor(s, [&](StateId u) { commit_chain(u); });
        W_.insert(s);
        return true;
    }

    void commit_chain(StateId u)
    {
        while (!W_.contains(u)) {
            if (!decided_.contains(u)) {
                set_choice(u, next_[u]);
                decided_.insert(u);
            }
            u = choice_[u];
        }
    }

    const Model& model_;
    std::size_t n_;
    Relation forbid_;
    Relation forbid_t_;
    Predicate W_;
    Predicate decided_;
    std::vector<StateId> choice_;
    std::vector<std::vector<StateId>> chosen_by_;
    std::vector<std::size_t> dist_;
    std::vector<StateId> next_;
    RepairStats stats_;
};

}  // namespace

RepairOutcome add_stabilization_general(const Model& model)
{
    check_stabilization_input(model);
    const Relation forbid = model.delta_b | model.delta_r;
    if (hopeless(model, project(model.delta_p, model.invariant), forbid))
        return RepairOutcome::not_possible();

    GeneralRepair repair(model);
    const RepairStats stats = repair.run();
    if (!repair.complete())
        return RepairOutcome::not_possible(stats);
    return RepairOutcome::success(repair.program(), model.invariant, stats);
}

RepairOutcome add_stabilization(const Model& model)
{
    return model.k == 2 ? add_stabilization_k2(model) : add_stabilization_general(model);
}

}  // namespace ftrepair
