#include "ftrepair/extensions.hpp"
#include "ftrepair/fault_tolerance.hpp"
#include "ftrepair/semantics.hpp"
#include "ftrepair/stabilize.hpp"
#include "support/testkit.hpp"

#include <doctest.h>

using namespace ftrepair;

namespace {

constexpr StateId a = 0, b = 1, c = 2;

// Reachability by repeated squaring of the adjacency matrix, independent of
// the library's closure routine.
Relation closure_by_squaring(const Relation& r)
{
    const std::size_t n = r.universe();
    std::vector<std::vector<bool>> m(n, std::vector<bool>(n));
    for (auto [x, y] : r.pairs())
        m[x][y] = true;
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t x = 0; x < n; ++x)
            for (std::size_t y = 0; y < n; ++y)
                if (m[x][y])
                    for (std::size_t z = 0; z < n; ++z)
                        if (m[y][z] && !m[x][z]) {
                            m[x][z] = true;
                            changed = true;
                        }
    }
    Relation out(n);
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < n; ++y)
            if (m[x][y])
                out.insert(static_cast<StateId>(x), static_cast<StateId>(y));
    return out;
}

}  // namespace

TEST_CASE("eventually fair: environment moves become faults")
{
    Model m = Model::empty(3);
    m.invariant = Predicate(3, {a});
    Model same = eventually_fair_transform(m);
    CHECK(same.faults == m.faults);
    CHECK(same.delta_e == m.delta_e);

    m.delta_e = Relation(3, {{a, b}});
    const Model t = eventually_fair_transform(m);
    CHECK(t.faults == Relation(3, {{a, b}}));
    CHECK(t.delta_e == m.delta_e);
    CHECK(t.delta_p == m.delta_p);
    CHECK(t.invariant == m.invariant);
}

TEST_CASE("eventually fair pipeline on a four-state instance")
{
    // The environment may push 0 to 1 early; from 1 the program must not
    // take the bad step to 3 and can return to 0 through 2.
    Model m = Model::empty(4);
    m.invariant = Predicate(4, {0});
    m.delta_p = Relation(4, {{0, 0}});
    m.delta_e = Relation(4, {{1, 2}});
    m.faults = Relation(4, {{0, 1}});
    m.delta_b = Relation(4, {{1, 3}});
    const Model t = eventually_fair_transform(m);
    const RepairOutcome r = add_failsafe(t);
    REQUIRE(r.repaired());
    CHECK(verify_failsafe(t, r.program, r.invariant).pass);
    const RepairOutcome mask = add_masking(t);
    REQUIRE(mask.repaired());
    CHECK(verify_masking(t, mask.program, mask.invariant).pass);
}

TEST_CASE("consecutive environment steps")
{
    CHECK(consecutive_env_transform([] {
              Model m = Model::empty(3);
              m.delta_e = Relation(3, {{a, b}, {b, c}});
              return m;
          }())
              .delta_e == Relation(3, {{a, b}, {b, c}, {a, c}}));

    Model closed = Model::empty(3);
    closed.delta_e = Relation(3, {{a, b}, {b, c}, {a, c}});
    CHECK(consecutive_env_transform(closed).delta_e == closed.delta_e);

    Model cycle = Model::empty(2);
    cycle.delta_e = Relation(2, {{a, b}, {b, a}});
    CHECK(consecutive_env_transform(cycle).delta_e == Relation(2, {{a, b}, {b, a}, {a, a}, {b, b}}));
}

TEST_CASE("strict invariant mode")
{
    const Predicate s(3, {a, b});
    const RepairOutcome same = RepairOutcome::success(Relation(3, {{a, b}}), s);
    CHECK(strict_invariant_mode(same, s).repaired());
    CHECK(strict_invariant_mode(same, s).program == same.program);

    const RepairOutcome shrunk = RepairOutcome::success(Relation(3), Predicate(3, {a}));
    CHECK(strict_invariant_mode(shrunk, s).outcome == Outcome::NotPossible);
    CHECK(strict_invariant_mode(RepairOutcome::not_possible(), s).outcome == Outcome::NotPossible);
}

TEST_CASE("property: closure is idempotent and matches an independent computation")
{
    testkit::Rng rng(11);
    for (int round = 0; round < 300; ++round) {
        Model m = testkit::random_stabilization_model(rng, 8, 2);
        const Model once = consecutive_env_transform(m);
        CHECK(once.delta_e == closure_by_squaring(m.delta_e));
        CHECK(consecutive_env_transform(once).delta_e == once.delta_e);
        CHECK(m.delta_e.subset_of(once.delta_e));
    }
}

TEST_CASE("property: eventually fair never shrinks a relation")
{
    testkit::Rng rng(12);
    for (int round = 0; round < 300; ++round) {
        const Model m = testkit::random_ft_model(rng, 8, 2);
        const Model t = eventually_fair_transform(m);
        CHECK(m.delta_p.subset_of(t.delta_p));
        CHECK(m.delta_e.subset_of(t.delta_e));
        CHECK(m.delta_b.subset_of(t.delta_b));
        CHECK(m.delta_r.subset_of(t.delta_r));
        CHECK(m.faults.subset_of(t.faults));
        CHECK(m.delta_e.subset_of(t.faults));
    }
}

TEST_CASE("property: strict mode never turns a failure into success")
{
    testkit::Rng rng(13);
    for (int round = 0; round < 300; ++round) {
        const Model m = testkit::random_ft_model(rng, 6, 2);
        for (const RepairOutcome& r : {add_failsafe(m), add_masking(m)}) {
            const RepairOutcome strict = strict_invariant_mode(r, m.invariant);
            if (!r.repaired())
                CHECK_FALSE(strict.repaired());
            if (strict.repaired())
                CHECK(strict.invariant == m.invariant);
        }
        // Stabilization keeps S, so strict mode is the identity there.
        const Model sm = testkit::random_stabilization_model(rng, 6, 2);
        const RepairOutcome st = add_stabilization(sm);
        CHECK(strict_invariant_mode(st, sm.invariant).outcome == st.outcome);
    }
}
