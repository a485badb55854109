#pragma once

#include <boost/dynamic_bitset.hpp>

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ftrepair {

using StateId = std::uint32_t;
using Bits = boost::dynamic_bitset<std::uint64_t>;

// Raised when an operation is called outside its contract (mismatched
// spaces, k out of range, violated algorithm preconditions).
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Predicate {
public:
    Predicate() = default;
    explicit Predicate(std::size_t universe) : bits_(universe) {}
    Predicate(std::size_t universe, std::initializer_list<StateId> members);

    static Predicate all(std::size_t universe);
    static Predicate from_bits(Bits bits);

    std::size_t universe() const { return bits_.size(); }
    std::size_t size() const { return bits_.count(); }
    bool empty() const { return bits_.none(); }

    bool contains(StateId s) const { return bits_.test(s); }
    void insert(StateId s) { bits_.set(s); }
    void erase(StateId s) { bits_.reset(s); }

    bool subset_of(const Predicate& other) const;
    bool intersects(const Predicate& other) const;
    Predicate complement() const;
    std::vector<StateId> members() const;

    template <class F>
    void for_each(F&& fn) const
    {
        for (auto i = bits_.find_first(); i != Bits::npos; i = bits_.find_next(i))
            fn(static_cast<StateId>(i));
    }

    const Bits& bits() const { return bits_; }

    Predicate& operator|=(const Predicate& o);
    Predicate& operator&=(const Predicate& o);
    Predicate& operator-=(const Predicate& o);
    friend Predicate operator|(Predicate a, const Predicate& b) { return a |= b; }
    friend Predicate operator&(Predicate a, const Predicate& b) { return a &= b; }
    friend Predicate operator-(Predicate a, const Predicate& b) { return a -= b; }
    friend bool operator==(const Predicate& a, const Predicate& b) { return a.bits_ == b.bits_; }

private:
    void check_same(const Predicate& o) const;
    Bits bits_;
};

// A set of ordered state pairs stored as a bit matrix, one row per source.
class Relation {
public:
    Relation() = default;
    explicit Relation(std::size_t universe);
    Relation(std::size_t universe, std::initializer_list<std::pair<StateId, StateId>> pairs);

    std::size_t universe() const { return rows_.size(); }
    std::size_t size() const;
    bool empty() const;

    bool contains(StateId a, StateId b) const { return rows_[a].test(b); }
    void insert(StateId a, StateId b) { rows_[a].set(b); }
    void erase(StateId a, StateId b) { rows_[a].reset(b); }

    const Bits& row(StateId a) const { return rows_[a]; }
    Bits& row(StateId a) { return rows_[a]; }
    bool has_successor(StateId a) const { return rows_[a].any(); }
    std::vector<StateId> successors(StateId a) const;
    void clear_row(StateId a) { rows_[a].reset(); }

    template <class F>
    void for_each_successor(StateId a, F&& fn) const
    {
        const Bits& r = rows_[a];
        for (auto i = r.find_first(); i != Bits::npos; i = r.find_next(i))
            fn(static_cast<StateId>(i));
    }

    // Sorted lexicographically by (source, target).
    std::vector<std::pair<StateId, StateId>> pairs() const;
    Relation transpose() const;
    // States with at least one outgoing pair.
    Predicate domain() const;

    bool subset_of(const Relation& other) const;
    bool intersects(const Relation& other) const;

    Relation& operator|=(const Relation& o);
    Relation& operator&=(const Relation& o);
    Relation& operator-=(const Relation& o);
    friend Relation operator|(Relation a, const Relation& b) { return a |= b; }
    friend Relation operator&(Relation a, const Relation& b) { return a &= b; }
    friend Relation operator-(Relation a, const Relation& b) { return a -= b; }
    friend bool operator==(const Relation& a, const Relation& b) { return a.rows_ == b.rows_; }

private:
    void check_same(const Relation& o) const;
    std::vector<Bits> rows_;
};

struct StateSpace {
    std::size_t count = 0;
    std::vector<std::string> labels;

    std::string label(StateId s) const;
    void validate() const;
};

struct Model {
    std::string name = "model";
    StateSpace space;
    Relation delta_p;
    Relation delta_e;
    Relation delta_b;
    Relation delta_r;
    Relation faults;
    Predicate invariant;
    int k = 2;

    // Builds a model over `count` unlabeled states with empty relations.
    static Model empty(std::size_t count, int k = 2);

    std::size_t size() const { return space.count; }
    // Throws UsageError if any component lives in a different space or k <= 1.
    void validate() const;
};

enum class Outcome { Repaired, NotPossible, Unknown };

const char* to_string(Outcome o);

struct RepairStats {
    std::size_t iterations = 0;
    std::size_t r_size = 0;
    std::size_t ms1_size = 0;
    std::size_t ms2_size = 0;
};

struct RepairOutcome {
    Outcome outcome = Outcome::NotPossible;
    Relation program;       // delta'_p, meaningful when repaired
    Predicate invariant;    // S'
    Predicate synthetic_loops;  // states whose self-loops were added and stripped
    RepairStats stats;

    bool repaired() const { return outcome == Outcome::Repaired; }

    static RepairOutcome not_possible(RepairStats stats = {});
    static RepairOutcome success(Relation program, Predicate invariant, RepairStats stats = {});
};

Relation project(const Relation& rel, const Predicate& pred);
bool is_closed(const Predicate& pred, const Relation& rel);
Predicate image(const Relation& rel, const Predicate& pred);
Predicate preimage(const Relation& rel, const Predicate& pred);

// Gives every deadlocked invariant state (no delta_p or delta_e successor) a
// program self-loop. Returns the augmented model and the set of touched states.
std::pair<Model, Predicate> augment_selfloops(const Model& model);
Relation strip_selfloops(Relation rel, const Predicate& looped);

Relation transitive_closure(const Relation& rel);
Relation identity_on(const Predicate& pred);

}  // namespace ftrepair
