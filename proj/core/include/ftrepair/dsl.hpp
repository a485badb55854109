#pragma once

#include "ftrepair/model.hpp"

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ftrepair::dsl {

struct SourceLoc {
    int line = 1;
    int column = 1;
};

class ParseError : public std::runtime_error {
public:
    ParseError(SourceLoc loc, const std::string& message);
    SourceLoc where() const { return loc_; }

private:
    SourceLoc loc_;
};

struct VariableDecl {
    std::string name;
    bool boolean = false;
    long lo = 0;  // for booleans: 0..1 with false = 0
    long hi = 1;
    SourceLoc loc;

    std::size_t domain_size() const { return static_cast<std::size_t>(hi - lo + 1); }
};

enum class Op {
    IntLit, BoolLit, Var, Primed,
    Neg, Not,
    Add, Sub,
    Eq, Ne, Lt, Le, Gt, Ge,
    And, Or, Xor, Implies,
};

enum class Type { Int, Bool };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    Op op = Op::IntLit;
    long value = 0;      // literals
    int var = -1;        // index into the declaration list for Var / Primed
    ExprPtr lhs;         // unary operand or left operand
    ExprPtr rhs;
    Type type = Type::Int;
    SourceLoc loc;
};

bool same_expr(const Expr& a, const Expr& b);

struct ModelSpec {
    std::string name;
    std::vector<VariableDecl> variables;
    ExprPtr invariant;
    std::vector<ExprPtr> program;
    std::vector<ExprPtr> environment;
    std::vector<ExprPtr> bad;
    std::vector<ExprPtr> restricted;
    std::vector<ExprPtr> faults;
    int k = 2;

    bool operator==(const ModelSpec& other) const;
};

ModelSpec parse_model(const std::string& text);

// Parses a standalone state predicate over the variables of `spec`.
ExprPtr parse_predicate(const ModelSpec& spec, const std::string& text);

std::string to_string(const ModelSpec& spec, const Expr& expr);
std::string pretty_print(const ModelSpec& spec);

constexpr std::size_t kDefaultStateCap = 10'000'000;

// FTREPAIR_STATE_CAP if set to a positive integer, the default cap otherwise.
std::size_t state_cap_from_env();

class CapExceeded : public UsageError {
public:
    using UsageError::UsageError;
};

// Enumerates the product of the variable domains in declaration order (the
// first variable varies slowest) and collects the pairs satisfying each
// relation block. Primed variables a relation leaves unconstrained range
// over their whole domain.
Model elaborate(const ModelSpec& spec, std::optional<std::size_t> cap = std::nullopt);

Predicate evaluate_predicate(const ModelSpec& spec, const Expr& expr);

// Variable values of state `s`, in declaration order.
std::vector<long> decode_state(const ModelSpec& spec, StateId s);

}  // namespace ftrepair::dsl
