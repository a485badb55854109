#include "ftrepair/dsl.hpp"

#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <limits>
#include <map>
#include <sstream>

namespace ftrepair::dsl {

ParseError::ParseError(SourceLoc loc, const std::string& message)
    : std::runtime_error(std::to_string(loc.line) + ":" + std::to_string(loc.column) + ": " + message), loc_(loc)
{
}

namespace {

enum class Tok {
    Ident, Int, LBrace, RBrace, LParen, RParen, Semi, Colon, DotDot, Prime,
    Plus, Minus, EqEq, NotEq, Lt, Le, Gt, Ge, AndAnd, OrOr, Bang, Arrow, End,
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    long value = 0;
    SourceLoc loc;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) {}

    std::vector<Token> run()
    {
        std::vector<Token> out;
        for (;;) {
            skip_blank();
            Token t;
            t.loc = {line_, col_};
            if (pos_ >= src_.size()) {
                out.push_back(t);
                return out;
            }
            const char c = src_[pos_];
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::size_t start = pos_;
                while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                    advance();
                t.kind = Tok::Ident;
                t.text = src_.substr(start, pos_ - start);
            } else if (std::isdigit(static_cast<unsigned char>(c))) {
                std::size_t start = pos_;
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                    advance();
                t.kind = Tok::Int;
                t.text = src_.substr(start, pos_ - start);
                errno = 0;
                t.value = std::strtol(t.text.c_str(), nullptr, 10);
                if (errno == ERANGE)
                    throw ParseError(t.loc, "integer literal out of range");
            } else {
                t.kind = punct(t.loc);
            }
            out.push_back(t);
        }
    }

private:
    void advance()
    {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    bool peek(const char* s) const { return src_.compare(pos_, std::char_traits<char>::length(s), s) == 0; }

    void skip_blank()
    {
        while (pos_ < src_.size()) {
            if (std::isspace(static_cast<unsigned char>(src_[pos_]))) {
                advance();
            } else if (peek("//")) {
                while (pos_ < src_.size() && src_[pos_] != '\n')
                    advance();
            } else {
                return;
            }
        }
    }

    Tok punct(SourceLoc loc)
    {
        static const std::pair<const char*, Tok> table[] = {
            {"..", Tok::DotDot}, {"==", Tok::EqEq}, {"!=", Tok::NotEq}, {"<=", Tok::Le}, {">=", Tok::Ge},
            {"&&", Tok::AndAnd}, {"||", Tok::OrOr}, {"=>", Tok::Arrow}, {"{", Tok::LBrace}, {"}", Tok::RBrace},
            {"(", Tok::LParen}, {")", Tok::RParen}, {";", Tok::Semi}, {":", Tok::Colon}, {"'", Tok::Prime},
            {"+", Tok::Plus}, {"-", Tok::Minus}, {"<", Tok::Lt}, {">", Tok::Gt}, {"!", Tok::Bang},
        };
        for (const auto& [text, kind] : table) {
            if (peek(text)) {
                for (std::size_t i = 0; text[i]; ++i)
                    advance();
                return kind;
            }
        }
        throw ParseError(loc, std::string("unexpected character '") + src_[pos_] + "'");
    }

    const std::string& src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

const char* describe(Tok t)
{
    switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Int: return "integer";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Semi: return "';'";
    case Tok::Colon: return "':'";
    case Tok::DotDot: return "'..'";
    case Tok::Prime: return "'''";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::EqEq: return "'=='";
    case Tok::NotEq: return "'!='";
    case Tok::Lt: return "'<'";
    case Tok::Le: return "'<='";
    case Tok::Gt: return "'>'";
    case Tok::Ge: return "'>='";
    case Tok::AndAnd: return "'&&'";
    case Tok::OrOr: return "'||'";
    case Tok::Bang: return "'!'";
    case Tok::Arrow: return "'=>'";
    case Tok::End: return "end of input";
    }
    return "token";
}

ExprPtr make(Op op, Type type, SourceLoc loc, ExprPtr lhs = nullptr, ExprPtr rhs = nullptr)
{
    auto e = std::make_shared<Expr>();
    e->op = op;
    e->type = type;
    e->loc = loc;
    e->lhs = std::move(lhs);
    e->rhs = std::move(rhs);
    return e;
}

class Parser {
public:
    Parser(std::vector<Token> toks, std::vector<VariableDecl>* vars) : toks_(std::move(toks)), vars_(vars) {}

    ModelSpec model()
    {
        ModelSpec spec;
        expect_word("model");
        spec.name = expect(Tok::Ident).text;
        expect(Tok::LBrace);
        std::map<std::string, bool> seen;
        auto once = [&](const Token& t) {
            if (seen[t.text])
                throw ParseError(t.loc, "duplicate section '" + t.text + "'");
            seen[t.text] = true;
        };
        bool has_invariant = false;
        while (!at(Tok::RBrace)) {
            const Token t = expect(Tok::Ident);
            if (t.text == "var") {
                declare();
            } else if (t.text == "invariant") {
                once(t);
                expect(Tok::Colon);
                spec.invariant = predicate();
                expect(Tok::Semi);
                has_invariant = true;
            } else if (t.text == "k" && at(Tok::Colon)) {
                once(t);
                expect(Tok::Colon);
                const Token v = expect(Tok::Int);
                if (v.value < 2 || v.value > std::numeric_limits<int>::max())
                    throw ParseError(v.loc, "k must be an integer greater than 1");
                spec.k = static_cast<int>(v.value);
                expect(Tok::Semi);
            } else if (auto* block = section(spec, t.text)) {
                once(t);
                relations(*block);
            } else {
                throw ParseError(t.loc, "unknown section '" + t.text + "'");
            }
        }
        const Token close = expect(Tok::RBrace);
        if (!at(Tok::End))
            throw ParseError(peek().loc, "trailing input after model");
        if (vars_->empty())
            throw ParseError(close.loc, "model declares no variables");
        if (!has_invariant)
            throw ParseError(close.loc, "missing invariant section");
        spec.variables = *vars_;
        return spec;
    }

    ExprPtr standalone_predicate()
    {
        ExprPtr e = predicate();
        if (!at(Tok::End))
            throw ParseError(peek().loc, "trailing input after predicate");
        return e;
    }

private:
    static std::vector<ExprPtr>* section(ModelSpec& spec, const std::string& name)
    {
        if (name == "program") return &spec.program;
        if (name == "environment") return &spec.environment;
        if (name == "bad") return &spec.bad;
        if (name == "restricted") return &spec.restricted;
        if (name == "faults") return &spec.faults;
        return nullptr;
    }

    const Token& peek() const { return toks_[pos_]; }
    bool at(Tok k) const { return peek().kind == k; }
    bool at_word(const char* w) const { return at(Tok::Ident) && peek().text == w; }

    Token expect(Tok k)
    {
        if (!at(k))
            throw ParseError(peek().loc, std::string("expected ") + describe(k) + ", found " + found());
        return toks_[pos_++];
    }

    void expect_word(const char* w)
    {
        if (!at_word(w))
            throw ParseError(peek().loc, std::string("expected '") + w + "', found " + found());
        ++pos_;
    }

    std::string found() const
    {
        const Token& t = peek();
        if (t.kind == Tok::Ident || t.kind == Tok::Int)
            return "'" + t.text + "'";
        return describe(t.kind);
    }

    long signed_int()
    {
        const bool neg = at(Tok::Minus);
        if (neg)
            ++pos_;
        const long v = expect(Tok::Int).value;
        return neg ? -v : v;
    }

    void declare()
    {
        VariableDecl d;
        const Token name = expect(Tok::Ident);
        d.name = name.text;
        d.loc = name.loc;
        for (const auto& v : *vars_)
            if (v.name == d.name)
                throw ParseError(name.loc, "variable '" + d.name + "' declared twice");
        expect(Tok::Colon);
        if (at_word("bool")) {
            ++pos_;
            d.boolean = true;
            d.lo = 0;
            d.hi = 1;
        } else {
            const SourceLoc at_range = peek().loc;
            d.lo = signed_int();
            expect(Tok::DotDot);
            d.hi = signed_int();
            if (d.lo > d.hi)
                throw ParseError(at_range, "empty range for '" + d.name + "'");
        }
        expect(Tok::Semi);
        vars_->push_back(d);
    }

    void relations(std::vector<ExprPtr>& out)
    {
        expect(Tok::LBrace);
        while (!at(Tok::RBrace)) {
            ExprPtr e = expr(true);
            require(*e, Type::Bool, "relation expression must be boolean");
            out.push_back(std::move(e));
            if (!at(Tok::RBrace))
                expect(Tok::Semi);
        }
        expect(Tok::RBrace);
        if (at(Tok::Semi))
            ++pos_;
    }

    ExprPtr predicate()
    {
        ExprPtr e = expr(false);
        require(*e, Type::Bool, "predicate must be boolean");
        return e;
    }

    static void require(const Expr& e, Type t, const char* what)
    {
        if (e.type != t)
            throw ParseError(e.loc, std::string("type error: ") + what);
    }

    ExprPtr expr(bool primes)
    {
        primes_ = primes;
        return implies();
    }

    ExprPtr implies()
    {
        ExprPtr lhs = disjunction();
        if (at(Tok::Arrow)) {
            const SourceLoc loc = peek().loc;
            ++pos_;
            ExprPtr rhs = implies();
            return logical(Op::Implies, loc, lhs, rhs);
        }
        return lhs;
    }

    ExprPtr disjunction()
    {
        ExprPtr lhs = exclusive();
        while (at(Tok::OrOr)) {
            const SourceLoc loc = peek().loc;
            ++pos_;
            lhs = logical(Op::Or, loc, lhs, exclusive());
        }
        return lhs;
    }

    ExprPtr exclusive()
    {
        ExprPtr lhs = conjunction();
        while (at_word("xor")) {
            const SourceLoc loc = peek().loc;
            ++pos_;
            lhs = logical(Op::Xor, loc, lhs, conjunction());
        }
        return lhs;
    }

    ExprPtr conjunction()
    {
        ExprPtr lhs = comparison();
        while (at(Tok::AndAnd)) {
            const SourceLoc loc = peek().loc;
            ++pos_;
            lhs = logical(Op::And, loc, lhs, comparison());
        }
        return lhs;
    }

    static ExprPtr logical(Op op, SourceLoc loc, ExprPtr a, ExprPtr b)
    {
        require(*a, Type::Bool, "boolean operand expected");
        require(*b, Type::Bool, "boolean operand expected");
        return make(op, Type::Bool, loc, std::move(a), std::move(b));
    }

    ExprPtr comparison()
    {
        ExprPtr lhs = sum();
        static const std::pair<Tok, Op> ops[] = {
            {Tok::EqEq, Op::Eq}, {Tok::NotEq, Op::Ne}, {Tok::Lt, Op::Lt},
            {Tok::Le, Op::Le}, {Tok::Gt, Op::Gt}, {Tok::Ge, Op::Ge},
        };
        for (const auto& [tok, op] : ops) {
            if (!at(tok))
                continue;
            const SourceLoc loc = peek().loc;
            ++pos_;
            ExprPtr rhs = sum();
            if (op == Op::Eq || op == Op::Ne) {
                if (lhs->type != rhs->type)
                    throw ParseError(loc, "type error: comparing integer with boolean");
            } else {
                require(*lhs, Type::Int, "ordering needs integers");
                require(*rhs, Type::Int, "ordering needs integers");
            }
            return make(op, Type::Bool, loc, std::move(lhs), std::move(rhs));
        }
        return lhs;
    }

    ExprPtr sum()
    {
        ExprPtr lhs = unary();
        while (at(Tok::Plus) || at(Tok::Minus)) {
            const Op op = at(Tok::Plus) ? Op::Add : Op::Sub;
            const SourceLoc loc = peek().loc;
            ++pos_;
            ExprPtr rhs = unary();
            require(*lhs, Type::Int, "arithmetic needs integers");
            require(*rhs, Type::Int, "arithmetic needs integers");
            lhs = make(op, Type::Int, loc, std::move(lhs), std::move(rhs));
        }
        return lhs;
    }

    ExprPtr unary()
    {
        const SourceLoc loc = peek().loc;
        if (at(Tok::Bang)) {
            ++pos_;
            ExprPtr e = unary();
            require(*e, Type::Bool, "'!' needs a boolean");
            return make(Op::Not, Type::Bool, loc, std::move(e));
        }
        if (at(Tok::Minus)) {
            ++pos_;
            ExprPtr e = unary();
            require(*e, Type::Int, "unary '-' needs an integer");
            return make(Op::Neg, Type::Int, loc, std::move(e));
        }
        return primary();
    }

    ExprPtr primary()
    {
        const Token t = peek();
        if (t.kind == Tok::Int) {
            ++pos_;
            auto e = make(Op::IntLit, Type::Int, t.loc);
            std::const_pointer_cast<Expr>(e)->value = t.value;
            return e;
        }
        if (t.kind == Tok::LParen) {
            ++pos_;
            ExprPtr e = implies();
            expect(Tok::RParen);
            return e;
        }
        if (t.kind == Tok::Ident) {
            ++pos_;
            if (t.text == "true" || t.text == "false") {
                auto e = make(Op::BoolLit, Type::Bool, t.loc);
                std::const_pointer_cast<Expr>(e)->value = t.text == "true";
                return e;
            }
            int index = -1;
            for (std::size_t i = 0; i < vars_->size(); ++i)
                if ((*vars_)[i].name == t.text)
                    index = static_cast<int>(i);
            if (index < 0)
                throw ParseError(t.loc, "unknown variable '" + t.text + "'");
            Op op = Op::Var;
            if (at(Tok::Prime)) {
                if (!primes_)
                    throw ParseError(peek().loc, "primed read in predicate");
                ++pos_;
                op = Op::Primed;
            }
            const Type type = (*vars_)[index].boolean ? Type::Bool : Type::Int;
            auto e = make(op, type, t.loc);
            std::const_pointer_cast<Expr>(e)->var = index;
            return e;
        }
        throw ParseError(t.loc, "expected an expression, found " + found());
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::vector<VariableDecl>* vars_;
    bool primes_ = false;
};

long eval(const Expr& e, const long* cur, const long* next)
{
    switch (e.op) {
    case Op::IntLit:
    case Op::BoolLit: return e.value;
    case Op::Var: return cur[e.var];
    case Op::Primed: return next[e.var];
    case Op::Neg: return -eval(*e.lhs, cur, next);
    case Op::Not: return !eval(*e.lhs, cur, next);
    case Op::Add: return eval(*e.lhs, cur, next) + eval(*e.rhs, cur, next);
    case Op::Sub: return eval(*e.lhs, cur, next) - eval(*e.rhs, cur, next);
    case Op::Eq: return eval(*e.lhs, cur, next) == eval(*e.rhs, cur, next);
    case Op::Ne: return eval(*e.lhs, cur, next) != eval(*e.rhs, cur, next);
    case Op::Lt: return eval(*e.lhs, cur, next) < eval(*e.rhs, cur, next);
    case Op::Le: return eval(*e.lhs, cur, next) <= eval(*e.rhs, cur, next);
    case Op::Gt: return eval(*e.lhs, cur, next) > eval(*e.rhs, cur, next);
    case Op::Ge: return eval(*e.lhs, cur, next) >= eval(*e.rhs, cur, next);
    case Op::And: return eval(*e.lhs, cur, next) && eval(*e.rhs, cur, next);
    case Op::Or: return eval(*e.lhs, cur, next) || eval(*e.rhs, cur, next);
    case Op::Xor: return (eval(*e.lhs, cur, next) != 0) != (eval(*e.rhs, cur, next) != 0);
    case Op::Implies: return !eval(*e.lhs, cur, next) || eval(*e.rhs, cur, next);
    }
    return 0;
}

const char* symbol(Op op)
{
    switch (op) {
    case Op::Neg: return "-";
    case Op::Not: return "!";
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Eq: return "==";
    case Op::Ne: return "!=";
    case Op::Lt: return "<";
    case Op::Le: return "<=";
    case Op::Gt: return ">";
    case Op::Ge: return ">=";
    case Op::And: return "&&";
    case Op::Or: return "||";
    case Op::Xor: return "xor";
    case Op::Implies: return "=>";
    default: return "?";
    }
}

// Table of all state valuations, row-major.
std::vector<long> valuation_table(const ModelSpec& spec, std::size_t n)
{
    const std::size_t m = spec.variables.size();
    std::vector<long> table(n * m);
    for (std::size_t s = 0; s < n; ++s) {
        std::size_t rest = s;
        for (std::size_t i = m; i-- > 0;) {
            const auto& v = spec.variables[i];
            table[s * m + i] = v.lo + static_cast<long>(rest % v.domain_size());
            rest /= v.domain_size();
        }
    }
    return table;
}

std::size_t state_count(const ModelSpec& spec, std::size_t cap)
{
    std::size_t n = 1;
    for (const auto& v : spec.variables) {
        const std::size_t d = v.domain_size();
        if (n > cap / d)
            throw CapExceeded("model has more than " + std::to_string(cap) + " states");
        n *= d;
    }
    return n;
}

}  // namespace

bool same_expr(const Expr& a, const Expr& b)
{
    if (a.op != b.op || a.value != b.value || a.var != b.var || a.type != b.type)
        return false;
    if (static_cast<bool>(a.lhs) != static_cast<bool>(b.lhs) || static_cast<bool>(a.rhs) != static_cast<bool>(b.rhs))
        return false;
    if (a.lhs && !same_expr(*a.lhs, *b.lhs))
        return false;
    return !a.rhs || same_expr(*a.rhs, *b.rhs);
}

bool ModelSpec::operator==(const ModelSpec& o) const
{
    auto same_list = [](const std::vector<ExprPtr>& x, const std::vector<ExprPtr>& y) {
        if (x.size() != y.size())
            return false;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (!same_expr(*x[i], *y[i]))
                return false;
        return true;
    };
    if (name != o.name || k != o.k || variables.size() != o.variables.size())
        return false;
    for (std::size_t i = 0; i < variables.size(); ++i) {
        const auto& a = variables[i];
        const auto& b = o.variables[i];
        if (a.name != b.name || a.boolean != b.boolean || a.lo != b.lo || a.hi != b.hi)
            return false;
    }
    return same_expr(*invariant, *o.invariant) && same_list(program, o.program) &&
           same_list(environment, o.environment) && same_list(bad, o.bad) && same_list(restricted, o.restricted) &&
           same_list(faults, o.faults);
}

ModelSpec parse_model(const std::string& text)
{
    std::vector<VariableDecl> vars;
    Parser p(Lexer(text).run(), &vars);
    return p.model();
}

ExprPtr parse_predicate(const ModelSpec& spec, const std::string& text)
{
    std::vector<VariableDecl> vars = spec.variables;
    Parser p(Lexer(text).run(), &vars);
    return p.standalone_predicate();
}

std::string to_string(const ModelSpec& spec, const Expr& e)
{
    switch (e.op) {
    case Op::IntLit: return std::to_string(e.value);
    case Op::BoolLit: return e.value ? "true" : "false";
    case Op::Var: return spec.variables[e.var].name;
    case Op::Primed: return spec.variables[e.var].name + "'";
    case Op::Neg:
    case Op::Not: return std::string(symbol(e.op)) + "(" + to_string(spec, *e.lhs) + ")";
    default:
        return "(" + to_string(spec, *e.lhs) + " " + symbol(e.op) + " " + to_string(spec, *e.rhs) + ")";
    }
}

std::string pretty_print(const ModelSpec& spec)
{
    std::ostringstream out;
    out << "model " << spec.name << " {\n";
    for (const auto& v : spec.variables) {
        out << "  var " << v.name << ": ";
        if (v.boolean)
            out << "bool";
        else
            out << v.lo << ".." << v.hi;
        out << ";\n";
    }
    out << "  invariant: " << to_string(spec, *spec.invariant) << ";\n";
    auto block = [&](const char* name, const std::vector<ExprPtr>& es) {
        out << "  " << name << " {";
        for (const auto& e : es)
            out << "\n    " << to_string(spec, *e) << ";";
        out << (es.empty() ? "}\n" : "\n  }\n");
    };
    block("program", spec.program);
    block("environment", spec.environment);
    block("bad", spec.bad);
    block("restricted", spec.restricted);
    block("faults", spec.faults);
    out << "  k: " << spec.k << ";\n}\n";
    return out.str();
}

std::size_t state_cap_from_env()
{
    if (const char* v = std::getenv("FTREPAIR_STATE_CAP")) {
        char* end = nullptr;
        const unsigned long long cap = std::strtoull(v, &end, 10);
        if (end != v && *end == '\0' && cap > 0)
            return static_cast<std::size_t>(cap);
    }
    return kDefaultStateCap;
}

std::vector<long> decode_state(const ModelSpec& spec, StateId s)
{
    std::vector<long> vals(spec.variables.size());
    std::size_t rest = s;
    for (std::size_t i = vals.size(); i-- > 0;) {
        const auto& v = spec.variables[i];
        vals[i] = v.lo + static_cast<long>(rest % v.domain_size());
        rest /= v.domain_size();
    }
    return vals;
}

Predicate evaluate_predicate(const ModelSpec& spec, const Expr& expr)
{
    const std::size_t n = state_count(spec, std::numeric_limits<std::size_t>::max());
    const std::size_t m = spec.variables.size();
    const auto table = valuation_table(spec, n);
    Predicate out(n);
    for (std::size_t s = 0; s < n; ++s)
        if (eval(expr, &table[s * m], &table[s * m]))
            out.insert(static_cast<StateId>(s));
    return out;
}

Model elaborate(const ModelSpec& spec, std::optional<std::size_t> cap)
{
    const std::size_t n = state_count(spec, cap.value_or(state_cap_from_env()));
    const std::size_t m = spec.variables.size();
    const auto table = valuation_table(spec, n);

    Model model = Model::empty(n, spec.k);
    model.name = spec.name;
    model.space.labels.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
        std::string label;
        for (std::size_t i = 0; i < m; ++i) {
            if (i)
                label += ',';
            label += spec.variables[i].name + "=" + std::to_string(table[s * m + i]);
        }
        model.space.labels.push_back(std::move(label));
    }

    model.invariant = evaluate_predicate(spec, *spec.invariant);
    auto fill = [&](const std::vector<ExprPtr>& block, Relation& rel) {
        if (block.empty())
            return;
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b)
                for (const auto& e : block)
                    if (eval(*e, &table[a * m], &table[b * m])) {
                        rel.insert(static_cast<StateId>(a), static_cast<StateId>(b));
                        break;
                    }
    };
    fill(spec.program, model.delta_p);
    fill(spec.environment, model.delta_e);
    fill(spec.bad, model.delta_b);
    fill(spec.restricted, model.delta_r);
    fill(spec.faults, model.faults);
    return model;
}

}  // namespace ftrepair::dsl
