#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "mgeo/errors.hpp"
#include "mgeo/jet.hpp"

namespace mgeo::expr {

using Bindings = std::map<std::string, double>;

enum class Kind { Num, Var, Const, Add, Sub, Mul, Div, Pow, Neg, Func };
enum class Func1 { Sin, Cos, Exp, Log, Sqrt };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    Kind kind;
    double num = 0.0;      // Num
    int var = -1;          // Var (0-based)
    std::string name;      // Const
    Func1 fn = Func1::Sin; // Func
    NodePtr a, b;
    size_t offset = 0;     // 1-based byte offset in the source, for located errors
};

/**
 * Immutable arithmetic expression over variables x1..xn, bound named
 * constants, and the functions sin/cos/exp/log/sqrt. Parsed with the usual
 * precedence (power > unary minus > mul/div > add/sub, power right
 * associative, no implicit multiplication) and evaluated over plain reals
 * or over jets.
 */
class Expr {
public:
    Expr() = default;

    static Expr parse(const std::string& src, int nvars,
                      const std::vector<std::string>& const_names = {},
                      const std::map<std::string, int>& var_aliases = {});

    bool valid() const { return root_ != nullptr; }
    int nvars() const { return nvars_; }

    double eval(const std::vector<double>& x, const Bindings& consts = {}) const {
        return eval_d(root_, x, consts);
    }

    Jet eval_jet(const std::vector<Jet>& x, const Bindings& consts = {}) const {
        return eval_j(root_, x, consts);
    }

    std::string to_string() const { return print(root_, 0); }

private:
    explicit Expr(NodePtr r, int nv) : root_(std::move(r)), nvars_(nv) {}

    static double eval_d(const NodePtr& n, const std::vector<double>& x, const Bindings& c);
    static Jet eval_j(const NodePtr& n, const std::vector<Jet>& x, const Bindings& c);
    static std::string print(const NodePtr& n, int parent_prec);

    NodePtr root_;
    int nvars_ = 0;

    friend class Parser;
};

namespace detail {

[[noreturn]] inline void fail_at(size_t offset_1based, const std::string& expected) {
    std::ostringstream os;
    os << "syntax error at offset " << offset_1based << ": expected " << expected;
    throw ParseError(os.str(), offset_1based);
}

[[noreturn]] inline void domain_fail(const Node& n, const std::string& what) {
    std::ostringstream os;
    os << what << " (at expression offset " << n.offset << ")";
    throw EvalDomainError(os.str());
}

// Returns the exact integer exponent when the evaluated exponent is a
// constant whole number; repeated multiplication then keeps jets exact.
inline bool as_exact_int(double v, long long& out) {
    if (!std::isfinite(v)) return false;
    double r = std::nearbyint(v);
    if (r != v || std::abs(r) > 1e15) return false;
    out = static_cast<long long>(r);
    return true;
}

inline bool jet_is_constant(const Jet& j) {
    const int cnt = j.space()->count(j.order());
    for (int pos = 1; pos < cnt; ++pos)
        if (j.coeff(pos) != 0.0) return false;
    return true;
}

}  // namespace detail

class Parser {
public:
    Parser(const std::string& src, int nvars, const std::vector<std::string>& consts,
           const std::map<std::string, int>& aliases)
        : s_(src), nvars_(nvars), aliases_(aliases) {
        for (const auto& c : consts) consts_.insert({c, 0});
    }

    Expr run() {
        NodePtr e = parse_expr();
        skip_ws();
        if (pos_ != s_.size()) detail::fail_at(pos_ + 1, "end of input");
        return Expr(e, nvars_);
    }

private:
    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }

    NodePtr parse_expr() {
        NodePtr lhs = parse_term();
        for (;;) {
            skip_ws();
            size_t at = pos_ + 1;
            if (eat('+')) {
                lhs = make(Kind::Add, at, lhs, parse_term());
            } else if (eat('-')) {
                lhs = make(Kind::Sub, at, lhs, parse_term());
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_unary();
        for (;;) {
            skip_ws();
            size_t at = pos_ + 1;
            if (eat('*')) {
                lhs = make(Kind::Mul, at, lhs, parse_unary());
            } else if (eat('/')) {
                lhs = make(Kind::Div, at, lhs, parse_unary());
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_unary() {
        skip_ws();
        size_t at = pos_ + 1;
        if (eat('-')) {
            auto n = std::make_shared<Node>();
            n->kind = Kind::Neg;
            n->offset = at;
            n->a = parse_unary();
            return n;
        }
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_atom();
        skip_ws();
        size_t at = pos_ + 1;
        if (eat('^')) {
            // right associative; exponent may carry its own unary minus
            return make(Kind::Pow, at, base, parse_unary());
        }
        return base;
    }

    NodePtr parse_atom() {
        skip_ws();
        if (pos_ >= s_.size()) detail::fail_at(pos_ + 1, "a value");
        char c = s_[pos_];
        size_t at = pos_ + 1;

        if (c == '(') {
            ++pos_;
            NodePtr e = parse_expr();
            if (!eat(')')) detail::fail_at(pos_ + 1, "')'");
            return e;
        }

        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();

        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string name;
            while (pos_ < s_.size() &&
                   (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
                name += s_[pos_++];

            static const std::map<std::string, Func1> kFns = {
                {"sin", Func1::Sin}, {"cos", Func1::Cos}, {"exp", Func1::Exp},
                {"log", Func1::Log}, {"sqrt", Func1::Sqrt}};
            auto fit = kFns.find(name);
            if (fit != kFns.end()) {
                if (!eat('(')) detail::fail_at(pos_ + 1, "'(' after function name");
                NodePtr arg = parse_expr();
                skip_ws();
                if (peek() == ',') {
                    std::ostringstream os;
                    os << "arity mismatch at offset " << pos_ + 1 << ": " << name
                       << " takes one argument";
                    throw ParseError(os.str(), pos_ + 1);
                }
                if (!eat(')')) detail::fail_at(pos_ + 1, "')'");
                auto n = std::make_shared<Node>();
                n->kind = Kind::Func;
                n->fn = fit->second;
                n->offset = at;
                n->a = arg;
                return n;
            }

            // x<k> variables
            if (name.size() >= 2 && name[0] == 'x' &&
                std::all_of(name.begin() + 1, name.end(),
                            [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
                int k = std::stoi(name.substr(1));
                if (k < 1 || k > nvars_) {
                    std::ostringstream os;
                    os << "unknown identifier '" << name << "' at offset " << at
                       << " (declared dimension is " << nvars_ << ")";
                    throw ParseError(os.str(), at);
                }
                auto n = std::make_shared<Node>();
                n->kind = Kind::Var;
                n->var = k - 1;
                n->offset = at;
                return n;
            }

            auto ait = aliases_.find(name);
            if (ait != aliases_.end()) {
                auto n = std::make_shared<Node>();
                n->kind = Kind::Var;
                n->var = ait->second;
                n->offset = at;
                return n;
            }

            if (consts_.count(name)) {
                auto n = std::make_shared<Node>();
                n->kind = Kind::Const;
                n->name = name;
                n->offset = at;
                return n;
            }

            std::ostringstream os;
            os << "unknown identifier '" << name << "' at offset " << at;
            throw ParseError(os.str(), at);
        }

        detail::fail_at(at, "a number, variable, function or '('");
    }

    NodePtr parse_number() {
        size_t at = pos_ + 1;
        size_t start = pos_;
        while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.'))
            ++pos_;
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            size_t save = pos_++;
            if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
            if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            } else {
                pos_ = save;  // trailing 'e' belongs to an identifier context, not this number
            }
        }
        std::string tok = s_.substr(start, pos_ - start);
        try {
            size_t used = 0;
            double v = std::stod(tok, &used);
            if (used != tok.size()) detail::fail_at(at, "a valid number");
            auto n = std::make_shared<Node>();
            n->kind = Kind::Num;
            n->num = v;
            n->offset = at;
            return n;
        } catch (const std::invalid_argument&) {
            detail::fail_at(at, "a valid number");
        } catch (const std::out_of_range&) {
            detail::fail_at(at, "a representable number");
        }
    }

    static NodePtr make(Kind k, size_t at, NodePtr a, NodePtr b) {
        auto n = std::make_shared<Node>();
        n->kind = k;
        n->offset = at;
        n->a = std::move(a);
        n->b = std::move(b);
        return n;
    }

    const std::string& s_;
    size_t pos_ = 0;
    int nvars_;
    std::map<std::string, int> consts_;
    std::map<std::string, int> aliases_;
};

inline Expr Expr::parse(const std::string& src, int nvars,
                        const std::vector<std::string>& const_names,
                        const std::map<std::string, int>& var_aliases) {
    Parser p(src, nvars, const_names, var_aliases);
    return p.run();
}

inline double Expr::eval_d(const NodePtr& n, const std::vector<double>& x, const Bindings& c) {
    switch (n->kind) {
        case Kind::Num: return n->num;
        case Kind::Var:
            if (n->var >= static_cast<int>(x.size()))
                detail::domain_fail(*n, "variable index beyond evaluation point");
            return x[static_cast<size_t>(n->var)];
        case Kind::Const: {
            auto it = c.find(n->name);
            if (it == c.end()) detail::domain_fail(*n, "unbound constant '" + n->name + "'");
            return it->second;
        }
        case Kind::Add: return eval_d(n->a, x, c) + eval_d(n->b, x, c);
        case Kind::Sub: return eval_d(n->a, x, c) - eval_d(n->b, x, c);
        case Kind::Mul: return eval_d(n->a, x, c) * eval_d(n->b, x, c);
        case Kind::Div: {
            double den = eval_d(n->b, x, c);
            if (den == 0.0) detail::domain_fail(*n, "division by zero");
            return eval_d(n->a, x, c) / den;
        }
        case Kind::Neg: return -eval_d(n->a, x, c);
        case Kind::Pow: {
            double base = eval_d(n->a, x, c);
            double e = eval_d(n->b, x, c);
            long long ei = 0;
            if (detail::as_exact_int(e, ei)) {
                double acc = 1.0, b2 = base;
                unsigned long long k = ei < 0 ? static_cast<unsigned long long>(-ei)
                                              : static_cast<unsigned long long>(ei);
                while (k) {
                    if (k & 1ULL) acc *= b2;
                    k >>= 1ULL;
                    if (k) b2 *= b2;
                }
                if (ei < 0) {
                    if (acc == 0.0) detail::domain_fail(*n, "zero base with negative exponent");
                    return 1.0 / acc;
                }
                return acc;
            }
            if (!(base > 0.0)) detail::domain_fail(*n, "real-exponent power needs positive base");
            return std::pow(base, e);
        }
        case Kind::Func: {
            double v = eval_d(n->a, x, c);
            switch (n->fn) {
                case Func1::Sin: return std::sin(v);
                case Func1::Cos: return std::cos(v);
                case Func1::Exp: return std::exp(v);
                case Func1::Log:
                    if (!(v > 0.0)) detail::domain_fail(*n, "log of nonpositive value");
                    return std::log(v);
                case Func1::Sqrt:
                    if (!(v >= 0.0)) detail::domain_fail(*n, "sqrt of negative value");
                    return std::sqrt(v);
            }
        }
    }
    detail::domain_fail(*n, "corrupt expression node");
}

inline Jet Expr::eval_j(const NodePtr& n, const std::vector<Jet>& x, const Bindings& c) {
    switch (n->kind) {
        case Kind::Num: return Jet::constant(x[0].space(), n->num, x[0].order());
        case Kind::Var:
            if (n->var >= static_cast<int>(x.size()))
                detail::domain_fail(*n, "variable index beyond evaluation point");
            return x[static_cast<size_t>(n->var)];
        case Kind::Const: {
            auto it = c.find(n->name);
            if (it == c.end()) detail::domain_fail(*n, "unbound constant '" + n->name + "'");
            return Jet::constant(x[0].space(), it->second, x[0].order());
        }
        case Kind::Add: return eval_j(n->a, x, c) + eval_j(n->b, x, c);
        case Kind::Sub: return eval_j(n->a, x, c) - eval_j(n->b, x, c);
        case Kind::Mul: return eval_j(n->a, x, c) * eval_j(n->b, x, c);
        case Kind::Div: {
            Jet den = eval_j(n->b, x, c);
            if (den.value() == 0.0) detail::domain_fail(*n, "division by zero");
            return eval_j(n->a, x, c) / den;
        }
        case Kind::Neg: return -eval_j(n->a, x, c);
        case Kind::Pow: {
            Jet base = eval_j(n->a, x, c);
            Jet e = eval_j(n->b, x, c);
            long long ei = 0;
            if (detail::jet_is_constant(e) && detail::as_exact_int(e.value(), ei))
                return pow_int(base, ei);
            if (!(base.value() > 0.0))
                detail::domain_fail(*n, "real-exponent power needs positive base");
            if (detail::jet_is_constant(e)) return pow_real(base, e.value());
            return exp(e * log(base));
        }
        case Kind::Func: {
            Jet v = eval_j(n->a, x, c);
            try {
                switch (n->fn) {
                    case Func1::Sin: return sin(v);
                    case Func1::Cos: return cos(v);
                    case Func1::Exp: return exp(v);
                    case Func1::Log: return log(v);
                    case Func1::Sqrt: return sqrt(v);
                }
            } catch (const EvalDomainError& e2) {
                detail::domain_fail(*n, e2.what());
            }
        }
    }
    detail::domain_fail(*n, "corrupt expression node");
}

inline std::string Expr::print(const NodePtr& n, int parent_prec) {
    // precedence: add/sub 1, mul/div 2, unary minus 3, pow 4, atom 5
    auto wrap = [&](int prec, const std::string& s) {
        return prec < parent_prec ? "(" + s + ")" : s;
    };
    std::ostringstream os;
    switch (n->kind) {
        case Kind::Num: {
            os.precision(17);
            os << n->num;
            std::string s = os.str();
            return n->num < 0 ? "(" + s + ")" : s;
        }
        case Kind::Var: os << "x" << (n->var + 1); return os.str();
        case Kind::Const: return n->name;
        case Kind::Add: return wrap(1, print(n->a, 1) + " + " + print(n->b, 2));
        case Kind::Sub: return wrap(1, print(n->a, 1) + " - " + print(n->b, 2));
        case Kind::Mul: return wrap(2, print(n->a, 2) + "*" + print(n->b, 3));
        case Kind::Div: return wrap(2, print(n->a, 2) + "/" + print(n->b, 3));
        case Kind::Neg: return wrap(3, "-" + print(n->a, 3));
        case Kind::Pow: return wrap(4, print(n->a, 5) + "^" + print(n->b, 4));
        case Kind::Func: {
            static const char* names[] = {"sin", "cos", "exp", "log", "sqrt"};
            return std::string(names[static_cast<int>(n->fn)]) + "(" + print(n->a, 0) + ")";
        }
    }
    return {};
}

}  // namespace mgeo::expr
