#pragma once

#include <cctype>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hilfer/errors.hpp"

namespace hilfer::expr {

/// Expression tree over the grammar
///   expr   := term (('+'|'-') term)*
///   term   := factor (('*'|'/') factor)*
///   factor := base ('^' factor)?
///   base   := number | ident | ident '@' ident | func '(' expr ')' | '(' expr ')' | '-' base
/// with functions sin, cos, exp, abs, tanh.
struct Node {
    enum class Kind { Number, Var, PointRef, Neg, Add, Sub, Mul, Div, Pow, Call };

    Kind kind = Kind::Number;
    double number = 0.0;
    std::string name;  // variable, function, or point-ref base name
    std::string point; // point identifier for Kind::PointRef
    std::vector<Node> kids;

    bool operator==(const Node& o) const {
        return kind == o.kind && number == o.number && name == o.name && point == o.point && kids == o.kids;
    }
};

struct Expression {
    std::string source;
    Node root;
};

inline const std::vector<std::string>& known_functions() {
    static const std::vector<std::string> fns = {"sin", "cos", "exp", "abs", "tanh"};
    return fns;
}

namespace detail {

struct Token {
    enum class Type { Number, Ident, Plus, Minus, Star, Slash, Caret, At, LParen, RParen, End };
    Type type = Type::End;
    std::size_t offset = 0;
    double number = 0.0;
    std::string text;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) { advance(); }

    const Token& peek() const { return tok_; }

    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        tok_.offset = pos_;
        tok_.text.clear();
        tok_.number = 0.0;
        if (pos_ >= src_.size()) {
            tok_.type = Token::Type::End;
            return;
        }
        const char c = src_[pos_];
        auto punct = [&](Token::Type t) {
            tok_.type = t;
            tok_.offset = pos_++;
        };
        switch (c) {
            case '+': punct(Token::Type::Plus); return;
            case '-': punct(Token::Type::Minus); return;
            case '*': punct(Token::Type::Star); return;
            case '/': punct(Token::Type::Slash); return;
            case '^': punct(Token::Type::Caret); return;
            case '@': punct(Token::Type::At); return;
            case '(': punct(Token::Type::LParen); return;
            case ')': punct(Token::Type::RParen); return;
            default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && pos_ + 1 < src_.size() &&
                                                            std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
            const std::size_t start = pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            if (pos_ < src_.size() && src_[pos_] == '.') {
                ++pos_;
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            }
            if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
                std::size_t mark = pos_ + 1;
                if (mark < src_.size() && (src_[mark] == '+' || src_[mark] == '-')) ++mark;
                if (mark < src_.size() && std::isdigit(static_cast<unsigned char>(src_[mark]))) {
                    pos_ = mark;
                    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
                }
            }
            tok_.type = Token::Type::Number;
            tok_.offset = start;
            tok_.text = src_.substr(start, pos_ - start);
            tok_.number = std::stod(tok_.text);
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            tok_.type = Token::Type::Ident;
            tok_.offset = start;
            tok_.text = src_.substr(start, pos_ - start);
            return;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", pos_,
                         {"number", "identifier", "operator", "'('"});
    }

    const std::string& src_;
    std::size_t pos_ = 0;
    Token tok_;
};

class Parser {
public:
    explicit Parser(const std::string& src) : lex_(src) {}

    Node parse() {
        Node e = expr();
        if (lex_.peek().type != Token::Type::End)
            throw ParseError("trailing input after expression", lex_.peek().offset, {"end of input", "operator"});
        return e;
    }

private:
    Node expr() {
        Node left = term();
        while (true) {
            const auto t = lex_.peek().type;
            if (t != Token::Type::Plus && t != Token::Type::Minus) return left;
            lex_.take();
            Node right = term();
            Node parent;
            parent.kind = (t == Token::Type::Plus) ? Node::Kind::Add : Node::Kind::Sub;
            parent.kids = {std::move(left), std::move(right)};
            left = std::move(parent);
        }
    }

    Node term() {
        Node left = factor();
        while (true) {
            const auto t = lex_.peek().type;
            if (t != Token::Type::Star && t != Token::Type::Slash) return left;
            lex_.take();
            Node right = factor();
            Node parent;
            parent.kind = (t == Token::Type::Star) ? Node::Kind::Mul : Node::Kind::Div;
            parent.kids = {std::move(left), std::move(right)};
            left = std::move(parent);
        }
    }

    Node factor() {
        Node b = base();
        if (lex_.peek().type == Token::Type::Caret) {
            lex_.take();
            Node e = factor(); // right associative
            Node parent;
            parent.kind = Node::Kind::Pow;
            parent.kids = {std::move(b), std::move(e)};
            return parent;
        }
        return b;
    }

    Node base() {
        const Token t = lex_.take();
        switch (t.type) {
            case Token::Type::Number: {
                Node n;
                n.kind = Node::Kind::Number;
                n.number = t.number;
                return n;
            }
            case Token::Type::Minus: {
                Node inner = base();
                Node n;
                n.kind = Node::Kind::Neg;
                n.kids = {std::move(inner)};
                return n;
            }
            case Token::Type::LParen: {
                Node inner = expr();
                expect_rparen();
                return inner;
            }
            case Token::Type::Ident: {
                if (lex_.peek().type == Token::Type::At) {
                    lex_.take();
                    const Token pt = lex_.take();
                    if (pt.type != Token::Type::Ident)
                        throw ParseError("expected point identifier after '@'", pt.offset, {"identifier"});
                    Node n;
                    n.kind = Node::Kind::PointRef;
                    n.name = t.text;
                    n.point = pt.text;
                    return n;
                }
                if (lex_.peek().type == Token::Type::LParen) {
                    bool known = false;
                    for (const auto& f : known_functions()) known = known || f == t.text;
                    if (!known)
                        throw ParseError("unknown function '" + t.text + "'", t.offset,
                                         {"sin", "cos", "exp", "abs", "tanh"});
                    lex_.take();
                    Node arg = expr();
                    expect_rparen();
                    Node n;
                    n.kind = Node::Kind::Call;
                    n.name = t.text;
                    n.kids = {std::move(arg)};
                    return n;
                }
                Node n;
                n.kind = Node::Kind::Var;
                n.name = t.text;
                return n;
            }
            default:
                throw ParseError("expected an operand", t.offset, {"number", "identifier", "'('", "'-'"});
        }
    }

    void expect_rparen() {
        const Token t = lex_.take();
        if (t.type != Token::Type::RParen) throw ParseError("expected ')'", t.offset, {"')'"});
    }

    Lexer lex_;
};

inline int precedence(const Node& n) {
    switch (n.kind) {
        case Node::Kind::Add:
        case Node::Kind::Sub: return 1;
        case Node::Kind::Mul:
        case Node::Kind::Div: return 2;
        case Node::Kind::Pow: return 3;
        case Node::Kind::Neg: return 4; // grammatical base
        default: return 5;
    }
}

inline void unparse_rec(const Node& n, std::string& out) {
    auto wrapped = [&out](const Node& child, bool parens) {
        if (parens) out += '(';
        unparse_rec(child, out);
        if (parens) out += ')';
    };
    switch (n.kind) {
        case Node::Kind::Number: {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.17g", n.number);
            out += buf;
            return;
        }
        case Node::Kind::Var: out += n.name; return;
        case Node::Kind::PointRef:
            out += n.name;
            out += '@';
            out += n.point;
            return;
        case Node::Kind::Call:
            out += n.name;
            out += '(';
            unparse_rec(n.kids[0], out);
            out += ')';
            return;
        case Node::Kind::Neg:
            out += '-';
            wrapped(n.kids[0], precedence(n.kids[0]) < 4); // operand must be a base
            return;
        case Node::Kind::Pow:
            wrapped(n.kids[0], precedence(n.kids[0]) <= 3 && n.kids[0].kind != Node::Kind::Neg);
            out += '^';
            wrapped(n.kids[1], precedence(n.kids[1]) < 3);
            return;
        default: break;
    }
    const int p = precedence(n);
    const char op = n.kind == Node::Kind::Add ? '+' : n.kind == Node::Kind::Sub ? '-' : n.kind == Node::Kind::Mul ? '*' : '/';
    wrapped(n.kids[0], precedence(n.kids[0]) < p);
    out += op;
    wrapped(n.kids[1], precedence(n.kids[1]) <= p);
}

} // namespace detail

/// Parse per the grammar; throws ParseError carrying the byte offset and the
/// expected-token set.
inline Expression parse_expression(const std::string& source) {
    detail::Parser p(source);
    return Expression{source, p.parse()};
}

/// Minimal-parenthesis rendering; unparse(parse(s)) reparses to the same tree.
inline std::string unparse(const Node& n) {
    std::string out;
    detail::unparse_rec(n, out);
    return out;
}

inline std::string unparse(const Expression& e) { return unparse(e.root); }

/// Variable bindings for evaluation. Component syntax: u aliases u1;
/// u1..u9 select components; u@t1 (or u2@t1) reads the stored point values.
struct EvalContext {
    bool has_t = false;
    double t = 0.0;
    bool has_s = false;
    double s = 0.0;
    std::span<const double> u;
    bool has_u = false;
    const std::map<std::string, std::vector<double>>* points = nullptr;
};

namespace detail {

inline int component_index(const std::string& name) {
    // "u" -> 0, "u1".."u99" -> k-1, anything else -> -1
    if (name.empty() || name[0] != 'u') return -1;
    if (name.size() == 1) return 0;
    int idx = 0;
    for (std::size_t i = 1; i < name.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(name[i]))) return -1;
        idx = idx * 10 + (name[i] - '0');
    }
    return idx >= 1 ? idx - 1 : -1;
}

} // namespace detail

inline double evaluate(const Node& n, const EvalContext& ctx) {
    switch (n.kind) {
        case Node::Kind::Number: return n.number;
        case Node::Kind::Var: {
            if (n.name == "t" && ctx.has_t) return ctx.t;
            if (n.name == "s" && ctx.has_s) return ctx.s;
            const int idx = detail::component_index(n.name);
            if (idx >= 0 && ctx.has_u) {
                if (idx >= static_cast<int>(ctx.u.size()))
                    throw EvalError("component " + n.name + " beyond state dimension");
                return ctx.u[idx];
            }
            throw EvalError("unbound variable '" + n.name + "'");
        }
        case Node::Kind::PointRef: {
            if (ctx.points == nullptr) throw EvalError("point references not available here");
            const auto it = ctx.points->find(n.point);
            if (it == ctx.points->end()) throw EvalError("unknown nonlocal point '" + n.point + "'");
            const int idx = detail::component_index(n.name);
            if (idx < 0) throw EvalError("point reference must use u or u<k>, got '" + n.name + "'");
            if (idx >= static_cast<int>(it->second.size()))
                throw EvalError("component " + n.name + " beyond state dimension");
            return it->second[idx];
        }
        case Node::Kind::Neg: return -evaluate(n.kids[0], ctx);
        case Node::Kind::Add: return evaluate(n.kids[0], ctx) + evaluate(n.kids[1], ctx);
        case Node::Kind::Sub: return evaluate(n.kids[0], ctx) - evaluate(n.kids[1], ctx);
        case Node::Kind::Mul: return evaluate(n.kids[0], ctx) * evaluate(n.kids[1], ctx);
        case Node::Kind::Div: {
            const double num = evaluate(n.kids[0], ctx);
            const double den = evaluate(n.kids[1], ctx);
            if (den == 0.0) throw EvalError("division by zero");
            return num / den;
        }
        case Node::Kind::Pow: {
            const double r = std::pow(evaluate(n.kids[0], ctx), evaluate(n.kids[1], ctx));
            if (!std::isfinite(r)) throw EvalError("non-finite power result");
            return r;
        }
        case Node::Kind::Call: {
            const double x = evaluate(n.kids[0], ctx);
            if (n.name == "sin") return std::sin(x);
            if (n.name == "cos") return std::cos(x);
            if (n.name == "exp") {
                const double r = std::exp(x);
                if (!std::isfinite(r)) throw EvalError("non-finite exp result");
                return r;
            }
            if (n.name == "abs") return std::fabs(x);
            if (n.name == "tanh") return std::tanh(x);
            throw EvalError("unknown function '" + n.name + "'");
        }
    }
    throw EvalError("malformed expression node");
}

inline double evaluate(const Expression& e, const EvalContext& ctx) { return evaluate(e.root, ctx); }

} // namespace hilfer::expr
