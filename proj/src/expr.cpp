#include "gorlicz/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <vector>

namespace gorlicz {

struct Expression::Node {
    enum class Kind { Number, Variable, Negate, Binary, Call };
    Kind kind = Kind::Number;
    double value = 0.0;
    int variable = 0;  // 0 = x, 1 = y, 2 = t
    char op = 0;
    std::string function;
    std::vector<std::shared_ptr<const Node>> args;

    double eval(const double vars[3]) const {
        switch (kind) {
            case Kind::Number: return value;
            case Kind::Variable: return vars[variable];
            case Kind::Negate: return -args[0]->eval(vars);
            case Kind::Binary: {
                const double a = args[0]->eval(vars);
                const double b = args[1]->eval(vars);
                switch (op) {
                    case '+': return a + b;
                    case '-': return a - b;
                    case '*': return a * b;
                    case '/': return a / b;
                    case '^': return std::pow(a, b);
                }
                return 0.0;
            }
            case Kind::Call: {
                const double a = args[0]->eval(vars);
                if (function == "min") return std::min(a, args[1]->eval(vars));
                if (function == "max") return std::max(a, args[1]->eval(vars));
                if (function == "atan2") return std::atan2(a, args[1]->eval(vars));
                if (function == "abs") return std::abs(a);
                if (function == "sqrt") return std::sqrt(a);
                if (function == "exp") return std::exp(a);
                if (function == "log") return std::log(a);
                if (function == "sin") return std::sin(a);
                return std::cos(a);
            }
        }
        return 0.0;
    }

    bool uses(int var) const {
        if (kind == Kind::Variable) return variable == var;
        for (const auto& a : args) {
            if (a->uses(var)) return true;
        }
        return false;
    }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Node = Expression::Node;

int arity(const std::string& name) {
    if (name == "min" || name == "max" || name == "atan2") return 2;
    if (name == "abs" || name == "sqrt" || name == "exp" || name == "log" || name == "sin" || name == "cos") return 1;
    return -1;
}

class Parser {
public:
    Parser(std::string_view text, int line, int column) : text_(text), line_(line), column_(column) {}

    NodePtr parse() {
        NodePtr root = expression();
        skip_space();
        if (pos_ < text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
        return root;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(msg, line_, column_ + static_cast<int>(pos_));
    }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    static NodePtr binary(char op, NodePtr a, NodePtr b) {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Binary;
        n->op = op;
        n->args = {std::move(a), std::move(b)};
        return n;
    }

    NodePtr expression() {
        NodePtr lhs = term();
        for (;;) {
            if (accept('+')) {
                lhs = binary('+', lhs, term());
            } else if (accept('-')) {
                lhs = binary('-', lhs, term());
            } else {
                return lhs;
            }
        }
    }

    NodePtr term() {
        NodePtr lhs = unary();
        for (;;) {
            if (accept('*')) {
                lhs = binary('*', lhs, unary());
            } else if (accept('/')) {
                lhs = binary('/', lhs, unary());
            } else {
                return lhs;
            }
        }
    }

    NodePtr unary() {
        if (accept('-')) {
            auto n = std::make_shared<Node>();
            n->kind = Node::Kind::Negate;
            n->args = {unary()};
            return n;
        }
        if (accept('+')) return unary();
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (accept('^')) return binary('^', base, unary());
        return base;
    }

    NodePtr primary() {
        skip_space();
        if (pos_ >= text_.size()) fail("unexpected end of expression");
        const char c = text_[pos_];
        if (accept('(')) {
            NodePtr inner = expression();
            expect(')');
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
        fail("unexpected '" + std::string(1, c) + "'");
    }

    NodePtr number() {
        const std::size_t start = pos_;
        double value = 0.0;
        const auto [end, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value);
        if (ec != std::errc()) fail("malformed number");
        pos_ = static_cast<std::size_t>(end - text_.data());
        if (pos_ == start) fail("malformed number");
        auto n = std::make_shared<Node>();
        n->value = value;
        return n;
    }

    NodePtr identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
        const std::string name(text_.substr(start, pos_ - start));
        auto n = std::make_shared<Node>();
        if (name == "x" || name == "y" || name == "t") {
            n->kind = Node::Kind::Variable;
            n->variable = name == "x" ? 0 : (name == "y" ? 1 : 2);
            return n;
        }
        if (name == "pi") {
            n->value = std::numbers::pi;
            return n;
        }
        const int args = arity(name);
        if (args < 0) {
            pos_ = start;
            fail("unknown identifier '" + name + "'");
        }
        n->kind = Node::Kind::Call;
        n->function = name;
        expect('(');
        n->args.push_back(expression());
        for (int k = 1; k < args; ++k) {
            expect(',');
            n->args.push_back(expression());
        }
        expect(')');
        return n;
    }

    std::string_view text_;
    int line_;
    int column_;
    std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression() : root_(std::make_shared<Node>()), text_("0") {}

Expression Expression::parse(std::string_view text, int line, int column) {
    Expression e;
    e.root_ = Parser(text, line, column).parse();
    e.text_ = std::string(text);
    return e;
}

Expression Expression::constant(double value) {
    auto n = std::make_shared<Node>();
    n->value = value;
    Expression e;
    e.root_ = n;
    e.text_ = std::to_string(value);
    return e;
}

double Expression::operator()(double x, double y, double t) const {
    const double vars[3] = {x, y, t};
    return root_->eval(vars);
}

bool Expression::uses_variable(char name) const {
    return root_->uses(name == 'x' ? 0 : (name == 'y' ? 1 : 2));
}

}  // namespace gorlicz
