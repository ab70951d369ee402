#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "gorlicz/common.hpp"

namespace gorlicz {

/// Small arithmetic expression over the variables x, y and t.
///
/// Grammar: numbers, + - * / ^ (right associative, binds tighter than unary
/// minus), parentheses, the constant pi, and the functions min, max, atan2 (two
/// arguments) and abs, sqrt, exp, log, sin, cos (one argument).
class Expression {
public:
    Expression();

    /// `line` and `column` locate the first character of `text` for error messages.
    static Expression parse(std::string_view text, int line = 1, int column = 1);
    static Expression constant(double value);

    double operator()(double x, double y = 0.0, double t = 0.0) const;
    double operator()(const Point& p, double t = 0.0) const { return (*this)(p[0], p[1], t); }

    bool uses_variable(char name) const;
    const std::string& text() const { return text_; }

    struct Node;

private:
    std::shared_ptr<const Node> root_;
    std::string text_;
};

}  // namespace gorlicz
