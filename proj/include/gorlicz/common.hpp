#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gorlicz {

/// A point in R^n, n <= 2. One-dimensional points keep the second slot at 0.
using Point = std::array<double, 2>;

inline double distance(const Point& a, const Point& b) {
    return std::hypot(a[0] - b[0], a[1] - b[1]);
}

/// Axis-aligned box; used as the support of coefficient fields.
struct Box {
    Point lo{0.0, 0.0};
    Point hi{0.0, 0.0};

    bool contains(const Point& x, double slack = 0.0) const {
        return x[0] >= lo[0] - slack && x[0] <= hi[0] + slack && x[1] >= lo[1] - slack &&
               x[1] <= hi[1] + slack;
    }
};

// Error taxonomy. Every failure mode named in the operation contracts maps to one
// of these so callers (and the CLI exit-code logic) can tell them apart.

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NotInvertibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InfeasibleError : public std::runtime_error {
public:
    InfeasibleError(const std::string& what, std::size_t cell) : std::runtime_error(what), cell_(cell) {}
    std::size_t cell() const { return cell_; }

private:
    std::size_t cell_;
};

class WrongVariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, int line, int column)
        : std::runtime_error(format(msg, line, column)), line_(line), column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    static std::string format(const std::string& msg, int line, int column) {
        return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg;
    }
    int line_;
    int column_;
};

}  // namespace gorlicz
