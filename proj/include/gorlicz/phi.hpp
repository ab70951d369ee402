#pragma once

#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "gorlicz/common.hpp"

namespace gorlicz {

/// A scalar coefficient a(x) or p(x) together with the box on which it is defined.
struct CoefficientField {
    std::function<double(const Point&)> eval;
    Box support;
    std::string label;

    double operator()(const Point& x) const;
};

enum class PhiFamily { Power, Orlicz, VariableExponent, DoublePhase, Custom };

std::string to_string(PhiFamily family);

namespace detail {

struct PowerData {
    double p;
};

// Log-log piecewise linear interpolant of sampled (t, phi(t)) pairs.
struct OrliczData {
    std::vector<double> log_t;
    std::vector<double> log_phi;
    std::vector<double> slope;  // slope[i] on [log_t[i], log_t[i+1]]; extrapolated at both ends
};

struct VariableExponentData {
    CoefficientField exponent;
};

struct DoublePhaseData {
    double p;
    double q;
    CoefficientField weight;
};

struct CustomData {
    std::function<double(const Point&, double)> eval;
};

}  // namespace detail

/// phi(x, .) frozen at one point. Cheap to copy; used in inner solver loops.
///
/// A LocalPhi for the Orlicz and Custom families refers back into the
/// PhiFunction it came from, so it must not outlive that PhiFunction.
class LocalPhi {
public:
    double value(double t) const;
    double derivative(double t) const;
    double second_derivative(double t) const;
    /// First and second derivative together (one pow per power term).
    void derivatives(double t, double& d1, double& d2) const;

private:
    friend class PhiFunction;
    enum class Kind { Square, Power, TwoPower, Orlicz, Custom };

    Kind kind_ = Kind::Square;
    double p_ = 2.0;
    double q_ = 2.0;
    double a_ = 0.0;
    const detail::OrliczData* orlicz_ = nullptr;
    const detail::CustomData* custom_ = nullptr;
    Point x_{0.0, 0.0};
};

/// Generalized Phi-function phi(x, t) with declared structural constants.
///
/// The declared exponents and L are what the condition checkers verify; they are
/// never inferred from samples. Values are immutable once constructed.
class PhiFunction {
public:
    static PhiFunction power(double p);
    static PhiFunction double_phase(double p, double q, CoefficientField weight);
    static PhiFunction variable_exponent(CoefficientField exponent, double p_lower, double q_upper);
    static PhiFunction orlicz(std::vector<double> t, std::vector<double> values, double p_lower,
                              double q_upper, double L = 1.0, bool strictly_convex = true);
    /// Samples `fn` on a geometric grid of `count` points in [t_min, t_max].
    static PhiFunction orlicz_sampled(const std::function<double(double)>& fn, double t_min, double t_max,
                                      int count, double p_lower, double q_upper, double L = 1.0,
                                      bool strictly_convex = true);
    static PhiFunction custom(std::function<double(const Point&, double)> eval, double p_lower,
                              double q_upper, double L, bool strictly_convex);

    PhiFamily family() const;
    double p_lower() const { return p_lower_; }
    double q_upper() const { return q_upper_; }
    double L() const { return L_; }
    bool strictly_convex() const { return strictly_convex_; }
    bool depends_on_x() const;

    /// phi(x, t). Throws DomainError for t < 0 or x outside a coefficient's support.
    double evaluate(const Point& x, double t) const;

    /// phi(x, .) frozen at x, after the same support checks as evaluate().
    LocalPhi at(const Point& x) const;

    /// inf{t >= 0 : phi(x, t) >= tau} by bracketed bisection.
    double left_inverse(const Point& x, double tau) const;

    std::string describe() const;

private:
    using Data = std::variant<detail::PowerData, std::shared_ptr<const detail::OrliczData>,
                              detail::VariableExponentData, detail::DoublePhaseData,
                              std::shared_ptr<const detail::CustomData>>;

    PhiFunction(Data data, double p_lower, double q_upper, double L, bool strictly_convex);

    Data data_;
    double p_lower_;
    double q_upper_;
    double L_;
    bool strictly_convex_;
};

}  // namespace gorlicz
