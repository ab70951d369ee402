#include "gorlicz/phi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gorlicz {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double power_second(double p, double t) {
    if (t > 0.0) return p * (p - 1.0) * std::pow(t, p - 2.0);
    if (p < 2.0) return kInf;
    return p == 2.0 ? 2.0 : 0.0;
}

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

double CoefficientField::operator()(const Point& x) const {
    if (!support.contains(x, 1e-12 * (1.0 + std::abs(support.hi[0] - support.lo[0])))) {
        throw DomainError("point (" + fmt(x[0]) + ", " + fmt(x[1]) + ") outside the support of field '" +
                          label + "'");
    }
    return eval(x);
}

std::string to_string(PhiFamily family) {
    switch (family) {
        case PhiFamily::Power: return "power";
        case PhiFamily::Orlicz: return "orlicz";
        case PhiFamily::VariableExponent: return "variable_exponent";
        case PhiFamily::DoublePhase: return "double_phase";
        case PhiFamily::Custom: return "custom";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// LocalPhi

namespace {

// Index of the interpolation segment that holds log t (clamped to the end segments).
std::size_t orlicz_segment(const detail::OrliczData& d, double log_t) {
    auto it = std::upper_bound(d.log_t.begin(), d.log_t.end(), log_t);
    std::size_t i = it == d.log_t.begin() ? 0 : static_cast<std::size_t>(it - d.log_t.begin()) - 1;
    return std::min(i, d.slope.size() - 1);
}

}  // namespace

double LocalPhi::value(double t) const {
    switch (kind_) {
        case Kind::Square: return t * t;
        case Kind::Power: return t > 0.0 ? std::pow(t, p_) : 0.0;
        case Kind::TwoPower:
            return t > 0.0 ? std::pow(t, p_) + (a_ != 0.0 ? a_ * std::pow(t, q_) : 0.0) : 0.0;
        case Kind::Orlicz: {
            if (t <= 0.0) return 0.0;
            const double lt = std::log(t);
            const std::size_t i = orlicz_segment(*orlicz_, lt);
            return std::exp(orlicz_->log_phi[i] + orlicz_->slope[i] * (lt - orlicz_->log_t[i]));
        }
        case Kind::Custom: return t > 0.0 ? custom_->eval(x_, t) : 0.0;
    }
    return 0.0;
}

double LocalPhi::derivative(double t) const {
    switch (kind_) {
        case Kind::Square: return 2.0 * t;
        case Kind::Power: return t > 0.0 ? p_ * std::pow(t, p_ - 1.0) : 0.0;
        case Kind::TwoPower:
            if (t <= 0.0) return 0.0;
            return p_ * std::pow(t, p_ - 1.0) + (a_ != 0.0 ? a_ * q_ * std::pow(t, q_ - 1.0) : 0.0);
        case Kind::Orlicz: {
            if (t <= 0.0) return 0.0;
            const std::size_t i = orlicz_segment(*orlicz_, std::log(t));
            return orlicz_->slope[i] * value(t) / t;
        }
        case Kind::Custom: {
            const double step = 1e-6 * std::max(t, 1e-6);
            if (t <= step) return (value(t + step) - value(t)) / step;
            return (value(t + step) - value(t - step)) / (2.0 * step);
        }
    }
    return 0.0;
}

double LocalPhi::second_derivative(double t) const {
    switch (kind_) {
        case Kind::Square: return 2.0;
        case Kind::Power: return power_second(p_, t);
        case Kind::TwoPower: return power_second(p_, t) + (a_ != 0.0 ? a_ * power_second(q_, t) : 0.0);
        case Kind::Orlicz: {
            if (t <= 0.0) return 0.0;
            const std::size_t i = orlicz_segment(*orlicz_, std::log(t));
            const double s = orlicz_->slope[i];
            return s * (s - 1.0) * value(t) / (t * t);
        }
        case Kind::Custom: {
            const double step = 1e-4 * std::max(t, 1e-4);
            const double lo = std::max(t - step, 0.0);
            const double hi = lo + 2.0 * step;
            return (value(hi) - 2.0 * value(lo + step) + value(lo)) / (step * step);
        }
    }
    return 0.0;
}

void LocalPhi::derivatives(double t, double& d1, double& d2) const {
    switch (kind_) {
        case Kind::Square:
            d1 = 2.0 * t;
            d2 = 2.0;
            return;
        case Kind::Power:
        case Kind::TwoPower: {
            if (!(t > 0.0)) break;
            const double tp = std::pow(t, p_ - 2.0);
            d1 = p_ * tp * t;
            d2 = p_ * (p_ - 1.0) * tp;
            if (kind_ == Kind::TwoPower && a_ != 0.0) {
                const double tq = std::pow(t, q_ - 2.0);
                d1 += a_ * q_ * tq * t;
                d2 += a_ * q_ * (q_ - 1.0) * tq;
            }
            return;
        }
        default: break;
    }
    d1 = derivative(t);
    d2 = second_derivative(t);
}

// ---------------------------------------------------------------------------
// PhiFunction

PhiFunction::PhiFunction(Data data, double p_lower, double q_upper, double L, bool strictly_convex)
    : data_(std::move(data)), p_lower_(p_lower), q_upper_(q_upper), L_(L), strictly_convex_(strictly_convex) {
    if (!(p_lower_ > 1.0)) throw ArgumentError("declared lower exponent must exceed 1");
    if (!(q_upper_ >= p_lower_)) throw ArgumentError("declared upper exponent must be >= lower exponent");
    if (!(L_ >= 1.0)) throw ArgumentError("almost-monotonicity constant L must be >= 1");
}

PhiFunction PhiFunction::power(double p) {
    return PhiFunction(detail::PowerData{p}, p, p, 1.0, p > 1.0);
}

PhiFunction PhiFunction::double_phase(double p, double q, CoefficientField weight) {
    if (!(q >= p)) throw ArgumentError("double phase requires q >= p");
    return PhiFunction(detail::DoublePhaseData{p, q, std::move(weight)}, p, q, 1.0, true);
}

PhiFunction PhiFunction::variable_exponent(CoefficientField exponent, double p_lower, double q_upper) {
    return PhiFunction(detail::VariableExponentData{std::move(exponent)}, p_lower, q_upper, 1.0, true);
}

PhiFunction PhiFunction::orlicz(std::vector<double> t, std::vector<double> values, double p_lower,
                                double q_upper, double L, bool strictly_convex) {
    if (t.size() != values.size() || t.size() < 2) {
        throw ArgumentError("Orlicz samples need at least two (t, phi) pairs of equal length");
    }
    auto data = std::make_shared<detail::OrliczData>();
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(t[i] > 0.0) || !(values[i] > 0.0)) {
            throw ArgumentError("Orlicz samples must have t > 0 and phi(t) > 0");
        }
        if (i > 0 && !(t[i] > t[i - 1])) throw ArgumentError("Orlicz sample abscissae must increase");
        if (i > 0 && values[i] < values[i - 1]) throw ArgumentError("Orlicz samples must be nondecreasing");
        data->log_t.push_back(std::log(t[i]));
        data->log_phi.push_back(std::log(values[i]));
    }
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        data->slope.push_back((data->log_phi[i + 1] - data->log_phi[i]) / (data->log_t[i + 1] - data->log_t[i]));
    }
    return PhiFunction(std::shared_ptr<const detail::OrliczData>(std::move(data)), p_lower, q_upper, L,
                       strictly_convex);
}

PhiFunction PhiFunction::orlicz_sampled(const std::function<double(double)>& fn, double t_min, double t_max,
                                        int count, double p_lower, double q_upper, double L,
                                        bool strictly_convex) {
    if (!(t_min > 0.0) || !(t_max > t_min) || count < 2) {
        throw ArgumentError("Orlicz sampling needs 0 < t_min < t_max and count >= 2");
    }
    std::vector<double> t(static_cast<std::size_t>(count));
    std::vector<double> v(t.size());
    const double ratio = std::log(t_max / t_min) / (count - 1);
    for (int i = 0; i < count; ++i) {
        t[static_cast<std::size_t>(i)] = t_min * std::exp(ratio * i);
        v[static_cast<std::size_t>(i)] = fn(t[static_cast<std::size_t>(i)]);
    }
    return orlicz(std::move(t), std::move(v), p_lower, q_upper, L, strictly_convex);
}

PhiFunction PhiFunction::custom(std::function<double(const Point&, double)> eval, double p_lower,
                                double q_upper, double L, bool strictly_convex) {
    auto data = std::make_shared<const detail::CustomData>(detail::CustomData{std::move(eval)});
    return PhiFunction(std::move(data), p_lower, q_upper, L, strictly_convex);
}

PhiFamily PhiFunction::family() const {
    return static_cast<PhiFamily>(data_.index());
}

bool PhiFunction::depends_on_x() const {
    const auto f = family();
    return f == PhiFamily::VariableExponent || f == PhiFamily::DoublePhase || f == PhiFamily::Custom;
}

LocalPhi PhiFunction::at(const Point& x) const {
    LocalPhi local;
    local.x_ = x;
    switch (family()) {
        case PhiFamily::Power: {
            const double p = std::get<detail::PowerData>(data_).p;
            local.kind_ = p == 2.0 ? LocalPhi::Kind::Square : LocalPhi::Kind::Power;
            local.p_ = p;
            break;
        }
        case PhiFamily::Orlicz:
            local.kind_ = LocalPhi::Kind::Orlicz;
            local.orlicz_ = std::get<std::shared_ptr<const detail::OrliczData>>(data_).get();
            break;
        case PhiFamily::VariableExponent: {
            const auto& d = std::get<detail::VariableExponentData>(data_);
            const double p = d.exponent(x);
            if (!(p >= p_lower_ - 1e-12 && p <= q_upper_ + 1e-12)) {
                throw DomainError("variable exponent p(x) = " + fmt(p) + " outside declared range [" +
                                  fmt(p_lower_) + ", " + fmt(q_upper_) + "]");
            }
            local.kind_ = LocalPhi::Kind::Power;
            local.p_ = p;
            break;
        }
        case PhiFamily::DoublePhase: {
            const auto& d = std::get<detail::DoublePhaseData>(data_);
            const double a = d.weight(x);
            if (!(a >= 0.0)) throw DomainError("double phase weight a(x) = " + fmt(a) + " is negative");
            local.kind_ = LocalPhi::Kind::TwoPower;
            local.p_ = d.p;
            local.q_ = d.q;
            local.a_ = a;
            break;
        }
        case PhiFamily::Custom:
            local.kind_ = LocalPhi::Kind::Custom;
            local.custom_ = std::get<std::shared_ptr<const detail::CustomData>>(data_).get();
            break;
    }
    return local;
}

double PhiFunction::evaluate(const Point& x, double t) const {
    if (!(t >= 0.0)) throw DomainError("phi evaluated at negative t = " + fmt(t));
    return at(x).value(t);
}

double PhiFunction::left_inverse(const Point& x, double tau) const {
    if (!(tau >= 0.0)) throw DomainError("left inverse requested for negative level " + fmt(tau));
    if (tau == 0.0) return 0.0;
    const LocalPhi phi = at(x);

    // Bracket from the declared (aInc)_p / (aDec)_q growth, then repair if the
    // declared constants turn out to be optimistic.
    const double v1 = phi.value(1.0);
    double lo = 0.0;
    double hi = 1.0;
    if (v1 > 0.0 && std::isfinite(v1)) {
        if (tau >= v1) {
            lo = std::pow(tau / (L_ * v1), 1.0 / q_upper_);
            hi = std::pow(L_ * tau / v1, 1.0 / p_lower_);
        } else {
            lo = std::pow(tau / (L_ * v1), 1.0 / p_lower_);
            hi = std::pow(L_ * tau / v1, 1.0 / q_upper_);
        }
        hi = std::max(hi, lo);
    }
    for (int i = 0; i < 2200 && lo > 0.0 && phi.value(lo) >= tau; ++i) lo = i < 2100 ? lo * 0.5 : 0.0;
    if (lo > 0.0 && phi.value(lo) >= tau) lo = 0.0;
    int expansions = 0;
    while (!(phi.value(hi) >= tau)) {
        if (++expansions > 400 || !std::isfinite(hi)) {
            throw NotInvertibleError("phi stays below " + fmt(tau) + " on the search bracket");
        }
        lo = hi;
        hi *= 2.0;
    }
    for (int i = 0; i < 400 && hi - lo > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (phi.value(mid) >= tau) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

std::string PhiFunction::describe() const {
    std::ostringstream os;
    os << to_string(family());
    switch (family()) {
        case PhiFamily::Power: os << "(p=" << std::get<detail::PowerData>(data_).p << ")"; break;
        case PhiFamily::DoublePhase: {
            const auto& d = std::get<detail::DoublePhaseData>(data_);
            os << "(p=" << d.p << ", q=" << d.q << ", a=" << d.weight.label << ")";
            break;
        }
        case PhiFamily::VariableExponent:
            os << "(p(x)=" << std::get<detail::VariableExponentData>(data_).exponent.label << ")";
            break;
        default: break;
    }
    os << " [p_lower=" << p_lower_ << ", q_upper=" << q_upper_ << ", L=" << L_ << "]";
    return os.str();
}

}  // namespace gorlicz
