#pragma once

// Bounded force fields on the half line, weak-* convergent families of them,
// and CSV ingestion of sampled forcing data.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "wie/errors.hpp"
#include "wie/quadrature.hpp"
#include "wie/vector.hpp"

namespace wie {

enum class ForceKind { zero, constant, polynomial, sinusoid, piecewise_constant, sampled, composite };

enum class Interpolation { hold, linear };

inline const char* to_string(ForceKind kind) {
    switch (kind) {
        case ForceKind::zero: return "zero";
        case ForceKind::constant: return "constant";
        case ForceKind::polynomial: return "polynomial";
        case ForceKind::sinusoid: return "sinusoid";
        case ForceKind::piecewise_constant: return "piecewise_constant";
        case ForceKind::sampled: return "sampled";
        case ForceKind::composite: return "composite";
    }
    return "unknown";
}

struct ConstantTerm {
    Vector value;
};

/// sum_k c_k * min(t, hold_after)^k. Held constant past hold_after so the
/// force stays bounded on the half line.
struct PolynomialTerm {
    std::vector<Vector> coefficients;
    double hold_after;
};

/// amplitude * sin(omega * t + phase)
struct SinusoidTerm {
    Vector amplitude;
    double omega;
    double phase;
};

/// values[k] on [breaks[k], breaks[k+1]). With period > 0 the pattern repeats
/// with that period, otherwise the last value is held.
struct PiecewiseConstantTerm {
    std::vector<double> breaks;
    std::vector<Vector> values;
    double period;
};

/// Samples at strictly increasing times starting at 0; last value held beyond.
struct SampledTerm {
    std::vector<double> times;
    std::vector<Vector> values;
    Interpolation interpolation;
};

using ForceTerm = std::variant<ConstantTerm, PolynomialTerm, SinusoidTerm, PiecewiseConstantTerm, SampledTerm>;

namespace detail {

inline Vector eval_term(const ConstantTerm& c, double) { return c.value; }

inline Vector eval_term(const PolynomialTerm& p, double t) {
    const double x = std::min(t, p.hold_after);
    Vector out = Vector::Zero(p.coefficients.front().size());
    for (auto it = p.coefficients.rbegin(); it != p.coefficients.rend(); ++it) out = out * x + *it;
    return out;
}

inline Vector eval_term(const SinusoidTerm& s, double t) { return s.amplitude * std::sin(s.omega * t + s.phase); }

inline Vector eval_term(const PiecewiseConstantTerm& p, double t) {
    double x = t;
    if (p.period > 0.0) x = t - p.period * std::floor(t / p.period);
    auto it = std::upper_bound(p.breaks.begin(), p.breaks.end(), x);
    const auto k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - p.breaks.begin() - 1));
    return p.values[std::min(k, p.values.size() - 1)];
}

inline Vector eval_term(const SampledTerm& s, double t) {
    if (t >= s.times.back()) return s.values.back();
    auto it = std::upper_bound(s.times.begin(), s.times.end(), t);
    const auto k = static_cast<std::size_t>(it - s.times.begin() - 1);
    if (s.interpolation == Interpolation::hold) return s.values[k];
    const double w = (t - s.times[k]) / (s.times[k + 1] - s.times[k]);
    return (1.0 - w) * s.values[k] + w * s.values[k + 1];
}

inline double term_bound(const ConstantTerm& c) { return c.value.norm(); }

inline double term_bound(const PolynomialTerm& p) {
    double bound = 0.0;
    double power = 1.0;
    for (const auto& c : p.coefficients) {
        bound += c.norm() * power;
        power *= p.hold_after;
    }
    return bound;
}

inline double term_bound(const SinusoidTerm& s) { return s.amplitude.norm(); }

inline double term_bound(const PiecewiseConstantTerm& p) {
    double bound = 0.0;
    for (const auto& v : p.values) bound = std::max(bound, v.norm());
    return bound;
}

inline double term_bound(const SampledTerm& s) {
    double bound = 0.0;
    for (const auto& v : s.values) bound = std::max(bound, v.norm());
    return bound;
}

inline Eigen::Index term_dim(const ConstantTerm& c) { return c.value.size(); }
inline Eigen::Index term_dim(const PolynomialTerm& p) { return p.coefficients.front().size(); }
inline Eigen::Index term_dim(const SinusoidTerm& s) { return s.amplitude.size(); }
inline Eigen::Index term_dim(const PiecewiseConstantTerm& p) { return p.values.front().size(); }
inline Eigen::Index term_dim(const SampledTerm& s) { return s.values.front().size(); }

}  // namespace detail

/// A bounded force field f : [0, inf) -> R^N, stored as a sum of terms.
///
/// sup_bound() is a valid essential supremum of |f| (triangle inequality over
/// the terms); it is what the equiboundedness estimates are checked against.
class Force {
public:
    Force() = default;

    static Force zero(Eigen::Index dim) {
        if (dim < 1) throw InvalidArgument("force dimension must be at least 1");
        Force f;
        f.dim_ = dim;
        return f;
    }

    static Force constant(Vector value) {
        check_dim(value.size());
        return from_term(ConstantTerm{std::move(value)});
    }

    static Force polynomial(std::vector<Vector> coefficients, double hold_after) {
        if (coefficients.empty()) throw InvalidArgument("polynomial force needs at least one coefficient");
        if (!(hold_after > 0.0) || !std::isfinite(hold_after))
            throw InvalidArgument("polynomial force needs a positive finite hold time");
        check_same_dims(coefficients);
        return from_term(PolynomialTerm{std::move(coefficients), hold_after});
    }

    static Force sinusoid(Vector amplitude, double omega, double phase = 0.0) {
        check_dim(amplitude.size());
        if (!std::isfinite(omega) || omega < 0.0) throw InvalidArgument("sinusoid frequency must be finite and >= 0");
        return from_term(SinusoidTerm{std::move(amplitude), omega, phase});
    }

    static Force piecewise_constant(std::vector<double> breaks, std::vector<Vector> values, double period = 0.0) {
        if (breaks.empty() || breaks.size() != values.size())
            throw InvalidArgument("piecewise constant force needs one value per break");
        if (breaks.front() != 0.0) throw InvalidArgument("piecewise constant breaks must start at 0");
        if (!std::is_sorted(breaks.begin(), breaks.end(), std::less_equal<>{}) ||
            std::adjacent_find(breaks.begin(), breaks.end()) != breaks.end())
            throw InvalidArgument("piecewise constant breaks must be strictly increasing");
        if (period < 0.0 || (period > 0.0 && breaks.back() >= period))
            throw InvalidArgument("piecewise constant period must exceed the last break");
        check_same_dims(values);
        return from_term(PiecewiseConstantTerm{std::move(breaks), std::move(values), period});
    }

    static Force sampled(std::vector<double> times, std::vector<Vector> values, Interpolation interpolation) {
        if (times.empty() || times.size() != values.size())
            throw InvalidArgument("sampled force needs one value per sample time");
        if (times.front() != 0.0) throw InvalidArgument("sampled force must start at t = 0");
        for (std::size_t i = 1; i < times.size(); ++i)
            if (!(times[i] > times[i - 1])) throw InvalidArgument("sample times must be strictly increasing");
        check_same_dims(values);
        return from_term(SampledTerm{std::move(times), std::move(values), interpolation});
    }

    Force operator+(const Force& other) const {
        if (dim_ != other.dim_) throw InvalidArgument("cannot add forces of different dimension");
        Force out = *this;
        out.terms_.insert(out.terms_.end(), other.terms_.begin(), other.terms_.end());
        out.sup_bound_ += other.sup_bound_;
        return out;
    }

    Vector operator()(double t) const {
        if (!(t >= 0.0)) throw OutOfDomain("force evaluated at negative time " + std::to_string(t));
        Vector out = Vector::Zero(dim_);
        for (const auto& term : terms_) out += std::visit([t](const auto& x) { return detail::eval_term(x, t); }, term);
        return out;
    }

    Eigen::Index dim() const noexcept { return dim_; }
    double sup_bound() const noexcept { return sup_bound_; }
    const std::vector<ForceTerm>& terms() const noexcept { return terms_; }

    ForceKind kind() const noexcept {
        if (terms_.empty()) return ForceKind::zero;
        if (terms_.size() > 1) return ForceKind::composite;
        switch (terms_.front().index()) {
            case 0: return ForceKind::constant;
            case 1: return ForceKind::polynomial;
            case 2: return ForceKind::sinusoid;
            case 3: return ForceKind::piecewise_constant;
            default: return ForceKind::sampled;
        }
    }

    /// Points in (a, b) where f or one of its derivatives may jump. Integrators
    /// split there so each piece is smooth.
    std::vector<double> breakpoints(double a, double b) const {
        std::vector<double> out;
        auto push = [&](double x) {
            if (x > a && x < b) out.push_back(x);
        };
        for (const auto& term : terms_) {
            if (const auto* p = std::get_if<PolynomialTerm>(&term)) {
                push(p->hold_after);
            } else if (const auto* s = std::get_if<SampledTerm>(&term)) {
                for (double x : s->times) push(x);
            } else if (const auto* pc = std::get_if<PiecewiseConstantTerm>(&term)) {
                if (pc->period > 0.0) {
                    const double first = std::floor(a / pc->period) * pc->period;
                    for (double base = first; base < b; base += pc->period)
                        for (double x : pc->breaks) push(base + x);
                } else {
                    for (double x : pc->breaks) push(x);
                }
            }
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    /// Fastest angular frequency present (0 for non-oscillating forces).
    double max_frequency() const {
        double w = 0.0;
        for (const auto& term : terms_) {
            if (const auto* s = std::get_if<SinusoidTerm>(&term)) w = std::max(w, s->omega);
            if (const auto* p = std::get_if<PiecewiseConstantTerm>(&term); p && p->period > 0.0)
                w = std::max(w, 2.0 * std::numbers::pi / p->period);
        }
        return w;
    }

    static Force from_term(ForceTerm term) {
        Force f;
        f.dim_ = std::visit([](const auto& x) { return detail::term_dim(x); }, term);
        f.sup_bound_ = std::visit([](const auto& x) { return detail::term_bound(x); }, term);
        f.terms_.push_back(std::move(term));
        return f;
    }

private:
    static void check_dim(Eigen::Index n) {
        if (n < 1) throw InvalidArgument("force dimension must be at least 1");
    }

    static void check_same_dims(const std::vector<Vector>& vs) {
        check_dim(vs.front().size());
        for (const auto& v : vs)
            if (v.size() != vs.front().size()) throw InvalidArgument("force components have inconsistent dimension");
    }

    std::vector<ForceTerm> terms_;
    Eigen::Index dim_ = 1;
    double sup_bound_ = 0.0;
};

inline Vector eval_force(const Force& f, double t) { return f(t); }

/// An h-indexed family f_h with a declared weak-* limit and a uniform bound
/// sup_h ||f_h||_inf.
struct ForceSequence {
    std::function<Force(int)> generator;
    Force weak_star_limit;
    double uniform_bound = 0.0;

    Force at(int h) const { return generator(h); }

    /// The constant family f_h = f for every h.
    static ForceSequence fixed(const Force& f) {
        return ForceSequence{[f](int) { return f; }, f, f.sup_bound()};
    }
};

/// f_h(t) = base(t) + amplitude * sin(h t), converging weak-* to base.
inline ForceSequence oscillatory_family(const Force& base, const Vector& amplitude) {
    if (amplitude.size() != base.dim()) throw InvalidArgument("amplitude dimension does not match the base force");
    return ForceSequence{[base, amplitude](int h) { return base + Force::sinusoid(amplitude, static_cast<double>(h)); },
                         base, base.sup_bound() + amplitude.norm()};
}

/// f_h(t) = base(t) + amplitude * sign(sin(h t)), converging weak-* to base.
inline ForceSequence square_wave_family(const Force& base, const Vector& amplitude) {
    if (amplitude.size() != base.dim()) throw InvalidArgument("amplitude dimension does not match the base force");
    return ForceSequence{[base, amplitude](int h) {
                             const double period = 2.0 * std::numbers::pi / h;
                             return base + Force::piecewise_constant({0.0, 0.5 * period},
                                                                     {Vector(amplitude), Vector(-amplitude)}, period);
                         },
                         base, base.sup_bound() + amplitude.norm()};
}

/// A bounded scalar test function used on [0, horizon].
struct TestFunction {
    std::function<double(double)> fn;
    double horizon;
};

/// max over the test functions xi of |int_0^T (f_h - limit) xi dt|.
///
/// Composite Gauss-Legendre with `order` points per panel. panel_width <= 0
/// picks a width giving at least 16 points per period of the fastest
/// oscillation; an explicit width giving fewer than 10 is rejected.
inline double weakstar_gap(const Force& f_h, const Force& limit, const std::vector<TestFunction>& tests,
                           double panel_width = 0.0, int order = 8) {
    if (f_h.dim() != limit.dim()) throw InvalidArgument("weakstar_gap: dimension mismatch");
    const double w = std::max(f_h.max_frequency(), limit.max_frequency());
    const double period = w > 0.0 ? 2.0 * std::numbers::pi / w : 0.0;
    if (panel_width <= 0.0) {
        panel_width = 0.25;
        if (period > 0.0) panel_width = std::min(panel_width, period * order / 16.0);
    } else if (period > 0.0 && period / panel_width * order < 10.0) {
        throw ResolutionError("weakstar_gap: panel width " + std::to_string(panel_width) +
                              " resolves fewer than 10 points per period " + std::to_string(period));
    }
    const auto rule = gauss_legendre(order);
    double gap = 0.0;
    for (const auto& test : tests) {
        if (!(test.horizon > 0.0)) throw InvalidArgument("weakstar_gap: test horizon must be positive");
        std::vector<double> cuts{0.0};
        const auto panels = static_cast<std::size_t>(std::ceil(test.horizon / panel_width));
        for (std::size_t k = 1; k < panels; ++k) cuts.push_back(test.horizon * static_cast<double>(k) / panels);
        for (double x : f_h.breakpoints(0.0, test.horizon)) cuts.push_back(x);
        for (double x : limit.breakpoints(0.0, test.horizon)) cuts.push_back(x);
        cuts.push_back(test.horizon);
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

        Vector acc = Vector::Zero(f_h.dim());
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            const double a = cuts[k];
            const double b = cuts[k + 1];
            for (std::size_t q = 0; q < rule.points.size(); ++q) {
                const double t = a + (b - a) * rule.points[q];
                acc += (b - a) * rule.weights[q] * test.fn(t) * (f_h(t) - limit(t));
            }
        }
        gap = std::max(gap, acc.norm());
    }
    return gap;
}

namespace detail {

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline bool parse_real(std::string_view s, double& out) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace detail

/// Reads a sampled force from CSV: header "t,f_1,...,f_N", then rows of reals
/// with strictly increasing t starting at 0. Lines starting with '#' and blank
/// lines are skipped.
inline Force load_samples(std::istream& in, Interpolation interpolation) {
    std::vector<double> times;
    std::vector<Vector> values;
    Eigen::Index dim = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto view = detail::trim(line);
        if (view.empty() || view.front() == '#') continue;
        const auto fields = detail::split_csv(view);
        if (dim == 0) {
            if (fields.size() < 2 || detail::trim(fields[0]) != "t")
                throw ParseError("expected header \"t,f_1,...,f_N\"", lineno);
            for (std::size_t k = 1; k < fields.size(); ++k)
                if (detail::trim(fields[k]) != "f_" + std::to_string(k))
                    throw ParseError("header column " + std::to_string(k + 1) + " must be f_" + std::to_string(k),
                                     lineno);
            dim = static_cast<Eigen::Index>(fields.size() - 1);
            continue;
        }
        if (static_cast<Eigen::Index>(fields.size()) != dim + 1)
            throw ParseError("expected " + std::to_string(dim + 1) + " fields, got " + std::to_string(fields.size()),
                             lineno);
        double t = 0.0;
        if (!detail::parse_real(fields[0], t)) throw ParseError("malformed time value", lineno);
        Vector v(dim);
        for (Eigen::Index k = 0; k < dim; ++k)
            if (!detail::parse_real(fields[static_cast<std::size_t>(k + 1)], v[k]))
                throw ParseError("malformed force value in column " + std::to_string(k + 2), lineno);
        if (times.empty() && t != 0.0) throw ParseError("first sample must be at t = 0", lineno);
        if (!times.empty() && !(t > times.back())) throw ParseError("sample times must be strictly increasing", lineno);
        times.push_back(t);
        values.push_back(std::move(v));
    }
    if (dim == 0) throw ParseError("missing header", lineno);
    if (times.empty()) throw ParseError("no samples", lineno);
    return Force::sampled(std::move(times), std::move(values), interpolation);
}

inline Force load_samples(const std::string& path, Interpolation interpolation) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open force file " + path, 0);
    return load_samples(in, interpolation);
}

}  // namespace wie
