#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <variant>
#include <vector>

#include "gasnet/error.hpp"

namespace gasnet {

struct Harmonic {
    double amplitude = 0.0;
    int harmonic = 1;
    double phase = 0.0; // rad
};

/// mean + sum_i amplitude_i * sin(2 pi harmonic_i t / period + phase_i)
struct SinusoidSum {
    double period = 1.0;
    double mean = 0.0;
    std::vector<Harmonic> terms;
};

/// C2 periodic cubic spline through (knots[i], values[i]); knots lie in [0, period).
struct PeriodicSpline {
    double period = 1.0;
    std::vector<double> knots;
    std::vector<double> values;
    std::vector<double> second; // second derivatives at the knots
};

namespace detail {

// Solves the cyclic tridiagonal system sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i]
// (indices mod n) by Sherman-Morrison on top of the Thomas algorithm.
inline std::vector<double> solve_cyclic_tridiagonal(std::vector<double> sub, std::vector<double> diag,
                                                    std::vector<double> sup, std::vector<double> rhs) {
    const std::size_t n = diag.size();
    auto thomas = [n](const std::vector<double>& a, std::vector<double> b, const std::vector<double>& c,
                      std::vector<double> d) {
        for (std::size_t i = 1; i < n; ++i) {
            const double w = a[i] / b[i - 1];
            b[i] -= w * c[i - 1];
            d[i] -= w * d[i - 1];
        }
        std::vector<double> x(n);
        x[n - 1] = d[n - 1] / b[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) x[i] = (d[i] - c[i] * x[i + 1]) / b[i];
        return x;
    };
    const double alpha = sup[n - 1]; // couples row n-1 to column 0
    const double beta = sub[0];      // couples row 0 to column n-1
    const double gamma = -diag[0];
    diag[0] -= gamma;
    diag[n - 1] -= alpha * beta / gamma;
    std::vector<double> x = thomas(sub, diag, sup, rhs);
    std::vector<double> u(n, 0.0);
    u[0] = gamma;
    u[n - 1] = alpha;
    std::vector<double> z = thomas(sub, diag, sup, u);
    const double fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    for (std::size_t i = 0; i < n; ++i) x[i] -= fact * z[i];
    return x;
}

} // namespace detail

/// A time-periodic, twice continuously differentiable scalar input.
class Profile {
public:
    Profile() : rep_(SinusoidSum{}) {}
    explicit Profile(SinusoidSum s) : rep_(std::move(s)) { check_period(std::get<SinusoidSum>(rep_).period); }
    explicit Profile(PeriodicSpline s) : rep_(std::move(s)) { init_spline(); }

    static Profile constant(double value, double period) { return Profile(SinusoidSum{period, value, {}}); }

    /// mean * (1 + rel_amplitude * sin(2 pi harmonic t / period + phase))
    static Profile relative_sinusoid(double mean, double rel_amplitude, int harmonic, double period,
                                     double phase = 0.0) {
        return Profile(SinusoidSum{period, mean, {{mean * rel_amplitude, harmonic, phase}}});
    }

    static Profile spline(double period, std::vector<double> knots, std::vector<double> values) {
        return Profile(PeriodicSpline{period, std::move(knots), std::move(values), {}});
    }

    double period() const {
        return std::visit([](const auto& r) { return r.period; }, rep_);
    }

    bool is_sinusoid() const { return std::holds_alternative<SinusoidSum>(rep_); }
    const SinusoidSum& sinusoid() const { return std::get<SinusoidSum>(rep_); }
    const PeriodicSpline& spline_data() const { return std::get<PeriodicSpline>(rep_); }

    double eval(double t) const {
        if (const auto* s = std::get_if<SinusoidSum>(&rep_)) {
            double v = s->mean;
            for (const auto& h : s->terms) v += h.amplitude * std::sin(angular(*s, h) * t + h.phase);
            return v;
        }
        return eval_spline(std::get<PeriodicSpline>(rep_), t, false);
    }

    double eval_deriv(double t) const {
        if (const auto* s = std::get_if<SinusoidSum>(&rep_)) {
            double v = 0.0;
            for (const auto& h : s->terms) {
                const double w = angular(*s, h);
                v += h.amplitude * w * std::cos(w * t + h.phase);
            }
            return v;
        }
        return eval_spline(std::get<PeriodicSpline>(rep_), t, true);
    }

    /// Period average.
    double mean() const {
        if (const auto* s = std::get_if<SinusoidSum>(&rep_)) {
            double m = s->mean;
            for (const auto& h : s->terms)
                if (h.harmonic == 0) m += h.amplitude * std::sin(h.phase);
            return m;
        }
        // exact integral of the cubic pieces
        const auto& sp = std::get<PeriodicSpline>(rep_);
        const std::size_t n = sp.knots.size();
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = (i + 1) % n;
            const double h = (j == 0 ? sp.knots[0] + sp.period : sp.knots[j]) - sp.knots[i];
            acc += 0.5 * h * (sp.values[i] + sp.values[j]) - h * h * h / 24.0 * (sp.second[i] + sp.second[j]);
        }
        return acc / sp.period;
    }

    /// p'(t') = value_factor * p(t' * time_factor). Converts between time/value units.
    Profile rescaled(double time_factor, double value_factor) const {
        detail::require(time_factor > 0.0, "time factor must be positive");
        if (const auto* s = std::get_if<SinusoidSum>(&rep_)) {
            SinusoidSum out = *s;
            out.period = s->period / time_factor;
            out.mean *= value_factor;
            for (auto& h : out.terms) h.amplitude *= value_factor;
            return Profile(std::move(out));
        }
        const auto& sp = std::get<PeriodicSpline>(rep_);
        std::vector<double> knots(sp.knots), values(sp.values);
        for (auto& k : knots) k /= time_factor;
        for (auto& v : values) v *= value_factor;
        return spline(sp.period / time_factor, std::move(knots), std::move(values));
    }

    Profile scaled(double value_factor) const { return rescaled(1.0, value_factor); }

private:
    static double angular(const SinusoidSum& s, const Harmonic& h) {
        return 2.0 * std::numbers::pi * h.harmonic / s.period;
    }

    static void check_period(double period) {
        detail::require(std::isfinite(period) && period > 0.0, "profile period must be positive");
    }

    void init_spline() {
        auto& sp = std::get<PeriodicSpline>(rep_);
        check_period(sp.period);
        const std::size_t n = sp.knots.size();
        detail::require(n >= 3, "periodic spline needs at least 3 samples");
        detail::require(sp.values.size() == n, "spline knots/values size mismatch");
        detail::require(sp.knots.front() >= 0.0 && sp.knots.back() < sp.period,
                        "spline knots must lie in [0, period)");
        for (std::size_t i = 1; i < n; ++i)
            detail::require(sp.knots[i] > sp.knots[i - 1], "spline knots must be strictly increasing");
        std::vector<double> h(n);
        for (std::size_t i = 0; i < n; ++i)
            h[i] = (i + 1 < n ? sp.knots[i + 1] : sp.knots[0] + sp.period) - sp.knots[i];
        std::vector<double> sub(n), diag(n), sup(n), rhs(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t ip = (i + 1) % n;
            const std::size_t im = (i + n - 1) % n;
            sub[i] = h[im];
            diag[i] = 2.0 * (h[im] + h[i]);
            sup[i] = h[i];
            rhs[i] = 6.0 * ((sp.values[ip] - sp.values[i]) / h[i] - (sp.values[i] - sp.values[im]) / h[im]);
        }
        sp.second = detail::solve_cyclic_tridiagonal(sub, diag, sup, rhs);
    }

    static double eval_spline(const PeriodicSpline& sp, double t, bool derivative) {
        double tau = std::fmod(t - sp.knots[0], sp.period);
        if (tau < 0.0) tau += sp.period;
        tau += sp.knots[0];
        const std::size_t n = sp.knots.size();
        // last knot with knots[i] <= tau
        auto it = std::upper_bound(sp.knots.begin(), sp.knots.end(), tau);
        std::size_t i = static_cast<std::size_t>(std::distance(sp.knots.begin(), it)) - 1;
        const std::size_t j = (i + 1) % n;
        const double t0 = sp.knots[i];
        const double t1 = (j == 0) ? sp.knots[0] + sp.period : sp.knots[j];
        const double h = t1 - t0;
        const double A = (t1 - tau) / h;
        const double B = (tau - t0) / h;
        const double Mi = sp.second[i], Mj = sp.second[j];
        if (!derivative)
            return A * sp.values[i] + B * sp.values[j] + ((A * A * A - A) * Mi + (B * B * B - B) * Mj) * h * h / 6.0;
        return (sp.values[j] - sp.values[i]) / h - (3.0 * A * A - 1.0) / 6.0 * h * Mi +
               (3.0 * B * B - 1.0) / 6.0 * h * Mj;
    }

    std::variant<SinusoidSum, PeriodicSpline> rep_;
};

} // namespace gasnet
