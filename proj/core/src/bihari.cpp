#include "gelfand/bihari.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/numeric/odeint.hpp>

#include "gelfand/errors.hpp"

namespace gelfand {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kQuadTol = 1e-13;

}  // namespace

GrowthFunction GrowthFunction::linear(double c) {
    if (!(c > 0.0) || !std::isfinite(c)) throw ContractViolation("Linear growth requires c > 0");
    return GrowthFunction(Linear{c});
}

GrowthFunction GrowthFunction::power(double c0, double gamma) {
    if (!(c0 > 0.0) || !std::isfinite(c0)) throw ContractViolation("Power growth requires c0 > 0");
    if (!(gamma >= 1.0) || !std::isfinite(gamma)) throw ContractViolation("Power growth requires gamma >= 1");
    return GrowthFunction(Power{c0, gamma});
}

GrowthFunction GrowthFunction::tabulated(std::vector<double> x, std::vector<double> y) {
    if (x.size() != y.size() || x.size() < 2) throw ContractViolation("Tabulated growth needs >= 2 samples");
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i]) || x[i] < 0.0 || y[i] < 0.0)
            throw ContractViolation("Tabulated growth samples must be finite and non-negative");
        if (i > 0 && !(x[i] > x[i - 1])) throw ContractViolation("Tabulated abscissae must increase");
        if (i > 0 && y[i] < y[i - 1]) throw ContractViolation("Tabulated growth must be non-decreasing");
        if (x[i] > 0.0 && !(y[i] > 0.0)) throw ContractViolation("Tabulated growth must be positive for x > 0");
    }
    return GrowthFunction(Tabulated{std::move(x), std::move(y)});
}

GrowthFunction GrowthFunction::tabulate(const std::function<double(double)>& fn, double x_lo, double x_hi, int n) {
    if (!(x_lo > 0.0) || !(x_hi > x_lo) || n < 2) throw ContractViolation("tabulate: bad range");
    std::vector<double> xs(static_cast<std::size_t>(n));
    std::vector<double> ys(static_cast<std::size_t>(n));
    const double r = std::log(x_hi / x_lo) / (n - 1);
    for (int i = 0; i < n; ++i) {
        xs[static_cast<std::size_t>(i)] = x_lo * std::exp(r * i);
        ys[static_cast<std::size_t>(i)] = fn(xs[static_cast<std::size_t>(i)]);
    }
    xs.back() = x_hi;
    ys.back() = fn(x_hi);
    return tabulated(std::move(xs), std::move(ys));
}

double GrowthFunction::head_exponent() const {
    const auto& t = std::get<Tabulated>(v_);
    if (t.x[0] == 0.0) return t.y[0] > 0.0 ? 0.0 : 1.0;
    return std::max(0.0, std::log(t.y[1] / t.y[0]) / std::log(t.x[1] / t.x[0]));
}

double GrowthFunction::tail_exponent_table() const {
    const auto& t = std::get<Tabulated>(v_);
    const std::size_t n = t.x.size();
    if (t.x[n - 2] == 0.0 || t.y[n - 2] == 0.0) return 1.0;
    return std::max(0.0, std::log(t.y[n - 1] / t.y[n - 2]) / std::log(t.x[n - 1] / t.x[n - 2]));
}

double GrowthFunction::operator()(double x) const {
    return std::visit(overloaded{
                          [&](const Linear& l) { return l.c * std::max(x, 0.0); },
                          [&](const Power& p) { return p.c0 * std::pow(std::max(x, 0.0), p.gamma); },
                          [&](const Tabulated& t) {
                              const std::size_t n = t.x.size();
                              if (x <= 0.0) return t.x[0] == 0.0 ? t.y[0] : 0.0;
                              if (x < t.x[0]) return t.y[0] * std::pow(x / t.x[0], head_exponent());
                              if (x >= t.x[n - 1]) return t.y[n - 1] * std::pow(x / t.x[n - 1], tail_exponent_table());
                              const auto it = std::upper_bound(t.x.begin(), t.x.end(), x);
                              const std::size_t i = static_cast<std::size_t>(it - t.x.begin());
                              const double w = (x - t.x[i - 1]) / (t.x[i] - t.x[i - 1]);
                              return t.y[i - 1] + w * (t.y[i] - t.y[i - 1]);
                          },
                      },
                      v_);
}

double GrowthFunction::tail_exponent() const {
    return std::visit(overloaded{
                          [](const Linear&) { return 1.0; },
                          [](const Power& p) { return p.gamma; },
                          [this](const Tabulated&) { return tail_exponent_table(); },
                      },
                      v_);
}

bool GrowthFunction::integrable_at_zero() const {
    return std::visit(overloaded{
                          [](const Linear&) { return false; },
                          [](const Power&) { return false; },
                          [this](const Tabulated&) { return head_exponent() < 1.0; },
                      },
                      v_);
}

GrowthFunction GrowthFunction::scaled(double s) const {
    return std::visit(overloaded{
                          [&](const Linear& l) { return linear(l.c * s); },
                          [&](const Power& p) { return power(p.c0 * s, p.gamma); },
                          [&](const Tabulated& t) {
                              auto y = t.y;
                              for (auto& v : y) v *= s;
                              return tabulated(t.x, std::move(y));
                          },
                      },
                      v_);
}

void to_json(nlohmann::json& j, const GrowthFunction& g) {
    std::visit(overloaded{
                   [&](const GrowthFunction::Linear& l) { j = {{"kind", "linear"}, {"c", l.c}}; },
                   [&](const GrowthFunction::Power& p) { j = {{"kind", "power"}, {"c0", p.c0}, {"gamma", p.gamma}}; },
                   [&](const GrowthFunction::Tabulated& t) { j = {{"kind", "table"}, {"x", t.x}, {"y", t.y}}; },
               },
               g.variant());
}

GrowthFunction growth_from_json(const nlohmann::json& j) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "linear") return GrowthFunction::linear(j.at("c").get<double>());
    if (kind == "power") return GrowthFunction::power(j.at("c0").get<double>(), j.at("gamma").get<double>());
    if (kind == "table")
        return GrowthFunction::tabulated(j.at("x").get<std::vector<double>>(), j.at("y").get<std::vector<double>>());
    throw ConfigError("unknown growth kind '" + kind + "'");
}

namespace {

double checked_reciprocal(const GrowthFunction& g, double s) {
    const double v = g(s);
    if (!(v > 0.0)) {
        std::ostringstream os;
        os << "1/g is not integrable: g(" << s << ") = " << v;
        throw QuadratureError(os.str());
    }
    return 1.0 / v;
}

// ∫_a^b ds / (c·(s/x_ref)^h) for 0 < a ≤ b.
double power_segment(double c, double x_ref, double h, double a, double b) {
    if (h == 1.0) return x_ref / c * std::log(b / a);
    const double scale = std::pow(x_ref, h) / c;
    return scale * (std::pow(b, 1.0 - h) - std::pow(a, 1.0 - h)) / (1.0 - h);
}

// Exact ∫_a^b ds/g(s) for the piecewise linear table with power-law ends, 0 ≤ a ≤ b.
double table_integral(const GrowthFunction& g, const GrowthFunction::Tabulated& t, double a, double b) {
    const std::size_t n = t.x.size();
    double total = 0.0;
    if (a < t.x[0]) {
        const double hi = std::min(b, t.x[0]);
        const double h = t.x[0] == 0.0 ? 0.0 : std::log(t.y[1] / t.y[0]) / std::log(t.x[1] / t.x[0]);
        total += power_segment(t.y[0], t.x[0], std::max(0.0, h), a, hi);
    }
    if (b > t.x[n - 1]) {
        const double lo = std::max(a, t.x[n - 1]);
        total += power_segment(t.y[n - 1], t.x[n - 1], g.tail_exponent(), lo, b);
    }
    auto first = std::upper_bound(t.x.begin(), t.x.end(), a);
    std::size_t i = first == t.x.begin() ? 0 : static_cast<std::size_t>(first - t.x.begin()) - 1;
    for (; i + 1 < n && t.x[i] < b; ++i) {
        const double lo = std::max(a, t.x[i]);
        const double hi = std::min(b, t.x[i + 1]);
        if (!(hi > lo)) continue;
        const double m = (t.y[i + 1] - t.y[i]) / (t.x[i + 1] - t.x[i]);
        const double g_lo = t.y[i] + m * (lo - t.x[i]);
        if (!(g_lo > 0.0)) throw QuadratureError("1/g is not integrable: g vanishes inside the table");
        const double r = m * (hi - lo) / g_lo;
        total += r == 0.0 ? (hi - lo) / g_lo : (hi - lo) / g_lo * std::log1p(r) / r;
    }
    return total;
}

// ∫_a^b ds/g(s) for 0 < a ≤ b, in the variable u = ln s.
double integrate_log(const GrowthFunction& g, double a, double b) {
    if (a == b) return 0.0;
    std::vector<double> cuts{a};
    if (const auto* t = std::get_if<GrowthFunction::Tabulated>(&g.variant()))
        for (double x : t->x)
            if (x > a && x < b) cuts.push_back(x);
    cuts.push_back(b);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double err = 0.0;
        auto f = [&](double u) {
            const double s = std::exp(u);
            return s * checked_reciprocal(g, s);
        };
        const double width = std::log(cuts[i + 1] / cuts[i]);
        if (width < 1e-6) {
            total += width * f(0.5 * (std::log(cuts[i]) + std::log(cuts[i + 1])));
            continue;
        }
        using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
        const double lo = std::log(cuts[i]);
        const double hi = std::log(cuts[i + 1]);
        double part = GK::integrate(f, lo, hi, 0, kQuadTol, &err);
        if (!(err <= 1e-13 * std::abs(part) + 1e-15)) part = GK::integrate(f, lo, hi, 12, 1e-11, &err);
        if (!std::isfinite(part) || err > 1e-9 * std::abs(part) + 1e-15) {
            std::ostringstream os;
            os << "quadrature of 1/g did not converge on [" << cuts[i] << ", " << cuts[i + 1] << "]: " << part
               << " +- " << err;
            throw QuadratureError(os.str());
        }
        total += part;
    }
    return total;
}

// ∫_0^b ds/g(s) when 1/g is integrable at zero.
double integrate_from_zero(const GrowthFunction& g, double b) {
    const auto& t = std::get<GrowthFunction::Tabulated>(g.variant());
    const double first = t.x[0] > 0.0 ? t.x[0] : t.x[1];
    const double a = std::min(first, b);
    boost::math::quadrature::tanh_sinh<double> ts;
    const double head = ts.integrate([&](double s) { return checked_reciprocal(g, std::max(s, 1e-300)); }, 0.0, a);
    if (!std::isfinite(head)) throw QuadratureError("quadrature of 1/g near zero did not converge");
    return head + (b > a ? integrate_log(g, a, b) : 0.0);
}

double integral(const GrowthFunction& g, double a, double b, Evaluation mode) {
    const auto* t = std::get_if<GrowthFunction::Tabulated>(&g.variant());
    if (t && mode == Evaluation::ClosedForm) return a <= b ? table_integral(g, *t, a, b) : -table_integral(g, *t, b, a);
    if (a <= b) return integrate_log(g, a, b);
    return -integrate_log(g, b, a);
}

}  // namespace

double g_big(double x, const GrowthFunction& g, const BihariOptions& opt) {
    if (!(opt.x0 > 0.0)) throw ContractViolation("G requires x0 > 0");
    if (x < 0.0 || !std::isfinite(x)) throw ContractViolation("G requires a finite x >= 0");
    if (x == 0.0) return inf_g_big(g, opt);
    if (opt.mode == Evaluation::ClosedForm) {
        if (const auto* l = std::get_if<GrowthFunction::Linear>(&g.variant())) return std::log(x / opt.x0) / l->c;
        if (const auto* p = std::get_if<GrowthFunction::Power>(&g.variant())) {
            if (p->gamma == 1.0) return std::log(x / opt.x0) / p->c0;
            return (std::pow(opt.x0, 1.0 - p->gamma) - std::pow(x, 1.0 - p->gamma)) / (p->c0 * (p->gamma - 1.0));
        }
    }
    return integral(g, opt.x0, x, opt.mode);
}

double sup_g_big(const GrowthFunction& g, const BihariOptions& opt) {
    const double gamma = g.tail_exponent();
    if (gamma <= 1.0) return kInfinity;
    if (opt.mode == Evaluation::ClosedForm) {
        if (const auto* p = std::get_if<GrowthFunction::Power>(&g.variant()))
            return std::pow(opt.x0, 1.0 - p->gamma) / (p->c0 * (p->gamma - 1.0));
    }
    if (const auto* t = std::get_if<GrowthFunction::Tabulated>(&g.variant())) {
        const double xn = t->x.back();
        const double yn = t->y.back();
        if (opt.x0 >= xn) return std::pow(xn, gamma) / yn * std::pow(opt.x0, 1.0 - gamma) / (gamma - 1.0);
        return integral(g, opt.x0, xn, opt.mode) + xn / (yn * (gamma - 1.0));
    }
    boost::math::quadrature::exp_sinh<double> es;
    double err = 0.0;
    const double v = es.integrate(
        [&](double u) {
            const double s = std::exp(u);
            return std::isfinite(s) ? s * checked_reciprocal(g, s) : 0.0;
        },
        std::log(opt.x0), kInfinity, kQuadTol, &err);
    if (!std::isfinite(v)) throw QuadratureError("tail quadrature of 1/g did not converge");
    return v;
}

double inf_g_big(const GrowthFunction& g, const BihariOptions& opt) {
    if (!g.integrable_at_zero()) return -kInfinity;
    if (opt.mode == Evaluation::ClosedForm) {
        const auto& t = std::get<GrowthFunction::Tabulated>(g.variant());
        return -table_integral(g, t, 0.0, opt.x0);
    }
    return -integrate_from_zero(g, opt.x0);
}

double g_big_inverse(double y, const GrowthFunction& g, const BihariOptions& opt) {
    const double sup = sup_g_big(g, opt);
    if (!(y < sup)) throw ContractViolation("G inverse: argument at or above sup G");
    if (opt.mode == Evaluation::ClosedForm) {
        if (const auto* l = std::get_if<GrowthFunction::Linear>(&g.variant())) return opt.x0 * std::exp(l->c * y);
        if (const auto* p = std::get_if<GrowthFunction::Power>(&g.variant())) {
            if (p->gamma == 1.0) return opt.x0 * std::exp(p->c0 * y);
            const double base = std::pow(opt.x0, 1.0 - p->gamma) - p->c0 * (p->gamma - 1.0) * y;
            return std::pow(base, 1.0 / (1.0 - p->gamma));
        }
    }
    const double inf = inf_g_big(g, opt);
    if (y <= inf) return 0.0;

    // Monotone bisection on G in log space, bracket grown geometrically from x0.
    double lo = opt.x0;
    double hi = opt.x0;
    if (y >= 0.0) {
        while (g_big(hi, g, opt) < y) {
            lo = hi;
            hi *= 2.0;
            if (!std::isfinite(hi)) throw QuadratureError("G inverse: bracket overflow");
        }
    } else {
        while (g_big(lo, g, opt) > y) {
            hi = lo;
            lo *= 0.5;
            if (lo < 1e-300) return 0.0;
        }
    }
    for (int it = 0; it < 300 && hi - lo > 4e-16 * hi; ++it) {
        const double mid = (lo > 0.0 && hi / lo > 4.0) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
        if (g_big(mid, g, opt) < y)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

Bound bihari_bound(double K, double q_integral, const GrowthFunction& g, const BihariOptions& opt) {
    if (!(K >= 0.0) || !std::isfinite(K)) throw ContractViolation("bihari_bound requires finite K >= 0");
    if (!(q_integral >= 0.0) || !std::isfinite(q_integral))
        throw ContractViolation("bihari_bound requires a finite q integral >= 0");
    if (K == 0.0 && !g.integrable_at_zero()) return Bound::finite(0.0);
    const double arg = g_big(K, g, opt) + q_integral;
    if (arg >= sup_g_big(g, opt)) return Bound::escape();
    return Bound::finite(g_big_inverse(arg, g, opt));
}

HorizonEstimate horizon(double K, const std::function<double(double)>& f_integral, const GrowthFunction& g,
                        double T, const HorizonOptions& opt) {
    if (!(K >= 0.0) || !std::isfinite(K)) throw ContractViolation("horizon requires finite K >= 0");
    if (!(T > 0.0) || !std::isfinite(T)) throw ContractViolation("horizon requires finite T > 0");
    HorizonEstimate est;
    est.t_requested = T;
    est.initial = K;
    est.g = g;
    est.options = opt.bihari;
    est.sup_g = sup_g_big(g, opt.bihari);
    est.g_at_k = g_big(K, g, opt.bihari);

    auto G_of = [&](double t) { return g_big(K + f_integral(t), g, opt.bihari); };
    if (!std::isfinite(est.sup_g)) {
        est.t0 = T;
    } else {
        // φ(t) = sup G − G(K + F(t)) − t is strictly decreasing.
        auto phi = [&](double t) { return est.sup_g - G_of(t) - t; };
        if (phi(T) > 0.0) {
            est.t0 = T;
        } else {
            double lo = 0.0;
            double hi = T;
            for (int it = 0; it < 400 && hi - lo > opt.tolerance * std::min(1.0, hi); ++it) {
                const double mid = 0.5 * (lo + hi);
                if (phi(mid) > 0.0)
                    lo = mid;
                else
                    hi = mid;
            }
            est.t0 = lo;
        }
    }
    est.effective = K + f_integral(est.t0);
    return est;
}

double envelope(const HorizonEstimate& est, double t) {
    if (t < 0.0 || t > est.t0 * (1.0 + 1e-12) + 1e-15)
        throw ContractViolation("envelope evaluated outside [0, t0]");
    if (est.effective == 0.0 && !est.g.integrable_at_zero()) return 0.0;
    const auto b = bihari_bound(est.effective, t, est.g, est.options);
    if (b.escaped()) return kInfinity;
    return b.value;
}

OracleResult ode_oracle(double K, const GrowthFunction& g, double t) {
    namespace odeint = boost::numeric::odeint;
    using State = std::array<double, 1>;
    if (!(K >= 0.0) || !(t >= 0.0)) throw ContractViolation("ode_oracle requires K >= 0, t >= 0");
    auto rhs = [&](const State& p, State& dp, double) { dp[0] = g(p[0]); };
    auto stepper = odeint::make_controlled(1e-14, 1e-13, odeint::runge_kutta_dopri5<State>());
    State p{K};
    double now = 0.0;
    double dt = std::min(1e-4, t > 0.0 ? t : 1e-4);
    const double cap = 1e15 * std::max(1.0, K);
    while (now < t) {
        dt = std::min(dt, t - now);
        if (stepper.try_step(rhs, p, now, dt) == odeint::fail) {
            if (dt < 1e-300) break;
            continue;
        }
        if (!std::isfinite(p[0]) || p[0] > cap) return {BoundStatus::Escaped, kInfinity, now};
    }
    return {BoundStatus::Finite, p[0], kInfinity};
}

}  // namespace gelfand
