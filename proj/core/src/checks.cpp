#include "gelfand/checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gelfand/errors.hpp"
#include "gelfand/random.hpp"
#include "parallel.hpp"

namespace gelfand {

void to_json(nlohmann::json& j, const SamplerConfig& s) {
    j = {{"seed", s.seed},
         {"t_min", s.t_min},
         {"t_max", s.t_max},
         {"amplitude_min", s.amplitude_min},
         {"amplitude_max", s.amplitude_max}};
}

void from_json(const nlohmann::json& j, SamplerConfig& s) {
    s.seed = j.value("seed", s.seed);
    s.t_min = j.value("t_min", s.t_min);
    s.t_max = j.value("t_max", s.t_max);
    s.amplitude_min = j.value("amplitude_min", s.amplitude_min);
    s.amplitude_max = j.value("amplitude_max", s.amplitude_max);
}

Sampler::Sampler(const EvolutionOperator& op, SamplerConfig config) : op_(&op), config_(config) {
    if (!(config_.amplitude_min > 0.0) || !(config_.amplitude_max >= config_.amplitude_min))
        throw ContractViolation("sampler amplitude range must be positive and ordered");
    if (!(config_.t_max >= config_.t_min)) throw ContractViolation("sampler time range must be ordered");
}

std::vector<double> Sampler::state(std::uint64_t trial, unsigned slot) const {
    const auto& space = op_->space();
    const CounterRng rng(config_.seed, trial);
    const std::uint64_t base = static_cast<std::uint64_t>(slot) * (space.size() + 1);
    const double la = std::log(config_.amplitude_min);
    const double lb = std::log(config_.amplitude_max);
    const double amp = std::exp(la + (lb - la) * rng.uniform(base));
    const auto nc = static_cast<std::size_t>(space.components());
    std::vector<double> v(space.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = amp * rng.normal(base + 1 + i) / std::sqrt(space.v_weights()[i / nc]);
    op_->constrain(v);
    return v;
}

std::pair<std::vector<double>, std::vector<double>> Sampler::pair(std::uint64_t trial) const {
    auto v1 = state(trial, 0);
    auto v2 = state(trial, 1);
    if (trial % 2 == 0) return {std::move(v1), std::move(v2)};
    const auto& space = op_->space();
    const double n1 = std::sqrt(pairing(space, v1, v1));
    const double n2 = std::sqrt(pairing(space, v2, v2));
    if (!(n1 > 0.0) || !(n2 > 0.0)) return {std::move(v1), std::move(v2)};
    const CounterRng rng(config_.seed, trial);
    const double eps = std::pow(10.0, -3.0 + 3.0 * rng.uniform(~std::uint64_t{0} - 1));
    const double s = eps * n1 / n2;
    for (std::size_t i = 0; i < v2.size(); ++i) v2[i] = v1[i] + s * v2[i];
    return {std::move(v1), std::move(v2)};
}

double Sampler::time(std::uint64_t trial) const {
    const CounterRng rng(config_.seed, trial);
    return config_.t_min + (config_.t_max - config_.t_min) * rng.uniform(~std::uint64_t{0});
}

void to_json(nlohmann::json& j, const CheckReport& r) {
    auto violations = nlohmann::json::array();
    for (const auto& v : r.violations)
        violations.push_back({{"seed", v.seed}, {"trial", v.trial}, {"margin", v.margin}, {"t", v.t}});
    j = {{"check", r.check},
         {"trials", r.trials},
         {"violations", violations},
         {"worst_margin", r.worst_margin},
         {"worst_trial", r.worst_trial},
         {"worst_t", r.worst_t},
         {"constants_used", r.constants_used}};
}

namespace {

struct TrialOutcome {
    double margin = 0.0;
    double scale = 0.0;  ///< magnitude of the terms compared
    double t = 0.0;
    bool flagged = false;
};

template <class Trial>
CheckReport run_check(std::string name, const CheckOptions& opt, nlohmann::json constants, Trial&& trial) {
    if (opt.trials < 1) throw ContractViolation("checks need at least one trial");
    std::vector<TrialOutcome> outcomes(opt.trials);
    detail::parallel_for(
        opt.trials, [&](std::size_t i) { outcomes[i] = trial(static_cast<std::uint64_t>(i)); }, opt.workers);

    CheckReport report;
    report.check = std::move(name);
    report.trials = opt.trials;
    report.constants_used = std::move(constants);
    report.worst_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const auto& o = outcomes[i];
        if (o.margin < report.worst_margin) {
            report.worst_margin = o.margin;
            report.worst_trial = i;
            report.worst_t = o.t;
        }
        const bool bad = o.flagged || !std::isfinite(o.margin) || o.margin < -opt.rel_tol * o.scale;
        if (bad) report.violations.push_back({opt.sampler.seed, i, o.margin, o.t});
    }
    return report;
}

nlohmann::json constants_json(const StructuralConstants& c) { return c; }

}  // namespace

CheckReport check_local_monotonicity(const EvolutionOperator& op, const StructuralConstants& c,
                                     const CheckOptions& opt) {
    const Sampler sampler(op, opt.sampler);
    const auto& space = op.space();
    return run_check("local_monotonicity", opt, constants_json(c), [&](std::uint64_t trial) {
        const double t = sampler.time(trial);
        const auto [v1, v2] = sampler.pair(trial);
        const auto a1 = op.eval(t, v1);
        const auto a2 = op.eval(t, v2);
        std::vector<double> d(v1.size());
        std::vector<double> da(v1.size());
        for (std::size_t i = 0; i < d.size(); ++i) {
            d[i] = v1[i] - v2[i];
            da[i] = a1[i] - a2[i];
        }
        const double lhs = pairing(space, da, d);
        const double nd = pairing(space, d, d);
        const double rhs = (c.f(t) + c.rho_form(space, v1) + c.eta_form(space, v2)) * nd;
        const double scale = std::abs(pairing(space, a1, d)) + std::abs(pairing(space, a2, d)) + std::abs(rhs);
        return TrialOutcome{rhs - lhs, scale, t};
    });
}

CheckReport check_coercivity(const EvolutionOperator& op, const StructuralConstants& c, const CheckOptions& opt) {
    const Sampler sampler(op, opt.sampler);
    const auto& space = op.space();
    return run_check("coercivity", opt, constants_json(c), [&](std::uint64_t trial) {
        const double t = sampler.time(trial);
        const auto v = sampler.state(trial, 0);
        const double lhs = 2.0 * pairing(space, op.eval(t, v), v);
        const double h = h_norm(space, v);
        const double dv = c.delta * std::pow(v_norm(space, v), c.alpha);
        const double gh = c.g(h * h);
        const double rhs = -dv + gh + c.f(t);
        return TrialOutcome{rhs - lhs, std::abs(lhs) + dv + gh + c.f(t), t};
    });
}

CheckReport check_growth(const EvolutionOperator& op, const StructuralConstants& c, const CheckOptions& opt) {
    const Sampler sampler(op, opt.sampler);
    const auto& space = op.space();
    return run_check("growth", opt, constants_json(c), [&](std::uint64_t trial) {
        const double t = sampler.time(trial);
        const auto v = sampler.state(trial, 0);
        const double lhs = vstar_norm(space, op.eval(t, v));
        const double rhs = (std::pow(c.f(t), (c.alpha - 1.0) / c.alpha) +
                            c.c_growth * std::pow(v_norm(space, v), c.alpha - 1.0)) *
                           (1.0 + std::pow(h_norm(space, v), c.beta));
        return TrialOutcome{rhs - lhs, lhs + rhs, t};
    });
}

CheckReport check_hemicontinuity(const EvolutionOperator& op, const CheckOptions& opt) {
    const Sampler sampler(op, opt.sampler);
    const auto& space = op.space();
    auto profile = [&](double t, const std::vector<double>& v1, const std::vector<double>& v2,
                       const std::vector<double>& v, int points, double& max_abs) {
        std::vector<double> w(v1.size());
        double prev = 0.0;
        double jump = 0.0;
        for (int i = 0; i < points; ++i) {
            const double s = -1.0 + 2.0 * i / (points - 1);
            for (std::size_t k = 0; k < w.size(); ++k) w[k] = v1[k] + s * v2[k];
            const double val = pairing(space, op.eval(t, w), v);
            max_abs = std::max(max_abs, std::abs(val));
            if (i > 0) jump = std::max(jump, std::abs(val - prev));
            prev = val;
        }
        return jump;
    };
    return run_check("hemicontinuity", opt, nlohmann::json::object(), [&](std::uint64_t trial) {
        const double t = sampler.time(trial);
        const auto v1 = sampler.state(trial, 0);
        const auto v2 = sampler.state(trial, 1);
        const auto v = sampler.state(trial, 2);
        double scale = 0.0;
        const double coarse = profile(t, v1, v2, v, 17, scale);
        const double fine = profile(t, v1, v2, v, 257, scale);
        // A continuous profile shrinks its largest step ~16x under refinement; a jump does not.
        const double margin = 0.5 * coarse - fine;
        TrialOutcome o{margin, scale, t};
        o.flagged = margin < 0.0 && fine > 1e-9 * scale;
        return o;
    });
}

CheckReport check_uniqueness_growth(const EvolutionOperator& op, const StructuralConstants& c,
                                    const CheckOptions& opt) {
    const Sampler sampler(op, opt.sampler);
    const auto& space = op.space();
    return run_check("uniqueness_growth", opt, constants_json(c), [&](std::uint64_t trial) {
        const auto v = sampler.state(trial, 0);
        const double lhs = c.rho_form(space, v) + c.eta_form(space, v);
        const double rhs = c.c_c3 * (1.0 + std::pow(v_norm(space, v), c.alpha)) *
                           (1.0 + std::pow(h_norm(space, v), c.gamma_c3));
        return TrialOutcome{rhs - lhs, lhs + rhs, 0.0};
    });
}

CheckReport check_subadditivity(const EvolutionOperator& op, const FunctionalForm& form, const CheckOptions& opt) {
    const Sampler sampler(op, opt.sampler);
    const auto& space = op.space();
    const double k = form.subadditivity_constant();
    return run_check("subadditivity", opt, nlohmann::json{{"form", form}, {"constant", k}}, [&](std::uint64_t trial) {
        const auto u = sampler.state(trial, 0);
        const auto v = sampler.state(trial, 1);
        std::vector<double> w(u.size());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = u[i] + v[i];
        const double lhs = form(space, w);
        const double rhs = k * (form(space, u) + form(space, v));
        return TrialOutcome{rhs - lhs, lhs + rhs, 0.0};
    });
}

StructuralConstants corrupted_constants(const StructuralConstants& c, Hypothesis which, double factor) {
    StructuralConstants out = c;
    switch (which) {
        case Hypothesis::LocalMonotonicity:
            out.f = c.f.scaled(factor);
            out.rho_form = c.rho_form.scaled(factor);
            out.eta_form = c.eta_form.scaled(factor);
            break;
        case Hypothesis::Coercivity:
            out.f = c.f.scaled(factor);
            out.g = c.g.scaled(factor);
            out.delta = c.delta / factor;
            break;
        case Hypothesis::Growth:
            out.f = c.f.scaled(factor);
            out.c_growth = c.c_growth * factor;
            break;
    }
    return out;
}

namespace {

// min f + c subject to f + c·phi_i ≥ rhs_i, f, c ≥ 0.  The objective is convex in c.
std::pair<double, double> fit_offset_and_slope(const std::vector<double>& phi, const std::vector<double>& rhs) {
    auto offset = [&](double c) {
        double f = 0.0;
        for (std::size_t i = 0; i < phi.size(); ++i) f = std::max(f, rhs[i] - c * phi[i]);
        return f;
    };
    double hi = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i)
        if (phi[i] > 0.0 && rhs[i] > 0.0) hi = std::max(hi, rhs[i] / phi[i]);
    double lo = 0.0;
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
        const double a = hi - invphi * (hi - lo);
        const double b = lo + invphi * (hi - lo);
        if (a + offset(a) <= b + offset(b))
            hi = b;
        else
            lo = a;
    }
    const double c = hi;
    return {offset(c), c};
}

double unit_growth(const GrowthFunction& g, double x) {
    if (const auto* p = std::get_if<GrowthFunction::Power>(&g.variant())) return std::pow(x, p->gamma);
    if (std::holds_alternative<GrowthFunction::Linear>(g.variant())) return x;
    return g(x);
}

GrowthFunction growth_with_amplitude(const GrowthFunction& g, double c) {
    c = std::max(c, 1e-12);
    if (const auto* p = std::get_if<GrowthFunction::Power>(&g.variant())) return GrowthFunction::power(c, p->gamma);
    if (std::holds_alternative<GrowthFunction::Linear>(g.variant())) return GrowthFunction::linear(c);
    return g.scaled(c);
}

}  // namespace

ConstantEstimate estimate_constants(const EvolutionOperator& op, const StructuralConstants& shape,
                                    const EstimateOptions& opt) {
    const auto& space = op.space();
    const Sampler sampler(op, opt.sampler);
    const std::size_t n = opt.budget;
    const double alpha = shape.alpha;

    struct Sample {
        double t, h, vn, pair_full, pair_lin;
        double mono_ratio, mono_weight;
        double vstar;
        double forms;
    };
    std::vector<Sample> s(n);
    const auto diag = op.linear_diagonal();
    std::vector<char> nonlinear(n, 0);
    detail::parallel_for(n, [&](std::size_t i) {
        const double t = sampler.time(i);
        const auto v = sampler.state(i, 0);
        const auto v2 = sampler.state(i, 1);
        const auto av = op.eval(t, v);
        Sample& x = s[i];
        x.t = t;
        x.h = h_norm(space, v);
        x.vn = v_norm(space, v);
        x.pair_full = 2.0 * pairing(space, av, v);
        x.pair_lin = x.pair_full;
        if (diag) {
            std::vector<double> lv(v.size());
            double resid = 0.0;
            double size = 0.0;
            for (std::size_t k = 0; k < v.size(); ++k) {
                lv[k] = (*diag)[k] * v[k];
                resid = std::max(resid, std::abs(av[k] - lv[k]));
                size = std::max(size, std::abs(av[k]));
            }
            x.pair_lin = 2.0 * pairing(space, lv, v);
            nonlinear[i] = resid > 1e-12 * size;
        }
        const auto av2 = op.eval(t, v2);
        std::vector<double> d(v.size());
        std::vector<double> da(v.size());
        for (std::size_t k = 0; k < d.size(); ++k) {
            d[k] = v[k] - v2[k];
            da[k] = av[k] - av2[k];
        }
        const double nd = pairing(space, d, d);
        x.mono_ratio = nd > 0.0 ? pairing(space, da, d) / nd : 0.0;
        x.mono_weight = shape.rho_form(space, v) + shape.eta_form(space, v2);
        x.vstar = vstar_norm(space, av);
        x.forms = shape.rho_form(space, v) + shape.eta_form(space, v);
    });
    const bool has_nonlinear = !diag || std::any_of(nonlinear.begin(), nonlinear.end(), [](char c) { return c; });

    // δ: the coercivity slack c(δ) = max_i (pair_i + δ‖v_i‖_V^α)/‖v_i‖²_H is an upper envelope of
    // lines in δ; its slope jumps once δ passes the true dissipation constant.
    auto envelope_slope = [&](double delta) {
        double best = -std::numeric_limits<double>::infinity();
        double slope = 0.0;
        for (const auto& x : s) {
            if (x.h <= 0.0) continue;
            const double b = std::pow(x.vn, alpha) / (x.h * x.h);
            const double val = (x.pair_lin + delta * std::pow(x.vn, alpha)) / (x.h * x.h);
            if (val > best) {
                best = val;
                slope = b;
            }
        }
        return slope;
    };
    const double base_slope = envelope_slope(opt.delta_floor);
    double knee = -1.0;
    {
        double prev = opt.delta_floor;
        const int steps = 240;
        for (int i = 1; i <= steps; ++i) {
            const double d = opt.delta_floor * std::pow(opt.delta_max / opt.delta_floor, double(i) / steps);
            if (envelope_slope(d) > 2.0 * base_slope) {
                double lo = prev;
                double hi = d;
                for (int it = 0; it < 60; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if (envelope_slope(mid) > 2.0 * base_slope)
                        hi = mid;
                    else
                        lo = mid;
                }
                knee = lo;
                break;
            }
            prev = d;
        }
    }
    double fit_delta = knee > 0.0 ? knee : opt.delta_floor;
    if (knee > 0.0 && diag && has_nonlinear) fit_delta *= 0.5;
    const double delta = knee > 0.0 ? std::max(opt.delta_floor, fit_delta / opt.headroom) : opt.delta_floor;

    // g amplitude and f from the coercivity inequality at the knee.
    std::vector<double> phi(n);
    std::vector<double> rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
        phi[i] = unit_growth(shape.g, s[i].h * s[i].h);
        rhs[i] = s[i].pair_full + std::max(delta, fit_delta) * std::pow(s[i].vn, alpha);
    }
    auto [f3, cg] = fit_offset_and_slope(phi, rhs);

    // ρ/η multiplier and f from local monotonicity.
    for (std::size_t i = 0; i < n; ++i) {
        phi[i] = s[i].mono_weight;
        rhs[i] = s[i].mono_ratio;
    }
    auto [f2, m] = fit_offset_and_slope(phi, rhs);

    const double f = opt.headroom * std::max(f2, f3);
    const double fpow = std::pow(f, (alpha - 1.0) / alpha);
    double cgrowth = 0.0;
    double cc3 = 0.0;
    for (const auto& x : s) {
        const double vpow = std::pow(x.vn, alpha - 1.0);
        if (vpow > 0.0) cgrowth = std::max(cgrowth, (x.vstar / (1.0 + std::pow(x.h, shape.beta)) - fpow) / vpow);
        cc3 = std::max(cc3, x.forms / ((1.0 + std::pow(x.vn, alpha)) * (1.0 + std::pow(x.h, shape.gamma_c3))));
    }

    ConstantEstimate est;
    est.samples = n;
    est.constants = shape;
    est.constants.delta = delta;
    est.constants.f = TimeFunction::constant(f);
    est.constants.g = growth_with_amplitude(shape.g, knee > 0.0 ? cg : opt.headroom * cg);
    est.constants.rho_form = shape.rho_form.scaled(opt.headroom * m);
    est.constants.eta_form = shape.eta_form.scaled(opt.headroom * m);
    est.constants.c_growth = opt.headroom * cgrowth;
    est.constants.c_c3 = opt.headroom * cc3;
    est.feasible = std::isfinite(delta) && std::isfinite(f) && std::isfinite(cg) && std::isfinite(m) &&
                   std::isfinite(cgrowth) && std::isfinite(cc3);
    est.metadata = {{"budget", n},
                    {"sampler", opt.sampler},
                    {"headroom", opt.headroom},
                    {"delta_knee", knee},
                    {"delta_floor", opt.delta_floor},
                    {"nonlinear_part", has_nonlinear},
                    {"fit", {{"coercivity_offset", f3}, {"g_amplitude", cg}, {"monotonicity_offset", f2},
                             {"form_multiplier", m}, {"growth", cgrowth}, {"uniqueness", cc3}}},
                    {"note", "empirical fit over sampled states; necessary evidence only"}};
    if (est.feasible) est.constants.validate();
    return est;
}

}  // namespace gelfand
