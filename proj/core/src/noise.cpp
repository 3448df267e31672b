#include "gelfand/noise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gelfand/errors.hpp"
#include "gelfand/random.hpp"
#include "parallel.hpp"

namespace gelfand {

double NoiseModel::hs_norm_sq(const SpectralSpace& space) const {
    const int comps = space.components();
    double s = 0.0;
    for (std::size_t i = 0; i < b_coeffs.size(); ++i)
        s += space.h_weights()[i / static_cast<std::size_t>(comps)] * b_coeffs[i] * b_coeffs[i];
    return s;
}

bool NoiseModel::is_zero() const {
    return std::all_of(b_coeffs.begin(), b_coeffs.end(), [](double b) { return b == 0.0; }) ||
           amplitude.max_value() == 0.0;
}

void NoiseModel::validate(const SpectralSpace& space) const {
    if (b_coeffs.size() != space.size()) throw ContractViolation("noise: b_coeffs must have one entry per coefficient");
    for (double b : b_coeffs)
        if (!(b >= 0.0) || !std::isfinite(b)) throw ContractViolation("noise: b_coeffs must be finite and non-negative");
    if (!std::isfinite(hs_norm_sq(space))) throw ContractViolation("noise: Hilbert-Schmidt norm is not finite");
    if (!std::isfinite(amplitude.max_value())) throw ContractViolation("noise: amplitude is not bounded");
    if (!(shift_constant > 0.0)) throw ContractViolation("noise: shift_constant must be positive");
}

NoiseModel NoiseModel::power_law(const SpectralSpace& space, double scale, double decay) {
    NoiseModel m;
    m.b_coeffs.resize(space.size());
    const auto comps = static_cast<std::size_t>(space.components());
    for (std::size_t i = 0; i < m.b_coeffs.size(); ++i)
        m.b_coeffs[i] = scale * std::pow(1.0 + space.kappa_sq(i / comps), -0.5 * decay);
    return m;
}

NoiseModel NoiseModel::single(const SpectralSpace& space, std::size_t coefficient, double b) {
    if (coefficient >= space.size()) throw ContractViolation("noise: coefficient index out of range");
    NoiseModel m;
    m.b_coeffs.assign(space.size(), 0.0);
    m.b_coeffs[coefficient] = b;
    return m;
}

void to_json(nlohmann::json& j, const NoiseModel& m) {
    j = {{"b_coeffs", m.b_coeffs}, {"shift_constant", m.shift_constant}};
    nlohmann::json a;
    to_json(a, m.amplitude);
    j["amplitude"] = a;
}

NoiseModel noise_model_from_json(const nlohmann::json& j, const SpectralSpace& space) {
    if (!j.is_object()) throw ConfigError("noise: expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (it.key() != "b_coeffs" && it.key() != "amplitude" && it.key() != "shift_constant")
            throw ConfigError("noise: unknown key '" + it.key() + "'");
    NoiseModel m;
    const auto& b = j.at("b_coeffs");
    if (b.is_array()) {
        m.b_coeffs = b.get<std::vector<double>>();
    } else if (b.is_object()) {
        for (auto it = b.begin(); it != b.end(); ++it)
            if (it.key() != "scale" && it.key() != "decay")
                throw ConfigError("noise.b_coeffs: unknown key '" + it.key() + "'");
        m = NoiseModel::power_law(space, b.at("scale").get<double>(), b.value("decay", 0.0));
    } else {
        throw ConfigError("noise.b_coeffs: expected a list or {scale, decay}");
    }
    if (j.contains("amplitude")) m.amplitude = time_function_from_json(j.at("amplitude"));
    m.shift_constant = j.value("shift_constant", m.shift_constant);
    try {
        m.validate(space);
    } catch (const ContractViolation& e) {
        throw ConfigError(e.what());
    }
    return m;
}

void PathConfig::validate(const SolveConfig& cfg) const {
    if (!(dt_noise > 0.0)) throw ConfigError("paths: dt_noise must be positive");
    if (dt_noise > cfg.dt_init) throw ConfigError("paths: dt_noise must not exceed dt_init");
    if (n_paths < 1) throw ConfigError("paths: n_paths must be positive");
    if (workers < 0) throw ConfigError("paths: workers must be non-negative");
}

void to_json(nlohmann::json& j, const PathConfig& c) {
    j = {{"seed", c.seed}, {"dt_noise", c.dt_noise}, {"n_paths", c.n_paths}, {"workers", c.workers}};
}

void from_json(const nlohmann::json& j, PathConfig& c) {
    if (!j.is_object()) throw ConfigError("paths: expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (it.key() != "seed" && it.key() != "dt_noise" && it.key() != "n_paths" && it.key() != "workers")
            throw ConfigError("paths: unknown key '" + it.key() + "'");
    c.seed = j.value("seed", c.seed);
    c.dt_noise = j.value("dt_noise", c.dt_noise);
    c.n_paths = j.value("n_paths", c.n_paths);
    c.workers = j.value("workers", c.workers);
}

double wiener_normal(std::uint64_t seed, std::size_t coefficient, std::size_t step) {
    return CounterRng(seed, coefficient).normal(step);
}

WienerTable sample_wiener(const NoiseModel& model, const SpectralSpace& space, double dt, std::size_t steps,
                          std::uint64_t seed) {
    model.validate(space);
    if (!(dt > 0.0)) throw ContractViolation("sample_wiener: dt must be positive");
    WienerTable w;
    w.dt = dt;
    w.steps = steps;
    w.size = space.size();
    w.increments.assign(steps * w.size, 0.0);
    const double sq = std::sqrt(dt);
    for (std::size_t k = 0; k < steps; ++k) {
        const double amp = model.amplitude(static_cast<double>(k) * dt);
        for (std::size_t i = 0; i < w.size; ++i) {
            const double b = amp * model.b_coeffs[i];
            if (b != 0.0) w.increments[k * w.size + i] = b * sq * wiener_normal(seed, i, k);
        }
    }
    return w;
}

std::vector<double> NoisePath::at(double t) const {
    if (zero || states.size() == 1) return states.front();
    const double s = std::clamp(t / dt, 0.0, static_cast<double>(states.size() - 1));
    const auto k = std::min(static_cast<std::size_t>(s), states.size() - 2);
    const double w = s - static_cast<double>(k);
    std::vector<double> y(states[k].size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = (1.0 - w) * states[k][i] + w * states[k + 1][i];
    return y;
}

void require_noise_generator(const EvolutionOperator& a1) {
    const auto& c = a1.constants();
    std::ostringstream os;
    if (!c.rho_form.is_zero()) os << " rho = " << c.rho_form.describe() << " is not zero;";
    if (c.beta != 0.0) os << " beta = " << c.beta << " is not zero;";
    if (!std::holds_alternative<GrowthFunction::Linear>(c.g.variant())) os << " g is not linear;";
    const auto problems = os.str();
    if (!problems.empty())
        throw PreconditionFailure(a1.name() + " cannot drive the auxiliary process:" + problems);
}

NoisePath solve_auxiliary_y(const EvolutionOperator& a1, const NoiseModel& model, double t_end, double dt,
                            std::uint64_t seed) {
    require_noise_generator(a1);
    const auto& space = a1.space();
    model.validate(space);
    if (!(t_end > 0.0) || !(dt > 0.0)) throw ContractViolation("solve_auxiliary_y: t_end and dt must be positive");
    const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
    const std::size_t n = space.size();

    NoisePath path;
    path.dt = dt;
    path.states.emplace_back(n, 0.0);
    if (model.is_zero()) {
        path.zero = true;
        path.exact = true;
        return path;
    }
    path.states.reserve(steps + 1);

    const auto* diag_op = dynamic_cast<const DiagonalOperator*>(&a1);
    if (diag_op) {
        path.exact = true;
        const auto lambda = *diag_op->linear_diagonal();
        std::vector<double> decay(n), spread(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double l = lambda[i];
            decay[i] = std::exp(l * dt);
            spread[i] = l == 0.0 ? std::sqrt(dt) : std::sqrt(std::expm1(2.0 * l * dt) / (2.0 * l));
        }
        for (std::size_t k = 0; k < steps; ++k) {
            const double amp = model.amplitude(static_cast<double>(k) * dt);
            std::vector<double> y = path.states.back();
            for (std::size_t i = 0; i < n; ++i) {
                y[i] *= decay[i];
                const double b = amp * model.b_coeffs[i];
                if (b != 0.0) y[i] += b * spread[i] * wiener_normal(seed, i, k);
            }
            path.states.push_back(std::move(y));
        }
        return path;
    }

    const double sq = std::sqrt(dt);
    std::vector<double> drift(n);
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        const double amp = model.amplitude(t);
        std::vector<double> y = path.states.back();
        a1.eval(t, y, drift);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] += dt * drift[i];
            const double b = amp * model.b_coeffs[i];
            if (b != 0.0) y[i] += b * sq * wiener_normal(seed, i, k);
        }
        a1.constrain(y);
        path.states.push_back(std::move(y));
    }
    return path;
}

StructuralConstants shifted_constants(const EvolutionOperator& a1, const StructuralConstants& sum_constants,
                                      const NoisePath& y, double shift_constant) {
    if (y.zero) return sum_constants;
    const auto& space = a1.space();
    const auto& c = sum_constants;
    StructuralConstants s = c;
    const double k = shift_constant;
    const double sr = c.rho_form.subadditivity_constant();
    const double se = c.eta_form.subadditivity_constant();
    s.rho_form = c.rho_form.scaled(sr);
    s.eta_form = c.eta_form.scaled(se);
    s.delta = c.delta * std::pow(2.0, -c.alpha - 1.0);
    s.c_growth = k * c.c_growth;
    s.c_c3 = c.c_c3 * std::max(sr, se);

    std::vector<double> v_alpha(y.states.size()), h_sq(y.states.size());
    double v_alpha_max = 0.0;
    for (std::size_t i = 0; i < y.states.size(); ++i) {
        v_alpha[i] = std::pow(v_norm(space, y.states[i]), c.alpha);
        h_sq[i] = pairing(space, y.states[i], y.states[i]);
        v_alpha_max = std::max(v_alpha_max, v_alpha[i]);
    }
    // ‖Y‖_V^α ‖v‖_H^{αβ}: linear in ‖v‖²_H up to a constant when αβ ≤ 2.
    const double q = 0.5 * c.alpha * c.beta;
    const bool folded = q <= 1.0;
    const double lin = k * (1.0 + (folded ? v_alpha_max : 0.0));
    const auto& g = c.g;
    if (const auto* l = std::get_if<GrowthFunction::Linear>(&g.variant()); l && folded) {
        s.g = GrowthFunction::linear(4.0 * l->c + lin);
    } else {
        const double m = folded ? 0.0 : k * v_alpha_max;
        s.g = GrowthFunction::tabulate([&](double x) { return g(4.0 * x) + lin * x + m * std::pow(x, q); }, 1e-12,
                                       1e12, 241);
    }

    std::vector<double> times(y.states.size()), values(y.states.size());
    for (std::size_t i = 0; i < y.states.size(); ++i) {
        const double t = static_cast<double>(i) * y.dt;
        times[i] = t;
        values[i] = c.f(t) +
                    k * (v_alpha[i] + h_sq[i] + v_alpha[i] * std::pow(h_sq[i], q) + g(4.0 * h_sq[i]) +
                         (folded ? v_alpha_max : 0.0)) +
                    sr * c.rho_form(space, y.states[i]) + se * c.eta_form(space, y.states[i]);
    }
    s.f = TimeFunction::samples(std::move(times), std::move(values));
    return s;
}

ShiftedOperator::ShiftedOperator(OperatorPtr a1, OperatorPtr a2, const StructuralConstants& sum_constants,
                                 std::shared_ptr<const NoisePath> y, double shift_constant)
    : EvolutionOperator(a1->space_ptr(), shifted_constants(*a1, sum_constants, *y, shift_constant),
                        "shifted(" + a1->name() + " + " + a2->name() + ")"),
      a1_(std::move(a1)),
      a2_(std::move(a2)),
      y_(std::move(y)) {
    if (a1_->space().size() != a2_->space().size()) throw ContractViolation("shifted operator: spaces differ");
}

void ShiftedOperator::apply(double t, std::span<const double> v, std::span<double> out) const {
    std::vector<double> tmp(out.size());
    if (y_->zero) {
        a1_->apply(t, v, out);
        a2_->apply(t, v, tmp);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += tmp[i];
        return;
    }
    const auto y = y_->at(t);
    std::vector<double> shifted(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) shifted[i] = v[i] + y[i];
    a1_->apply(t, shifted, out);
    a1_->apply(t, y, tmp);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= tmp[i];
    a2_->apply(t, shifted, tmp);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += tmp[i];
}

std::optional<std::vector<double>> ShiftedOperator::linear_diagonal() const {
    auto d1 = a1_->linear_diagonal();
    auto d2 = a2_->linear_diagonal();
    if (!d1 || !d2) return std::nullopt;
    for (std::size_t i = 0; i < d1->size(); ++i) (*d1)[i] += (*d2)[i];
    return d1;
}

void ShiftedOperator::constrain(std::span<double> v) const {
    a1_->constrain(v);
    a2_->constrain(v);
}

AdditiveResult solve_additive(const GalerkinState& x0, OperatorPtr a1, OperatorPtr a2,
                              const StructuralConstants& sum_constants, const NoiseModel& model,
                              const SolveConfig& cfg, double dt_noise, std::uint64_t seed) {
    cfg.validate();
    sum_constants.validate();
    const auto& space = a1->space();
    space.require_conforming(x0.coeffs, "solve_additive");
    for (double x : x0.coeffs)
        if (!std::isfinite(x)) throw ContractViolation("solve_additive: initial state is not finite");

    auto y = std::make_shared<const NoisePath>(solve_auxiliary_y(*a1, model, cfg.t_end_request, dt_noise, seed));
    const ShiftedOperator shifted(a1, a2, sum_constants, y, model.shift_constant);

    AdditiveResult r;
    r.u = solve(shifted, x0, cfg);
    r.horizon = r.u.horizon;
    const auto& f = shifted.constants().f;
    if (f.kind() == TimeFunction::Kind::Constant) {
        r.f_tilde_times = {0.0};
        r.f_tilde_values = {f(0.0)};
    } else {
        r.f_tilde_times = f.times();
        r.f_tilde_values = f.values();
    }

    r.x = r.u;
    for (std::size_t i = 0; i < r.x.times.size(); ++i) {
        auto& st = r.x.states[i].coeffs;
        if (!y->zero) {
            const auto yt = y->at(r.x.times[i]);
            for (std::size_t k = 0; k < st.size(); ++k) st[k] += yt[k];
        }
        r.x.h_sq_series[i] = pairing(space, st, st);
        r.x.v_norm_series[i] = v_norm(space, st);
    }
    return r;
}

AdditiveResult solve_additive(const GalerkinState& x0, const EvolutionOperator& op, const NoiseModel& model,
                              const SolveConfig& cfg, double dt_noise, std::uint64_t seed) {
    const auto& split = op.split();
    if (!split) throw PreconditionFailure(op.name() + " does not declare a split A = A1 + A2");
    return solve_additive(x0, split->a1, split->a2, op.constants(), model, cfg, dt_noise, seed);
}

nlohmann::json EnsembleResult::histogram(double t_end, int bins) const {
    std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
    for (const auto& p : paths) {
        const double frac = std::clamp(p.attained / t_end, 0.0, 1.0);
        auto b = static_cast<std::size_t>(frac * bins);
        if (b == counts.size()) --b;
        ++counts[b];
    }
    std::vector<double> edges(static_cast<std::size_t>(bins) + 1);
    for (int i = 0; i <= bins; ++i) edges[static_cast<std::size_t>(i)] = t_end * i / bins;
    return {{"edges", edges}, {"counts", counts}};
}

nlohmann::json EnsembleResult::aggregate_json(double t_end) const {
    std::size_t ok = 0, completed = 0;
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& p : paths) {
        if (p.ok) ++ok;
        if (p.ok && p.termination == Termination::Completed) ++completed;
        if (!p.ok) failures.push_back({{"path", p.index}, {"seed", p.seed}, {"error", p.error}});
    }
    nlohmann::json terminations = nlohmann::json::object();
    for (const auto& p : paths)
        if (p.ok) terminations[to_string(p.termination)] = terminations.value(to_string(p.termination), 0) + 1;
    return {{"paths", paths.size()},
            {"succeeded", ok},
            {"completed", completed},
            {"terminations", terminations},
            {"failures", failures},
            {"checkpoints", checkpoints},
            {"mean_h_norm", mean_h_norm},
            {"var_h_norm", var_h_norm},
            {"samples", samples},
            {"attained_histogram", histogram(t_end)}};
}

EnsembleResult run_ensemble(const GalerkinState& x0, const EvolutionOperator& op, const NoiseModel& model,
                            const SolveConfig& cfg, const PathConfig& paths) {
    paths.validate(cfg);
    model.validate(op.space());
    const auto& split = op.split();
    if (!split) throw PreconditionFailure(op.name() + " does not declare a split A = A1 + A2");
    require_noise_generator(*split->a1);

    SolveConfig pc = cfg;
    if (pc.record_interval <= 0.0) pc.record_interval = cfg.t_end_request / 20.0;
    EnsembleResult r;
    r.paths.resize(static_cast<std::size_t>(paths.n_paths));
    detail::parallel_for(
        r.paths.size(),
        [&](std::size_t k) {
            auto& p = r.paths[k];
            p.index = k;
            p.seed = paths.seed + k;
            try {
                auto res = solve_additive(x0, split->a1, split->a2, op.constants(), model, pc, paths.dt_noise, p.seed);
                p.ok = true;
                p.termination = res.x.termination;
                p.attained = res.x.times.back();
                p.horizon = res.horizon.t0;
                p.x = std::move(res.x);
            } catch (const std::exception& e) {
                p.ok = false;
                p.error = e.what();
            }
        },
        static_cast<unsigned>(paths.workers));

    const auto n_checks = static_cast<std::size_t>(std::floor(cfg.t_end_request / pc.record_interval + 1e-9)) + 1;
    r.checkpoints.resize(n_checks);
    r.mean_h_norm.assign(n_checks, 0.0);
    r.var_h_norm.assign(n_checks, 0.0);
    r.samples.assign(n_checks, 0);
    for (std::size_t c = 0; c < n_checks; ++c) r.checkpoints[c] = static_cast<double>(c) * pc.record_interval;
    // Welford per checkpoint.
    for (const auto& p : r.paths) {
        if (!p.ok) continue;
        for (std::size_t i = 0; i < p.x.times.size(); ++i) {
            const double s = p.x.times[i] / pc.record_interval;
            const auto c = static_cast<std::size_t>(std::llround(s));
            if (c >= n_checks || p.x.times[i] != r.checkpoints[c]) continue;
            const double h = std::sqrt(p.x.h_sq_series[i]);
            const double n = static_cast<double>(++r.samples[c]);
            const double d = h - r.mean_h_norm[c];
            r.mean_h_norm[c] += d / n;
            r.var_h_norm[c] += d * (h - r.mean_h_norm[c]);
        }
    }
    for (std::size_t c = 0; c < n_checks; ++c)
        r.var_h_norm[c] = r.samples[c] > 1 ? r.var_h_norm[c] / static_cast<double>(r.samples[c] - 1)
                                           : std::numeric_limits<double>::quiet_NaN();
    return r;
}

}  // namespace gelfand
