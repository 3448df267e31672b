#include "gelfand/galerkin.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "gelfand/errors.hpp"

namespace gelfand {

std::string to_string(Termination t) {
    switch (t) {
        case Termination::Completed: return "completed";
        case Termination::HorizonReached: return "horizon_reached";
        case Termination::EnvelopeBreach: return "envelope_breach";
        case Termination::Overflow: return "overflow";
    }
    return "unknown";
}

std::string to_string(Integrator i) {
    return i == Integrator::ExplicitAdaptive ? "explicit-adaptive" : "linear-exponential-split";
}

void SolveConfig::validate() const {
    if (!(t_end_request > 0.0) || !std::isfinite(t_end_request)) throw ConfigError("t_end_request must be positive");
    if (!(dt_init > 0.0)) throw ConfigError("dt_init must be positive");
    if (!(dt_max >= 0.0)) throw ConfigError("dt_max must be non-negative");
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw ConfigError("tolerances must be positive");
    if (!(envelope_slack >= 0.0)) throw ConfigError("envelope_slack must be non-negative");
    if (record_every < 1) throw ConfigError("record_every must be at least 1");
    if (!(record_interval >= 0.0)) throw ConfigError("record_interval must be non-negative");
}

void to_json(nlohmann::json& j, const SolveConfig& c) {
    j = {{"t_end_request", c.t_end_request},
         {"dt_init", c.dt_init},
         {"dt_max", c.dt_max},
         {"rel_tol", c.rel_tol},
         {"abs_tol", c.abs_tol},
         {"integrator", to_string(c.integrator)},
         {"envelope_slack", c.envelope_slack},
         {"record_every", c.record_every},
         {"record_interval", c.record_interval},
         {"envelope_policy", c.envelope_policy == EnvelopePolicy::HardStop ? "hard_stop" : "warn_only"},
         {"max_steps", c.max_steps}};
}

void from_json(const nlohmann::json& j, SolveConfig& c) {
    static const std::array<const char*, 11> keys{"t_end_request", "dt_init",      "dt_max",         "rel_tol",
                                                  "abs_tol",       "integrator",   "envelope_slack", "record_every",
                                                  "record_interval", "envelope_policy", "max_steps"};
    if (!j.is_object()) throw ConfigError("solve: expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find_if(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; }) == keys.end())
            throw ConfigError("solve: unknown key '" + it.key() + "'");
    c.t_end_request = j.value("t_end_request", c.t_end_request);
    c.dt_init = j.value("dt_init", c.dt_init);
    c.dt_max = j.value("dt_max", c.dt_max);
    c.rel_tol = j.value("rel_tol", c.rel_tol);
    c.abs_tol = j.value("abs_tol", c.abs_tol);
    if (j.contains("integrator")) {
        const auto s = j.at("integrator").get<std::string>();
        if (s == "explicit-adaptive")
            c.integrator = Integrator::ExplicitAdaptive;
        else if (s == "linear-exponential-split")
            c.integrator = Integrator::LinearExponentialSplit;
        else
            throw ConfigError("solve: unknown integrator '" + s + "'");
    }
    c.envelope_slack = j.value("envelope_slack", c.envelope_slack);
    c.record_every = j.value("record_every", c.record_every);
    c.record_interval = j.value("record_interval", c.record_interval);
    if (j.contains("envelope_policy")) {
        const auto s = j.at("envelope_policy").get<std::string>();
        if (s == "hard_stop")
            c.envelope_policy = EnvelopePolicy::HardStop;
        else if (s == "warn_only")
            c.envelope_policy = EnvelopePolicy::WarnOnly;
        else
            throw ConfigError("solve: unknown envelope_policy '" + s + "'");
    }
    c.max_steps = j.value("max_steps", c.max_steps);
    c.validate();
}

namespace {

// Dormand–Prince 5(4).
constexpr std::array<double, 7> kC{0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr std::array<double, 7> kB{35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0};
constexpr std::array<double, 7> kE{71.0 / 57600,      0.0,         -71.0 / 16695, 71.0 / 1920,
                                   -17253.0 / 339200, 22.0 / 525, -1.0 / 40};

bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

class Stepper {
public:
    Stepper(const EvolutionOperator& op, const SolveConfig& cfg)
        : op_(op), cfg_(cfg), n_(op.space().size()), alpha_(op.constants().alpha) {
        if (cfg.integrator == Integrator::LinearExponentialSplit) {
            auto d = op.linear_diagonal();
            if (!d) throw PreconditionFailure("linear-exponential-split needs an operator with a diagonal linear part");
            lambda_ = std::move(*d);
        } else {
            lambda_.assign(n_, 0.0);
        }
        for (auto& k : k_) k.resize(n_);
    }

    // Stage right-hand side: A for the explicit pair, A − Λ for the Lawson form.
    void rhs(double t, const std::vector<double>& y, std::vector<double>& out) const {
        op_.eval(t, y, out);
        for (std::size_t i = 0; i < n_; ++i) out[i] -= lambda_[i] * y[i];
    }

    double phi(const std::vector<double>& y) const { return std::pow(v_norm(op_.space(), y), alpha_); }

    double decay(std::size_t i, double tau) const { return lambda_[i] == 0.0 ? 1.0 : std::exp(tau * lambda_[i]); }

    /// Attempts one step; on success fills y_new, z_increment and the error norm.
    bool attempt(double t, double h, const std::vector<double>& y, bool have_first, std::vector<double>& y_new,
                 double& dz, double& err) {
        if (!have_first) rhs(t, y, k_[0]);
        std::array<double, 7> phis{};
        phis[0] = phi(y);
        std::vector<double> stage(n_);
        for (int s = 1; s < 7; ++s) {
            for (std::size_t i = 0; i < n_; ++i) {
                double acc = decay(i, kC[s] * h) * y[i];
                for (int j = 0; j < s; ++j)
                    if (kA[s][j] != 0.0) acc += h * kA[s][j] * decay(i, (kC[s] - kC[j]) * h) * k_[j][i];
                stage[i] = acc;
            }
            if (!all_finite(stage)) return false;
            if (s == 6) y_new = stage;
            else phis[static_cast<std::size_t>(s)] = phi(stage);
            rhs(t + kC[s] * h, stage, k_[static_cast<std::size_t>(s)]);
        }
        dz = 0.0;
        for (int s = 0; s < 6; ++s) dz += h * kB[s] * phis[static_cast<std::size_t>(s)];
        double sum = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            double e = 0.0;
            for (int s = 0; s < 7; ++s)
                if (kE[s] != 0.0) e += kE[s] * decay(i, (1.0 - kC[s]) * h) * k_[s][i];
            e *= h;
            const double sc = cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
            sum += (e / sc) * (e / sc);
        }
        err = std::sqrt(sum / static_cast<double>(std::max<std::size_t>(n_, 1)));
        return std::isfinite(err) && std::isfinite(dz);
    }

    void accept() { k_[0] = k_[6]; }

private:
    const EvolutionOperator& op_;
    const SolveConfig& cfg_;
    std::size_t n_;
    double alpha_;
    std::vector<double> lambda_;
    std::array<std::vector<double>, 7> k_;
};

}  // namespace

Trajectory solve(const EvolutionOperator& op, const GalerkinState& u0, const SolveConfig& cfg) {
    cfg.validate();
    const auto& space = op.space();
    space.require_conforming(u0.coeffs, "solve");
    if (!all_finite(u0.coeffs)) throw ContractViolation("solve: initial state is not finite");
    const auto& c = op.constants();

    Trajectory traj;
    traj.delta = c.delta;
    const double k0 = pairing(space, u0.coeffs, u0.coeffs);
    const auto& f = c.f;
    traj.horizon = horizon(k0, [&f](double t) { return f.integral(t); }, c.g, cfg.t_end_request);
    const double t_target = std::min(cfg.t_end_request, traj.horizon.t0);
    const bool truncated = traj.horizon.t0 < cfg.t_end_request;

    auto env = [&](double t) { return envelope(traj.horizon, std::min(t, traj.horizon.t0)); };
    auto record = [&](double t, const std::vector<double>& y, double z) {
        traj.times.push_back(t);
        traj.states.push_back(GalerkinState{y, t});
        traj.h_sq_series.push_back(pairing(space, y, y));
        traj.v_norm_series.push_back(v_norm(space, y));
        traj.v_alpha_integral.push_back(z);
        traj.envelope_series.push_back(env(t));
    };

    std::vector<double> y = u0.coeffs;
    double z = 0.0;
    double t = 0.0;
    record(t, y, z);
    if (t_target <= 0.0) {
        traj.termination = Termination::HorizonReached;
        traj.message = "existence horizon is zero";
        return traj;
    }

    Stepper stepper(op, cfg);
    double h = std::min(cfg.dt_init, t_target);
    const double h_floor = 1e-14 * std::max(1.0, t_target);
    bool have_first = false;
    std::size_t since_record = 0;
    std::size_t next_slot = 1;
    std::vector<double> y_new(y.size());
    bool recorded_last = true;

    while (t < t_target) {
        if (traj.accepted_steps + traj.rejected_steps >= cfg.max_steps) {
            traj.termination = Termination::Overflow;
            traj.message = "step budget exhausted";
            break;
        }
        double stop = t_target;
        if (cfg.record_interval > 0.0) stop = std::min(stop, static_cast<double>(next_slot) * cfg.record_interval);
        if (cfg.dt_max > 0.0) h = std::min(h, cfg.dt_max);
        bool lands = false;
        if (t + h >= stop * (1.0 - 1e-13) || t + h >= stop) {
            h = stop - t;
            lands = true;
        }
        if (h < h_floor) {
            traj.termination = Termination::Overflow;
            traj.message = "step size underflow";
            break;
        }

        double dz = 0.0;
        double err = 0.0;
        bool ok = false;
        try {
            ok = stepper.attempt(t, h, y, have_first, y_new, dz, err);
        } catch (const OperatorOverflow&) {
            ok = false;
        }
        if (!ok) {
            have_first = false;
            ++traj.rejected_steps;
            h *= 0.25;
            continue;
        }
        if (err > 1.0) {
            have_first = true;
            ++traj.rejected_steps;
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            continue;
        }

        const double t_new = lands ? stop : t + h;
        stepper.accept();
        have_first = true;
        ++traj.accepted_steps;
        y.swap(y_new);
        z += dz;
        t = t_new;
        const double factor = err == 0.0 ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));
        const double h_used = h;
        h = h_used * factor;

        bool want = false;
        if (cfg.record_interval > 0.0) {
            if (lands && t == static_cast<double>(next_slot) * cfg.record_interval) {
                want = true;
                ++next_slot;
            }
        } else if (++since_record >= static_cast<std::size_t>(cfg.record_every)) {
            want = true;
            since_record = 0;
        }
        if (t >= t_target) want = true;

        const double h_sq = pairing(space, y, y);
        const double bound = env(t);
        const bool breach = h_sq + c.delta * z > bound * (1.0 + cfg.envelope_slack);
        if (breach) want = true;
        if (want) record(t, y, z);
        recorded_last = want;
        if (breach) {
            std::ostringstream os;
            os << "envelope exceeded at t=" << t << ": " << h_sq + c.delta * z << " > " << bound;
            if (cfg.envelope_policy == EnvelopePolicy::HardStop) {
                traj.termination = Termination::EnvelopeBreach;
                traj.message = os.str();
                return traj;
            }
            if (traj.warnings.size() < 100) traj.warnings.push_back(os.str());
        }
    }

    if (traj.termination == Termination::Overflow) {
        if (!recorded_last) record(t, y, z);
        return traj;
    }
    traj.termination = truncated ? Termination::HorizonReached : Termination::Completed;
    if (truncated) traj.message = "run truncated at the existence horizon";
    return traj;
}

namespace {

// ∫_a^b of the quadratic through (x0,f0), (x1,f1), (x2,f2).
double quadratic_integral(double x0, double x1, double x2, double f0, double f1, double f2, double a, double b) {
    const double d1 = (f1 - f0) / (x1 - x0);
    const double d2 = ((f2 - f1) / (x2 - x1) - d1) / (x2 - x0);
    auto prim = [&](double x) {
        const double s = x - x0;
        // ∫ (x−x0)(x−x1) = s³/3 − (x1−x0)s²/2
        return f0 * s + d1 * s * s / 2.0 + d2 * (s * s * s / 3.0 - (x1 - x0) * s * s / 2.0);
    };
    return prim(b) - prim(a);
}

std::vector<double> cumulative_simpson(const std::vector<double>& t, const std::vector<double>& f) {
    std::vector<double> out(t.size(), 0.0);
    if (t.size() < 2) return out;
    if (t.size() == 2) {
        out[1] = 0.5 * (f[0] + f[1]) * (t[1] - t[0]);
        return out;
    }
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (i % 2 == 0) {
            out[i] = out[i - 2] + quadratic_integral(t[i - 2], t[i - 1], t[i], f[i - 2], f[i - 1], f[i], t[i - 2], t[i]);
        } else if (i == 1) {
            out[1] = quadratic_integral(t[0], t[1], t[2], f[0], f[1], f[2], t[0], t[1]);
        } else {
            out[i] = out[i - 1] +
                     quadratic_integral(t[i - 2], t[i - 1], t[i], f[i - 2], f[i - 1], f[i], t[i - 1], t[i]);
        }
    }
    return out;
}

}  // namespace

double energy_residual(const EvolutionOperator& op, const Trajectory& traj) {
    const auto& space = op.space();
    std::vector<double> p(traj.times.size());
    for (std::size_t i = 0; i < p.size(); ++i)
        p[i] = pairing(space, op.eval(traj.times[i], traj.states[i].coeffs), traj.states[i].coeffs);
    const auto integral = cumulative_simpson(traj.times, p);
    double worst = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        worst = std::max(worst, std::abs(traj.h_sq_series[i] - traj.h_sq_series[0] - 2.0 * integral[i]));
    return worst;
}

DependenceReport continuous_dependence_check(const EvolutionOperator& op, const GalerkinState& u0,
                                             const GalerkinState& v0, const SolveConfig& cfg) {
    SolveConfig shared = cfg;
    if (shared.record_interval <= 0.0) shared.record_interval = cfg.t_end_request / 100.0;
    const auto a = solve(op, u0, shared);
    const auto b = solve(op, v0, shared);
    const auto& space = op.space();
    const auto& c = op.constants();

    DependenceReport rep;
    rep.termination_u = a.termination;
    rep.termination_v = b.termination;
    rep.identical = a.times == b.times;
    for (std::size_t i = 0; rep.identical && i < a.states.size(); ++i)
        rep.identical = a.states[i].coeffs == b.states[i].coeffs;

    auto diff_sq = [&](const std::vector<double>& x, const std::vector<double>& y) {
        std::vector<double> d(x.size());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = x[i] - y[i];
        return pairing(space, d, d);
    };
    const double d0 = diff_sq(a.states[0].coeffs, b.states[0].coeffs);
    double cum = 0.0;
    double prev_t = 0.0;
    double prev_s = 0.0;
    std::size_t j = 0;
    bool first = true;
    for (std::size_t i = 0; i < a.times.size(); ++i) {
        while (j < b.times.size() && b.times[j] < a.times[i]) ++j;
        if (j == b.times.size()) break;
        if (b.times[j] != a.times[i]) continue;
        const double t = a.times[i];
        const double s = c.f(t) + op.rho(a.states[i].coeffs) + op.eta(b.states[j].coeffs);
        if (!first) cum += 0.5 * (s + prev_s) * (t - prev_t);
        first = false;
        prev_t = t;
        prev_s = s;
        const double dsq = diff_sq(a.states[i].coeffs, b.states[j].coeffs);
        const double ratio = dsq == 0.0 ? 0.0 : (d0 > 0.0 ? dsq / d0 : std::numeric_limits<double>::infinity());
        const double bound = std::exp(cum);
        rep.times.push_back(t);
        rep.ratio.push_back(ratio);
        rep.bound.push_back(bound);
        rep.quotient.push_back(ratio / bound);
        rep.max_quotient = std::max(rep.max_quotient, ratio / bound);
    }
    return rep;
}

std::vector<ConvergenceRow> convergence_study(const OperatorBuilder& build, const InitialRule& u0,
                                              const std::vector<int>& resolutions, const SolveConfig& cfg) {
    std::vector<OperatorPtr> ops;
    std::vector<Trajectory> runs;
    for (int n : resolutions) {
        ops.push_back(build(n));
        runs.push_back(solve(*ops.back(), u0(ops.back()->space()), cfg));
    }
    std::vector<ConvergenceRow> rows;
    for (std::size_t i = 0; i < ops.size(); ++i) {
        ConvergenceRow r;
        r.resolution = resolutions[i];
        r.modes = ops[i]->space().dim();
        r.final_h_norm = h_norm(ops[i]->space(), runs[i].final_state());
        r.termination = runs[i].termination;
        r.difference = std::numeric_limits<double>::quiet_NaN();
        if (i + 1 < ops.size()) {
            const auto& fine = runs[i + 1].final_state();
            const auto coarse_of_fine = project(ops[i]->space(), ops[i + 1]->space(), fine);
            std::vector<double> d(coarse_of_fine.coeffs.size());
            for (std::size_t k = 0; k < d.size(); ++k) d[k] = runs[i].final_state().coeffs[k] - coarse_of_fine.coeffs[k];
            r.difference = h_norm(ops[i]->space(), d);
        }
        rows.push_back(r);
    }
    return rows;
}

}  // namespace gelfand
