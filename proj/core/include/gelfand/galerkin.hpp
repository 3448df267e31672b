#pragma once

// Adaptive integration of the projected system u' = P_n A(t, u) with
// monitoring of the a priori energy envelope
//   ‖u(t)‖²_H + δ ∫_0^t ‖u‖_V^α ≤ G⁻¹(G(‖u0‖²_H + ∫_0^{t0} f) + t).

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gelfand/bihari.hpp"
#include "gelfand/opcore.hpp"

namespace gelfand {

enum class Integrator {
    ExplicitAdaptive,        ///< Dormand–Prince 5(4)
    LinearExponentialSplit,  ///< same pair in Lawson form, exact on the diagonal linear part
};

enum class EnvelopePolicy { HardStop, WarnOnly };

enum class Termination { Completed, HorizonReached, EnvelopeBreach, Overflow };

std::string to_string(Termination t);
std::string to_string(Integrator i);

struct SolveConfig {
    double t_end_request = 1.0;
    double dt_init = 1e-3;
    double dt_max = 0.0;  ///< 0 means unbounded
    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
    Integrator integrator = Integrator::ExplicitAdaptive;
    double envelope_slack = 0.05;
    int record_every = 1;          ///< snapshot every n-th accepted step
    double record_interval = 0.0;  ///< > 0: snapshot exactly at multiples of this time instead
    EnvelopePolicy envelope_policy = EnvelopePolicy::HardStop;
    std::size_t max_steps = 50'000'000;

    void validate() const;
};

void to_json(nlohmann::json& j, const SolveConfig& c);
/// Strict: unknown keys raise ConfigError.
void from_json(const nlohmann::json& j, SolveConfig& c);

struct Trajectory {
    std::vector<double> times;
    std::vector<GalerkinState> states;
    std::vector<double> h_sq_series;
    std::vector<double> v_norm_series;
    std::vector<double> v_alpha_integral;
    std::vector<double> envelope_series;
    Termination termination = Termination::Completed;
    std::string message;
    HorizonEstimate horizon;
    double delta = 0.0;
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;
    std::vector<std::string> warnings;

    /// envelope − (h_sq + δ·∫‖u‖_V^α) at snapshot i.
    double margin(std::size_t i) const { return envelope_series[i] - (h_sq_series[i] + delta * v_alpha_integral[i]); }
    const GalerkinState& final_state() const { return states.back(); }
};

/// Computes the horizon from ‖u0‖²_H and the operator's f and g, then integrates to
/// min(t_end_request, t0).
Trajectory solve(const EvolutionOperator& op, const GalerkinState& u0, const SolveConfig& cfg);

/// max_i | ‖u(t_i)‖²_H − ‖u(0)‖²_H − 2∫_0^{t_i} ⟨A(s,u), u⟩ ds | over the snapshots,
/// with composite Simpson quadrature on the (possibly non-uniform) snapshot grid.
double energy_residual(const EvolutionOperator& op, const Trajectory& traj);

struct DependenceReport {
    std::vector<double> times;
    std::vector<double> ratio;     ///< ‖u1−u2‖²_H / ‖u1(0)−u2(0)‖²_H
    std::vector<double> bound;     ///< exp ∫_0^t (f + ρ(u1) + η(u2))
    std::vector<double> quotient;  ///< ratio / bound
    double max_quotient = 0.0;
    bool identical = false;  ///< both trajectories bitwise equal
    Termination termination_u = Termination::Completed;
    Termination termination_v = Termination::Completed;
};

/// Solves from u0 and v0 on the shared snapshot grid and compares the measured
/// divergence with the exponential stability bound.
DependenceReport continuous_dependence_check(const EvolutionOperator& op, const GalerkinState& u0,
                                             const GalerkinState& v0, const SolveConfig& cfg);

struct ConvergenceRow {
    int resolution = 0;
    std::size_t modes = 0;
    double final_h_norm = 0.0;
    double difference = 0.0;  ///< ‖u_n(T) − P_n u_next(T)‖_H; NaN for the last row
    Termination termination = Termination::Completed;
};

using OperatorBuilder = std::function<OperatorPtr(int resolution)>;
using InitialRule = std::function<GalerkinState(const SpectralSpace&)>;

std::vector<ConvergenceRow> convergence_study(const OperatorBuilder& build, const InitialRule& u0,
                                              const std::vector<int>& resolutions, const SolveConfig& cfg);

}  // namespace gelfand
