#pragma once

// Additive noise: dX = A(t, X) dt + B dW with A = A₁ + A₂.
//
// The auxiliary process Y solves dY = A₁(t, Y) dt + B dW, Y(0) = 0.  The
// remainder u = X − Y solves the random equation u' = Ã(t, u) with
//   Ã(t, v) = A₁(t, v + Y) − A₁(t, Y) + A₂(t, v + Y),
// which is handed to the deterministic solver path by path.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "gelfand/galerkin.hpp"
#include "gelfand/opcore.hpp"

namespace gelfand {

/// Diagonal noise coefficient: B e_i = amplitude(t)·b_coeffs[i]·e_i on the L² basis.
struct NoiseModel {
    std::vector<double> b_coeffs;
    TimeFunction amplitude = TimeFunction::constant(1.0);
    /// Multiplier for the Y-dependent terms of the shifted coercivity constant.
    double shift_constant = 2.0;

    /// Σ h_w b_i² at unit amplitude.
    double hs_norm_sq(const SpectralSpace& space) const;
    bool is_zero() const;
    void validate(const SpectralSpace& space) const;

    /// b_i = scale·(1 + κ²)^(−decay/2) on every retained coefficient.
    static NoiseModel power_law(const SpectralSpace& space, double scale, double decay);
    static NoiseModel single(const SpectralSpace& space, std::size_t coefficient, double b);
};

void to_json(nlohmann::json& j, const NoiseModel& m);
/// `b_coeffs` may be an explicit list or {"scale": s, "decay": d}.
NoiseModel noise_model_from_json(const nlohmann::json& j, const SpectralSpace& space);

struct PathConfig {
    std::uint64_t seed = 1;
    double dt_noise = 1e-4;
    int n_paths = 1;
    int workers = 0;  ///< 0: hardware concurrency

    void validate(const SolveConfig& cfg) const;
};

void to_json(nlohmann::json& j, const PathConfig& c);
void from_json(const nlohmann::json& j, PathConfig& c);

/// Increments B(t_k)·ΔW_k on the uniform grid t_k = k·dt, row-major [step][coefficient].
struct WienerTable {
    double dt = 0.0;
    std::size_t steps = 0;
    std::size_t size = 0;
    std::vector<double> increments;

    double at(std::size_t step, std::size_t i) const { return increments[step * size + i]; }
};

/// Standard normal for (seed, coefficient, step); shared by every consumer of the noise.
double wiener_normal(std::uint64_t seed, std::size_t coefficient, std::size_t step);

WienerTable sample_wiener(const NoiseModel& model, const SpectralSpace& space, double dt, std::size_t steps,
                          std::uint64_t seed);

/// Y on the grid k·dt; evaluated between grid points by linear interpolation.
struct NoisePath {
    double dt = 0.0;
    std::vector<std::vector<double>> states;
    bool exact = false;  ///< integrating-factor update rather than Euler–Maruyama
    bool zero = false;   ///< Y ≡ 0

    std::vector<double> at(double t) const;
    double t_end() const { return dt * static_cast<double>(states.size() - 1); }
};

/// Refuses A₁ unless ρ ≡ 0, β = 0 and g is linear.
void require_noise_generator(const EvolutionOperator& a1);

NoisePath solve_auxiliary_y(const EvolutionOperator& a1, const NoiseModel& model, double t_end, double dt,
                            std::uint64_t seed);

/// Ã for one noise path.  Its constants are derived from those of A₁ + A₂:
/// ρ̃, η̃ by subadditivity, f̃ from the Y-dependent terms, g̃(x) = g(4x) + C̃x.
class ShiftedOperator : public EvolutionOperator {
public:
    ShiftedOperator(OperatorPtr a1, OperatorPtr a2, const StructuralConstants& sum_constants,
                    std::shared_ptr<const NoisePath> y, double shift_constant);

    void apply(double t, std::span<const double> v, std::span<double> out) const override;
    std::optional<std::vector<double>> linear_diagonal() const override;
    void constrain(std::span<double> v) const override;

    const NoisePath& path() const { return *y_; }

private:
    OperatorPtr a1_;
    OperatorPtr a2_;
    std::shared_ptr<const NoisePath> y_;
};

StructuralConstants shifted_constants(const EvolutionOperator& a1, const StructuralConstants& sum_constants,
                                      const NoisePath& y, double shift_constant);

struct AdditiveResult {
    Trajectory u;  ///< pathwise solve of u' = Ã(u); envelope and margins refer to u
    Trajectory x;  ///< X = u + Y at the same snapshots; norms recomputed for X
    HorizonEstimate horizon;
    std::vector<double> f_tilde_times;
    std::vector<double> f_tilde_values;
};

AdditiveResult solve_additive(const GalerkinState& x0, OperatorPtr a1, OperatorPtr a2,
                              const StructuralConstants& sum_constants, const NoiseModel& model,
                              const SolveConfig& cfg, double dt_noise, std::uint64_t seed);
/// Uses op.split() and op.constants().
AdditiveResult solve_additive(const GalerkinState& x0, const EvolutionOperator& op, const NoiseModel& model,
                              const SolveConfig& cfg, double dt_noise, std::uint64_t seed);

struct PathSummary {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    Termination termination = Termination::Completed;
    double attained = 0.0;
    double horizon = 0.0;
    Trajectory x;
};

struct EnsembleResult {
    std::vector<PathSummary> paths;
    std::vector<double> checkpoints;
    std::vector<double> mean_h_norm;
    std::vector<double> var_h_norm;
    std::vector<std::size_t> samples;  ///< paths contributing at each checkpoint

    /// Attained-horizon histogram over [0, t_end].
    nlohmann::json histogram(double t_end, int bins = 20) const;
    nlohmann::json aggregate_json(double t_end) const;
};

/// Path k uses the stream seed + k.  Snapshots are taken on `cfg.record_interval`
/// (t_end / 20 when unset) so that all paths share checkpoints.
EnsembleResult run_ensemble(const GalerkinState& x0, const EvolutionOperator& op, const NoiseModel& model,
                            const SolveConfig& cfg, const PathConfig& paths);

}  // namespace gelfand
