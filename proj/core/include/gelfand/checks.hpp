#pragma once

// Randomized falsification harness for the structural hypotheses.  A check
// draws states from a Sampler, evaluates both sides of one inequality and
// records margins (right side minus left side).  Violations are data: a clean
// report is necessary evidence, never a proof.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gelfand/opcore.hpp"

namespace gelfand {

struct SamplerConfig {
    std::uint64_t seed = 1;
    double t_min = 0.0;
    double t_max = 1.0;
    double amplitude_min = 1e-2;  ///< log-uniform amplitude range
    double amplitude_max = 1e2;
};

void to_json(nlohmann::json& j, const SamplerConfig& s);
void from_json(const nlohmann::json& j, SamplerConfig& s);

/// Gaussian coefficients with standard deviation v_weights^{-1/2} times a
/// log-uniform amplitude, passed through the operator's constraint.  Draws
/// depend only on (seed, trial, slot).
class Sampler {
public:
    Sampler(const EvolutionOperator& op, SamplerConfig config);

    std::vector<double> state(std::uint64_t trial, unsigned slot) const;
    /// Two states for a difference inequality: independent on even trials, a
    /// nearby pair v2 = v1 + ε·z with ‖ε·z‖_H/‖v1‖_H in [1e-3, 1] on odd ones.
    std::pair<std::vector<double>, std::vector<double>> pair(std::uint64_t trial) const;
    double time(std::uint64_t trial) const;
    const SamplerConfig& config() const noexcept { return config_; }

private:
    const EvolutionOperator* op_;
    SamplerConfig config_;
};

struct Violation {
    std::uint64_t seed = 0;
    std::uint64_t trial = 0;
    double margin = 0.0;
    double t = 0.0;
};

struct CheckReport {
    std::string check;
    std::size_t trials = 0;
    std::vector<Violation> violations;
    double worst_margin = 0.0;
    std::uint64_t worst_trial = 0;
    double worst_t = 0.0;
    nlohmann::json constants_used;

    bool passed() const noexcept { return violations.empty(); }
};

void to_json(nlohmann::json& j, const CheckReport& r);

struct CheckOptions {
    std::size_t trials = 10000;
    SamplerConfig sampler;
    double rel_tol = 1e-10;  ///< margins above −rel_tol·(size of the terms) count as satisfied
    unsigned workers = 0;    ///< 0 selects the hardware concurrency
};

/// ⟨A(t,v1)−A(t,v2), v1−v2⟩ ≤ (f(t)+ρ(v1)+η(v2))‖v1−v2‖²_H.
CheckReport check_local_monotonicity(const EvolutionOperator& op, const StructuralConstants& c,
                                     const CheckOptions& opt = {});
/// 2⟨A(t,v),v⟩ ≤ −δ‖v‖_V^α + g(‖v‖²_H) + f(t).
CheckReport check_coercivity(const EvolutionOperator& op, const StructuralConstants& c, const CheckOptions& opt = {});
/// ‖A(t,v)‖_{V*} ≤ (f(t)^{(α−1)/α} + C‖v‖_V^{α−1})(1+‖v‖_H^β).
CheckReport check_growth(const EvolutionOperator& op, const StructuralConstants& c, const CheckOptions& opt = {});
/// Continuity of s ↦ ⟨A(t, v1+s·v2), v⟩ on [−1, 1], probed on a coarse and a fine grid.
CheckReport check_hemicontinuity(const EvolutionOperator& op, const CheckOptions& opt = {});
/// ρ(v)+η(v) ≤ c_c3 (1+‖v‖_V^α)(1+‖v‖_H^gamma_c3).
CheckReport check_uniqueness_growth(const EvolutionOperator& op, const StructuralConstants& c,
                                    const CheckOptions& opt = {});
/// F(u+v) ≤ K·(F(u)+F(v)) with K = form.subadditivity_constant().
CheckReport check_subadditivity(const EvolutionOperator& op, const FunctionalForm& form,
                                const CheckOptions& opt = {});

inline CheckReport check_local_monotonicity(const EvolutionOperator& op, const CheckOptions& opt = {}) {
    return check_local_monotonicity(op, op.constants(), opt);
}
inline CheckReport check_coercivity(const EvolutionOperator& op, const CheckOptions& opt = {}) {
    return check_coercivity(op, op.constants(), opt);
}
inline CheckReport check_growth(const EvolutionOperator& op, const CheckOptions& opt = {}) {
    return check_growth(op, op.constants(), opt);
}

enum class Hypothesis { LocalMonotonicity, Coercivity, Growth };

/// The operator's constants made deliberately too tight by `factor` (e.g. 1e-6)
/// in the terms that bound the given inequality.
StructuralConstants corrupted_constants(const StructuralConstants& c, Hypothesis which, double factor);

struct EstimateOptions {
    std::size_t budget = 2000;
    SamplerConfig sampler;
    double headroom = 1.1;
    double delta_floor = 1e-3;
    double delta_max = 1e3;
};

struct ConstantEstimate {
    StructuralConstants constants;
    bool feasible = false;
    std::size_t samples = 0;
    nlohmann::json metadata;
};

/// Fits δ, the amplitude of g, f, the ρ/η multipliers, C and c_c3 to sampled
/// inequalities.  `shape` fixes α, β, the kind of g (its amplitude is refitted),
/// unit ρ/η forms and gamma_c3.
ConstantEstimate estimate_constants(const EvolutionOperator& op, const StructuralConstants& shape,
                                    const EstimateOptions& opt = {});

}  // namespace gelfand
