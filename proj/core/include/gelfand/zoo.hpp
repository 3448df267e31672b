#pragma once

// Worked operators on periodic boxes, discretized pseudo-spectrally.
//
// `resolution` is the number of collocation points per axis.  The retained
// wavenumber K is chosen so that the polynomial nonlinearity is computed
// without aliasing on that grid: K = ⌊(n−1)/(d+1)⌋ for a degree-d product,
// K = n/2 − 1 for purely linear operators.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gelfand/opcore.hpp"

namespace gelfand {

enum class Globality { Global, Local };

/// ν·div(|∇v|^{p−2}∇v) on the 1D torus; p = 2 is the heat operator ν∂².
OperatorPtr heat_plaplace(double p, double nu, int resolution);

/// −∂⁴v − ∂²v + ∂²((∂v)²) on the 1D torus, zero-mean.
OperatorPtr surface_growth_1d(int resolution);

/// −∂⁴v + ∂²φ(v) on the 1D torus, φ(x) = Σ_j phi[j] x^j (degree ≤ 5).
/// `neumann` selects the even (cosine) basis.
OperatorPtr cahn_hilliard_1d(std::vector<double> phi, int resolution, bool neumann = false);

struct Taming {
    double level = 1.0;  ///< N
};

/// νΔu − P[(u·∇)u] (− P[g_N(|u|²)u] when tamed) on the 3D torus, H = H¹, V = H².
OperatorPtr nse_3d(double nu, int resolution, std::optional<Taming> tamed = std::nullopt);

/// Smooth cut-off: 0 for r ≤ N, (r−N)/ν for r ≥ N+1, monotone cubic blend between.
double taming_function(double r, double level, double nu);
double taming_derivative(double r, double level, double nu);

/// û_k ↦ û_k − κ(κ·û_k)/|κ|² on a three-component space.
void leray_project(const SpectralSpace& space, std::span<double> coeffs);
/// max over waves of |κ·û_k|.
double max_divergence(const SpectralSpace& space, std::span<const double> coeffs);

/// The nonlinear parts, exposed for cross-checking against direct oracles.
std::vector<double> surface_growth_nonlinearity(const EvolutionOperator& op, std::span<const double> v);
std::vector<double> nse_transport(const EvolutionOperator& op, std::span<const double> u);
std::vector<double> nse_taming_term(const EvolutionOperator& op, std::span<const double> u);

struct ZooEntry {
    std::string name;
    Globality globality = Globality::Global;
    std::string notes;
    /// Builds the operator from a JSON parameter block (resolution and physical parameters).
    std::function<OperatorPtr(const nlohmann::json&)> build;
    /// Parameters used when none are given.
    nlohmann::json defaults;
};

const std::vector<ZooEntry>& zoo_registry();
const ZooEntry& zoo_entry(const std::string& name);
/// Builds a registered operator; unknown parameter keys are rejected.
OperatorPtr build_operator(const std::string& name, const nlohmann::json& params);

/// Synthetic operators for harness calibration.
OperatorPtr zero_operator(std::shared_ptr<const SpectralSpace> space, StructuralConstants constants = {});
OperatorPtr identity_operator(std::shared_ptr<const SpectralSpace> space, StructuralConstants constants = {});
/// A(v) = sign(v_0)·e_0: discontinuous along lines crossing v_0 = 0.
OperatorPtr sign_operator(std::shared_ptr<const SpectralSpace> space, StructuralConstants constants = {});

/// Initial data from a named rule:
///   {"profile": "sine" | "cosine" | "random" | "zero", "amplitude": a, "decay": d}
///   {"profile": "coefficients", "values": [...]}
/// "sine" is a·sin(x) in 1D and the Taylor–Green field a·(sin x cos y cos z, −cos x sin y cos z, 0) in 3D.
/// "random" draws Gaussian coefficients damped by (1+|κ|²)^(−d/2) from `seed`, applies the
/// operator's constraint and rescales to ‖u0‖_H = a.
GalerkinState initial_condition(const EvolutionOperator& op, const nlohmann::json& rule, std::uint64_t seed = 1);

/// Retained wavenumber for a resolution and the polynomial degree of the nonlinearity (1 = linear).
int retained_wavenumber(int resolution, int degree);

}  // namespace gelfand
