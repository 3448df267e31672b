#pragma once

// Discrete Gelfand triple V ⊆ H ⊆ V* on a periodic box.
//
// The basis is the real trigonometric system, orthonormal in L²(Λ):
//   mean mode  1/sqrt(|Λ|)
//   cos mode   sqrt(2/|Λ|) cos(κ·x)
//   sin mode   sqrt(2/|Λ|) sin(κ·x)
// for wavevectors k in a half space (first non-zero component positive),
// with κ_a = 2π k_a / L_a.  H and V norms are diagonal in this basis with
// per-mode weights generated by a WeightRule.  Vector fields store
// `components` reals per mode, laid out as coeffs[mode * components + c].

#include <array>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace gelfand {

class GridTransform;

enum class ModePart : unsigned char { Mean, Cos, Sin };

using Wavevector = std::array<int, 3>;

struct Geometry {
    int spatial_dim = 1;
    std::array<double, 3> period{6.283185307179586, 6.283185307179586, 6.283185307179586};
    int components = 1;

    double volume() const;
};

/// Generates a per-mode weight from |κ|².
struct WeightRule {
    enum class Kind {
        Sobolev,      ///< (1 + |κ|²)^order
        Shifted,      ///< 1 + |κ|^(2·order)
        Homogeneous,  ///< |κ|^(2·order); requires the mean mode to be excluded
    };
    Kind kind = Kind::Sobolev;
    double order = 0.0;

    double operator()(double kappa_sq) const;
};

enum class VNormKind {
    Quadratic,   ///< sqrt(Σ v_weights·|c|²)
    GradientLp,  ///< (∫|∇u|^α dx)^(1/α) by grid quadrature
};

enum class BasisKind {
    Fourier,  ///< cos and sin modes
    Cosine,   ///< cos modes only (even functions, Neumann-compatible)
};

/// Everything needed to rebuild a SpectralSpace; serializable to JSON.
struct SpaceDescriptor {
    Geometry geometry;
    int max_wavenumber = 8;  ///< retained |k_a| ≤ max_wavenumber per axis
    BasisKind basis = BasisKind::Fourier;
    bool include_mean = true;
    WeightRule h_rule{WeightRule::Kind::Sobolev, 0.0};
    WeightRule v_rule{WeightRule::Kind::Sobolev, 1.0};
    double alpha = 2.0;
    VNormKind v_norm = VNormKind::Quadratic;
    int quadrature_points = 0;  ///< per axis; 0 selects 4K + 4
};

void to_json(nlohmann::json& j, const SpaceDescriptor& d);
void from_json(const nlohmann::json& j, SpaceDescriptor& d);

struct SpectralMode {
    Wavevector k{};
    ModePart part = ModePart::Mean;
    std::size_t wave = 0;  ///< index into SpectralSpace::waves()
};

/// One retained wavevector of the half space and the modes built on it.
struct WaveEntry {
    Wavevector k{};
    std::array<double, 3> kappa{};
    double kappa_sq = 0.0;
    std::optional<std::size_t> cos_mode;  ///< also the mean mode when k = 0
    std::optional<std::size_t> sin_mode;
};

class SpectralSpace {
public:
    explicit SpectralSpace(SpaceDescriptor descriptor);

    const SpaceDescriptor& descriptor() const noexcept { return descriptor_; }
    const Geometry& geometry() const noexcept { return descriptor_.geometry; }

    /// Number of basis modes n.
    std::size_t dim() const noexcept { return modes_.size(); }
    int components() const noexcept { return descriptor_.geometry.components; }
    /// Number of real coefficients, dim() * components().
    std::size_t size() const noexcept { return modes_.size() * static_cast<std::size_t>(components()); }

    const std::vector<SpectralMode>& modes() const noexcept { return modes_; }
    const std::vector<WaveEntry>& waves() const noexcept { return waves_; }
    std::span<const double> h_weights() const noexcept { return h_weights_; }
    std::span<const double> v_weights() const noexcept { return v_weights_; }
    double kappa_sq(std::size_t mode) const { return waves_[modes_[mode].wave].kappa_sq; }

    double alpha() const noexcept { return descriptor_.alpha; }
    bool quadratic_v() const noexcept { return descriptor_.v_norm == VNormKind::Quadratic; }
    /// max_k h_weights[k] / v_weights[k].
    double embedding_constant() const noexcept { return c_emb_; }

    std::optional<std::size_t> find_mode(const Wavevector& k, ModePart part) const;

    /// Transform used for norm quadrature and p-type V norms.
    const GridTransform& quadrature() const { return *quadrature_; }

    bool conforms(std::span<const double> coeffs) const noexcept { return coeffs.size() == size(); }
    void require_conforming(std::span<const double> coeffs, const char* what) const;

private:
    SpaceDescriptor descriptor_;
    std::vector<SpectralMode> modes_;
    std::vector<WaveEntry> waves_;
    std::vector<double> h_weights_;
    std::vector<double> v_weights_;
    double c_emb_ = 0.0;
    std::map<std::pair<Wavevector, ModePart>, std::size_t> lookup_;
    std::shared_ptr<const GridTransform> quadrature_;
};

struct GalerkinState {
    std::vector<double> coeffs;
    double time = 0.0;
};

GalerkinState zero_state(const SpectralSpace& space, double time = 0.0);

double h_norm(const SpectralSpace& space, std::span<const double> u);
double v_norm(const SpectralSpace& space, std::span<const double> u);
/// Exact discrete Riesz dual norm for quadratic V; for p-type V a sampled
/// supremum of |pairing(w, v)| / v_norm(v), hence a lower estimate.
double vstar_norm(const SpectralSpace& space, std::span<const double> w);
/// Σ h_weights[k]·w_k·v_k; the H inner product of two coefficient vectors.
double pairing(const SpectralSpace& space, std::span<const double> w, std::span<const double> v);

inline double h_norm(const SpectralSpace& s, const GalerkinState& u) { return h_norm(s, u.coeffs); }
inline double v_norm(const SpectralSpace& s, const GalerkinState& u) { return v_norm(s, u.coeffs); }

/// Truncates a state of `source` onto the modes of `target` (P_n).
GalerkinState project(const SpectralSpace& target, const SpectralSpace& source, const GalerkinState& u);

}  // namespace gelfand
