#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "gelfand/triple.hpp"

namespace gelfand {

using Complex = std::complex<double>;

/// Complex amplitudes û_k of the retained half-space waves, with
/// u(x) = Σ_{all k} û_k exp(iκ·x) and û_{-k} = conj(û_k).
/// Layout: spec[wave * components + c].
std::vector<Complex> to_spectrum(const SpectralSpace& space, std::span<const double> coeffs);
/// Inverse of to_spectrum; for the cosine basis the imaginary parts are dropped (L² projection).
std::vector<double> from_spectrum(const SpectralSpace& space, std::span<const Complex> spec);

/// FFT-backed synthesis/analysis between retained waves and an M^d collocation grid.
/// Immutable after construction; synthesize/analyze are safe to call concurrently.
class GridTransform {
public:
    GridTransform(const SpectralSpace& space, int points_per_axis);
    ~GridTransform();
    GridTransform(const GridTransform&) = delete;
    GridTransform& operator=(const GridTransform&) = delete;

    int points() const noexcept { return points_; }
    int spatial_dim() const noexcept { return dim_; }
    std::size_t grid_size() const noexcept { return grid_size_; }
    double cell_volume() const noexcept { return cell_volume_; }
    std::size_t wave_count() const noexcept { return plus_index_.size(); }

    /// Coordinates of grid point `index` (row-major, last axis fastest).
    std::array<double, 3> coordinate(std::size_t index) const;

    /// Real field with per-wave amplitudes `waves` (one component) on the grid.
    void synthesize(std::span<const Complex> waves, std::span<double> grid) const;
    /// Per-wave amplitudes of a real grid field, restricted to the retained waves.
    void analyze(std::span<const double> grid, std::span<Complex> waves) const;

private:
    int points_ = 0;
    int dim_ = 1;
    std::size_t grid_size_ = 0;
    double cell_volume_ = 0.0;
    std::array<double, 3> spacing_{};
    std::vector<std::size_t> plus_index_;
    std::vector<std::size_t> minus_index_;
    void* forward_ = nullptr;
    void* backward_ = nullptr;
};

/// Smallest grid size ≥ n whose prime factors are 2, 3 or 5.
int fft_friendly(int n);

/// Builds coefficients of a scalar (or vector) function by collocation on a
/// fine grid followed by projection onto the retained modes.
/// `fn(x, out)` writes `components` values at point x.
GalerkinState from_function(const SpectralSpace& space,
                            const std::function<void(const std::array<double, 3>&, std::span<double>)>& fn,
                            int oversample = 4);

/// Grid values of component c of the field, optionally differentiated:
/// derivative[a] is the order of ∂/∂x_a applied.
std::vector<double> grid_values(const SpectralSpace& space, const GridTransform& grid,
                                std::span<const Complex> spec, int component,
                                const std::array<int, 3>& derivative = {0, 0, 0});

}  // namespace gelfand
