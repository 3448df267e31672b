#include "gelfand/spectral_grid.hpp"

#include <cmath>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "gelfand/errors.hpp"

namespace gelfand {

namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

std::size_t wrap(int k, int m) { return static_cast<std::size_t>(((k % m) + m) % m); }

}  // namespace

int fft_friendly(int n) {
    if (n < 1) n = 1;
    for (int m = n;; ++m) {
        int r = m;
        for (int p : {2, 3, 5})
            while (r % p == 0) r /= p;
        if (r == 1) return m;
    }
}

std::vector<Complex> to_spectrum(const SpectralSpace& space, std::span<const double> coeffs) {
    space.require_conforming(coeffs, "to_spectrum");
    const auto nc = static_cast<std::size_t>(space.components());
    const double vol = space.geometry().volume();
    const double mean_scale = 1.0 / std::sqrt(vol);
    const double wave_scale = 1.0 / std::sqrt(2.0 * vol);
    std::vector<Complex> spec(space.waves().size() * nc);
    for (std::size_t w = 0; w < space.waves().size(); ++w) {
        const auto& wave = space.waves()[w];
        const bool zero = space.modes()[*wave.cos_mode].part == ModePart::Mean;
        for (std::size_t c = 0; c < nc; ++c) {
            const double a = coeffs[*wave.cos_mode * nc + c];
            if (zero) {
                spec[w * nc + c] = Complex(a * mean_scale, 0.0);
            } else {
                const double b = wave.sin_mode ? coeffs[*wave.sin_mode * nc + c] : 0.0;
                spec[w * nc + c] = Complex(a, -b) * wave_scale;
            }
        }
    }
    return spec;
}

std::vector<double> from_spectrum(const SpectralSpace& space, std::span<const Complex> spec) {
    const auto nc = static_cast<std::size_t>(space.components());
    if (spec.size() != space.waves().size() * nc) throw ContractViolation("from_spectrum: size mismatch");
    const double vol = space.geometry().volume();
    const double mean_scale = std::sqrt(vol);
    const double wave_scale = std::sqrt(2.0 * vol);
    std::vector<double> coeffs(space.size(), 0.0);
    for (std::size_t w = 0; w < space.waves().size(); ++w) {
        const auto& wave = space.waves()[w];
        const bool zero = space.modes()[*wave.cos_mode].part == ModePart::Mean;
        for (std::size_t c = 0; c < nc; ++c) {
            const Complex z = spec[w * nc + c];
            if (zero) {
                coeffs[*wave.cos_mode * nc + c] = z.real() * mean_scale;
            } else {
                coeffs[*wave.cos_mode * nc + c] = z.real() * wave_scale;
                if (wave.sin_mode) coeffs[*wave.sin_mode * nc + c] = -z.imag() * wave_scale;
            }
        }
    }
    return coeffs;
}

GridTransform::GridTransform(const SpectralSpace& space, int points_per_axis)
    : points_(points_per_axis), dim_(space.geometry().spatial_dim) {
    const int kmax = space.descriptor().max_wavenumber;
    if (points_ < 2 * kmax + 1) throw ContractViolation("grid must resolve the retained wavenumbers");
    grid_size_ = 1;
    cell_volume_ = 1.0;
    for (int a = 0; a < dim_; ++a) {
        const auto ua = static_cast<std::size_t>(a);
        grid_size_ *= static_cast<std::size_t>(points_);
        spacing_[ua] = space.geometry().period[ua] / points_;
        cell_volume_ *= spacing_[ua];
    }
    for (const auto& w : space.waves()) {
        std::size_t plus = 0;
        std::size_t minus = 0;
        for (int a = 0; a < dim_; ++a) {
            const auto ua = static_cast<std::size_t>(a);
            plus = plus * static_cast<std::size_t>(points_) + wrap(w.k[ua], points_);
            minus = minus * static_cast<std::size_t>(points_) + wrap(-w.k[ua], points_);
        }
        plus_index_.push_back(plus);
        minus_index_.push_back(minus);
    }

    int n[3] = {points_, points_, points_};
    std::vector<Complex> scratch(grid_size_);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    std::lock_guard lock(planner_mutex());
    forward_ = fftw_plan_dft(dim_, n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    backward_ = fftw_plan_dft(dim_, n, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
}

GridTransform::~GridTransform() {
    std::lock_guard lock(planner_mutex());
    if (forward_) fftw_destroy_plan(static_cast<fftw_plan>(forward_));
    if (backward_) fftw_destroy_plan(static_cast<fftw_plan>(backward_));
}

std::array<double, 3> GridTransform::coordinate(std::size_t index) const {
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int a = dim_ - 1; a >= 0; --a) {
        const auto ua = static_cast<std::size_t>(a);
        x[ua] = static_cast<double>(index % static_cast<std::size_t>(points_)) * spacing_[ua];
        index /= static_cast<std::size_t>(points_);
    }
    return x;
}

void GridTransform::synthesize(std::span<const Complex> waves, std::span<double> grid) const {
    if (waves.size() != wave_count() || grid.size() != grid_size_)
        throw ContractViolation("synthesize: size mismatch");
    std::vector<Complex> buf(grid_size_, Complex(0.0, 0.0));
    for (std::size_t w = 0; w < waves.size(); ++w) {
        buf[plus_index_[w]] = waves[w];
        if (minus_index_[w] != plus_index_[w]) buf[minus_index_[w]] = std::conj(waves[w]);
    }
    auto* p = reinterpret_cast<fftw_complex*>(buf.data());
    fftw_execute_dft(static_cast<fftw_plan>(backward_), p, p);
    for (std::size_t i = 0; i < grid_size_; ++i) grid[i] = buf[i].real();
}

void GridTransform::analyze(std::span<const double> grid, std::span<Complex> waves) const {
    if (waves.size() != wave_count() || grid.size() != grid_size_)
        throw ContractViolation("analyze: size mismatch");
    std::vector<Complex> buf(grid.begin(), grid.end());
    auto* p = reinterpret_cast<fftw_complex*>(buf.data());
    fftw_execute_dft(static_cast<fftw_plan>(forward_), p, p);
    const double scale = 1.0 / static_cast<double>(grid_size_);
    for (std::size_t w = 0; w < waves.size(); ++w) waves[w] = buf[plus_index_[w]] * scale;
}

std::vector<double> grid_values(const SpectralSpace& space, const GridTransform& grid,
                                std::span<const Complex> spec, int component,
                                const std::array<int, 3>& derivative) {
    const auto nc = static_cast<std::size_t>(space.components());
    const auto nw = space.waves().size();
    const std::size_t stride = spec.size() == nw ? 1 : nc;
    const std::size_t offset = spec.size() == nw ? 0 : static_cast<std::size_t>(component);
    std::vector<Complex> waves(nw);
    for (std::size_t w = 0; w < nw; ++w) {
        Complex z = spec[w * stride + offset];
        for (std::size_t a = 0; a < 3; ++a)
            for (int o = 0; o < derivative[a]; ++o) z *= Complex(0.0, space.waves()[w].kappa[a]);
        waves[w] = z;
    }
    std::vector<double> out(grid.grid_size());
    grid.synthesize(waves, out);
    return out;
}

GalerkinState from_function(const SpectralSpace& space,
                            const std::function<void(const std::array<double, 3>&, std::span<double>)>& fn,
                            int oversample) {
    const int kmax = space.descriptor().max_wavenumber;
    const GridTransform grid(space, fft_friendly(std::max(2 * kmax + 2, oversample * (kmax + 1))));
    const auto nc = static_cast<std::size_t>(space.components());
    std::vector<std::vector<double>> comps(nc, std::vector<double>(grid.grid_size()));
    std::vector<double> val(nc);
    for (std::size_t i = 0; i < grid.grid_size(); ++i) {
        fn(grid.coordinate(i), val);
        for (std::size_t c = 0; c < nc; ++c) comps[c][i] = val[c];
    }
    std::vector<Complex> spec(space.waves().size() * nc);
    std::vector<Complex> waves(space.waves().size());
    for (std::size_t c = 0; c < nc; ++c) {
        grid.analyze(comps[c], waves);
        for (std::size_t w = 0; w < waves.size(); ++w) spec[w * nc + c] = waves[w];
    }
    return GalerkinState{from_spectrum(space, spec), 0.0};
}

}  // namespace gelfand
