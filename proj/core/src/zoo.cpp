#include "gelfand/zoo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "gelfand/errors.hpp"
#include "gelfand/random.hpp"
#include "gelfand/spectral_grid.hpp"

namespace gelfand {

namespace {

using SpacePtr = std::shared_ptr<const SpectralSpace>;

SpacePtr make_space(const SpaceDescriptor& d) { return std::make_shared<const SpectralSpace>(d); }

NormSpec linf() { return {NormSpec::Kind::WInf, 0.0}; }

std::vector<double> per_coefficient(const SpectralSpace& space, const std::function<double(double)>& symbol) {
    const auto nc = static_cast<std::size_t>(space.components());
    std::vector<double> d(space.size());
    for (std::size_t m = 0; m < space.dim(); ++m)
        for (std::size_t c = 0; c < nc; ++c) d[m * nc + c] = symbol(space.kappa_sq(m));
    return d;
}

void require_resolution(int resolution, int minimum, const char* what) {
    if (resolution < minimum) {
        std::ostringstream os;
        os << what << ": resolution " << resolution << " is below the dealiasing minimum " << minimum;
        throw ContractViolation(os.str());
    }
}

// Shared plumbing for scalar 1D pseudo-spectral operators with a diagonal linear part.
class ScalarPseudoSpectral : public EvolutionOperator {
public:
    ScalarPseudoSpectral(SpacePtr space, StructuralConstants c, std::string name, std::vector<double> diag,
                         int grid_points)
        : EvolutionOperator(space, std::move(c), std::move(name)),
          diag_(std::move(diag)),
          grid_(std::make_shared<const GridTransform>(*space, grid_points)) {}

    std::optional<std::vector<double>> linear_diagonal() const override { return diag_; }

    void apply(double, std::span<const double> v, std::span<double> out) const override {
        const auto n = nonlinear(v);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = diag_[i] * v[i] + n[i];
    }

    virtual std::vector<double> nonlinear(std::span<const double> v) const = 0;

protected:
    const GridTransform& grid() const { return *grid_; }

    std::vector<double> to_coeffs(std::span<const double> field, int derivative_order) const {
        std::vector<Complex> waves(space().waves().size());
        grid_->analyze(field, waves);
        for (std::size_t w = 0; w < waves.size(); ++w) {
            const double k = space().waves()[w].kappa[0];
            for (int o = 0; o < derivative_order; ++o) waves[w] *= Complex(0.0, k);
        }
        return from_spectrum(space(), waves);
    }

private:
    std::vector<double> diag_;
    std::shared_ptr<const GridTransform> grid_;
};

class PLaplaceOperator : public ScalarPseudoSpectral {
public:
    PLaplaceOperator(SpacePtr space, StructuralConstants c, double p, double nu, int grid_points)
        : ScalarPseudoSpectral(space, std::move(c), "p_laplace", std::vector<double>(space->size(), 0.0),
                               grid_points),
          p_(p),
          nu_(nu) {}

    std::optional<std::vector<double>> linear_diagonal() const override { return std::nullopt; }

    std::vector<double> nonlinear(std::span<const double> v) const override {
        const auto spec = to_spectrum(space(), v);
        auto gx = grid_values(space(), grid(), spec, 0, {1, 0, 0});
        for (auto& x : gx) x = nu_ * std::pow(std::abs(x), p_ - 2.0) * x;
        return to_coeffs(gx, 1);
    }

private:
    double p_;
    double nu_;
};

class SurfaceGrowthOperator : public ScalarPseudoSpectral {
public:
    using ScalarPseudoSpectral::ScalarPseudoSpectral;

    std::vector<double> nonlinear(std::span<const double> v) const override {
        const auto spec = to_spectrum(space(), v);
        auto vx = grid_values(space(), grid(), spec, 0, {1, 0, 0});
        for (auto& x : vx) x *= x;
        return to_coeffs(vx, 2);
    }
};

class CahnHilliardOperator : public ScalarPseudoSpectral {
public:
    CahnHilliardOperator(SpacePtr space, StructuralConstants c, std::vector<double> diag, int grid_points,
                         std::vector<double> phi)
        : ScalarPseudoSpectral(std::move(space), std::move(c), "cahn_hilliard", std::move(diag), grid_points),
          phi_(std::move(phi)) {}

    std::vector<double> nonlinear(std::span<const double> v) const override {
        if (phi_.size() <= 2) return std::vector<double>(v.size(), 0.0);
        const auto spec = to_spectrum(space(), v);
        auto u = grid_values(space(), grid(), spec, 0);
        for (auto& x : u) {
            // Horner on the terms of degree ≥ 2.
            double acc = 0.0;
            for (std::size_t j = phi_.size(); j-- > 2;) acc = acc * x + phi_[j];
            x = acc * x * x;
        }
        return to_coeffs(u, 2);
    }

private:
    std::vector<double> phi_;
};

class NseOperator : public EvolutionOperator {
public:
    NseOperator(SpacePtr space, StructuralConstants c, double nu, int grid_points, std::optional<Taming> tamed)
        : EvolutionOperator(space, std::move(c), tamed ? "tamed_nse" : "nse"),
          nu_(nu),
          tamed_(tamed),
          diag_(per_coefficient(*space, [nu](double k2) { return -nu * k2; })),
          grid_(std::make_shared<const GridTransform>(*space, grid_points)) {
        if (tamed_)
            tame_grid_ = std::make_shared<const GridTransform>(
                *space, fft_friendly(4 * space->descriptor().max_wavenumber + 1));
    }

    std::optional<std::vector<double>> linear_diagonal() const override { return diag_; }
    void constrain(std::span<double> v) const override { leray_project(space(), v); }

    void apply(double, std::span<const double> u, std::span<double> out) const override {
        auto n = transport(u);
        if (tamed_) {
            const auto tm = taming(u);
            for (std::size_t i = 0; i < n.size(); ++i) n[i] += tm[i];
        }
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = diag_[i] * u[i] + n[i];
    }

    std::vector<double> transport(std::span<const double> u) const {
        const auto spec = to_spectrum(space(), u);
        std::array<std::vector<double>, 3> vel;
        for (int a = 0; a < 3; ++a) vel[static_cast<std::size_t>(a)] = grid_values(space(), *grid_, spec, a);
        const std::size_t nw = space().waves().size();
        std::vector<Complex> out_spec(nw * 3);
        std::vector<Complex> waves(nw);
        std::vector<double> acc(grid_->grid_size());
        for (int a = 0; a < 3; ++a) {
            std::fill(acc.begin(), acc.end(), 0.0);
            for (int b = 0; b < 3; ++b) {
                std::array<int, 3> order{0, 0, 0};
                order[static_cast<std::size_t>(b)] = 1;
                const auto d = grid_values(space(), *grid_, spec, a, order);
                const auto& ub = vel[static_cast<std::size_t>(b)];
                for (std::size_t i = 0; i < acc.size(); ++i) acc[i] -= ub[i] * d[i];
            }
            grid_->analyze(acc, waves);
            for (std::size_t w = 0; w < nw; ++w) out_spec[w * 3 + static_cast<std::size_t>(a)] = waves[w];
        }
        auto coeffs = from_spectrum(space(), out_spec);
        leray_project(space(), coeffs);
        return coeffs;
    }

    std::vector<double> taming(std::span<const double> u) const {
        if (!tamed_) return std::vector<double>(u.size(), 0.0);
        const auto spec = to_spectrum(space(), u);
        std::array<std::vector<double>, 3> vel;
        for (int a = 0; a < 3; ++a) vel[static_cast<std::size_t>(a)] = grid_values(space(), *tame_grid_, spec, a);
        std::vector<double> factor(tame_grid_->grid_size());
        for (std::size_t i = 0; i < factor.size(); ++i) {
            const double r = vel[0][i] * vel[0][i] + vel[1][i] * vel[1][i] + vel[2][i] * vel[2][i];
            factor[i] = -taming_function(r, tamed_->level, nu_);
        }
        const std::size_t nw = space().waves().size();
        std::vector<Complex> out_spec(nw * 3);
        std::vector<Complex> waves(nw);
        std::vector<double> field(factor.size());
        for (std::size_t a = 0; a < 3; ++a) {
            for (std::size_t i = 0; i < field.size(); ++i) field[i] = factor[i] * vel[a][i];
            tame_grid_->analyze(field, waves);
            for (std::size_t w = 0; w < nw; ++w) out_spec[w * 3 + a] = waves[w];
        }
        auto coeffs = from_spectrum(space(), out_spec);
        leray_project(space(), coeffs);
        return coeffs;
    }

private:
    double nu_;
    std::optional<Taming> tamed_;
    std::vector<double> diag_;
    std::shared_ptr<const GridTransform> grid_;
    std::shared_ptr<const GridTransform> tame_grid_;
};

StructuralConstants heat_constants(double nu) {
    StructuralConstants c;
    c.alpha = 2.0;
    c.beta = 0.0;
    c.delta = 2.0 * nu;
    c.c_growth = nu;
    c.f = TimeFunction::constant(0.0);
    c.g = GrowthFunction::linear(2.0 * nu);
    return c;
}

StructuralConstants plaplace_constants(double p, double nu) {
    StructuralConstants c;
    c.alpha = p;
    c.beta = 0.0;
    c.delta = 2.0 * nu;
    c.c_growth = nu;
    c.f = TimeFunction::constant(0.0);
    c.g = GrowthFunction::linear(1e-6);
    return c;
}

// min over x ≥ 0 of c·x^γ − a·x, negated
double absorbed_linear(double a, double c, double gamma) {
    const double x = std::pow(a / (c * gamma), 1.0 / (gamma - 1.0));
    return a * x * (gamma - 1.0) / gamma;
}

// Linear part bounded per mode with 0.75 of the V-norm spent, the rest absorbs
// the quadratic term; the lowest mode leaves 0.75·x which c·x³ + f covers.
StructuralConstants surface_growth_constants() {
    StructuralConstants c;
    c.alpha = 2.0;
    c.beta = 1.0;
    c.delta = 0.5;
    c.c_growth = 2.0;
    const double cubic = 1.0;
    c.f = TimeFunction::constant(1.25 * absorbed_linear(0.75, cubic, 3.0));
    c.g = GrowthFunction::power(cubic, 3.0);
    const double m = 2.0;
    c.rho_form = FunctionalForm({{m, {NormSpec::Kind::WInf, 2.0}, 2.0}, {m, {NormSpec::Kind::WInf, 1.0}, 4.0}});
    c.eta_form = FunctionalForm({{m, {NormSpec::Kind::WInf, 2.0}, 2.0}, {m, {NormSpec::Kind::Sobolev, 3.0}, 2.0}});
    c.gamma_c3 = 2.0;
    c.c_c3 = 10.0;
    return c;
}

double polynomial(const std::vector<double>& c, double x) {
    double r = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * x + *it;
    return r;
}

// inf over ℝ of φ'; φ' has even degree and positive leading term.
double derivative_infimum(const std::vector<double>& phi) {
    std::vector<double> d;
    for (std::size_t j = 1; j < phi.size(); ++j) d.push_back(static_cast<double>(j) * phi[j]);
    if (d.empty()) return 0.0;
    if (d.size() == 1) return d[0];
    double radius = 1.0;
    for (std::size_t j = 0; j + 1 < d.size(); ++j) radius = std::max(radius, 1.0 + std::abs(d[j] / d.back()));
    constexpr int kScan = 4000;
    double best_x = -radius;
    double best = polynomial(d, best_x);
    for (int i = 1; i <= kScan; ++i) {
        const double x = -radius + 2.0 * radius * i / kScan;
        if (const double v = polynomial(d, x); v < best) {
            best = v;
            best_x = x;
        }
    }
    const double step = 2.0 * radius / kScan;
    double lo = best_x - step;
    double hi = best_x + step;
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 100; ++it) {
        const double x1 = hi - ratio * (hi - lo);
        const double x2 = lo + ratio * (hi - lo);
        if (polynomial(d, x1) < polynomial(d, x2))
            hi = x2;
        else
            lo = x1;
    }
    return std::min(best, polynomial(d, 0.5 * (lo + hi)));
}

// 2⟨A v, v⟩ = −2‖∂²v‖² − 2∫φ'(v)|∂v|² ≤ −‖v‖_V² + (1 + m²)‖v‖² with m = max(0, −inf φ').
// Monotonicity: |⟨φ(u) − φ(v), ∂²w⟩| ≤ L‖w‖‖∂²w‖ with L ≤ Σ j|φ_j| max(‖u‖∞, ‖v‖∞)^(j−1),
// squared by Cauchy–Schwarz over the n nonzero terms.
StructuralConstants cahn_hilliard_constants(const std::vector<double>& phi) {
    const int degree = phi.empty() ? 0 : static_cast<int>(phi.size()) - 1;
    const int p = std::max(degree, 1);
    const double m = std::max(0.0, -derivative_infimum(phi));
    StructuralConstants c;
    c.alpha = 2.0;
    c.beta = p - 1.0;
    c.delta = 1.0;
    c.c_growth = 2.0;
    c.g = GrowthFunction::linear(1.0 + m * m);
    int terms = 0;
    for (std::size_t j = 1; j < phi.size(); ++j) terms += phi[j] != 0.0;
    const double share = std::max(terms, 1) / 4.0;
    const double lipschitz0 = phi.size() > 1 ? std::abs(phi[1]) : 0.0;
    c.f = TimeFunction::constant(share * lipschitz0 * lipschitz0);
    std::vector<FunctionalForm::Term> rho;
    for (std::size_t j = 2; j < phi.size(); ++j) {
        if (phi[j] == 0.0) continue;
        const double lj = static_cast<double>(j) * std::abs(phi[j]);
        rho.push_back({share * lj * lj, linf(), 2.0 * (static_cast<double>(j) - 1.0)});
    }
    if (!rho.empty()) {
        c.rho_form = FunctionalForm(rho);
        c.eta_form = c.rho_form;
    }
    c.gamma_c3 = 3.0 * (p - 1.0) / 2.0;
    c.c_c3 = 10.0;
    return c;
}

StructuralConstants nse_constants(double nu, std::optional<Taming> tamed) {
    StructuralConstants c;
    c.alpha = 2.0;
    c.beta = 2.0;
    c.delta = nu;
    c.c_growth = 2.0;
    const NormSpec h{NormSpec::Kind::H, 0.0};
    const NormSpec l4{NormSpec::Kind::Lp, 4.0};
    if (tamed) {
        c.g = GrowthFunction::linear(4.0 * (tamed->level + 1.0) + 2.0 * nu);
        c.f = TimeFunction::constant(0.0);
        c.rho_form = FunctionalForm({{2.0, linf(), 2.0}, {2.0, l4, 8.0}});
        c.eta_form = FunctionalForm({{2.0, h, 4.0}, {2.0, l4, 8.0}});
        c.gamma_c3 = 8.0;
    } else {
        c.g = GrowthFunction::power(4.0, 3.0);
        c.f = TimeFunction::constant(1.25 * absorbed_linear(2.0 * nu, 4.0, 3.0));
        c.rho_form = FunctionalForm({{2.0, linf(), 2.0}});
        c.eta_form = FunctionalForm({{2.0, h, 4.0}});
        c.gamma_c3 = 4.0;
    }
    c.c_c3 = 10.0;
    return c;
}

}  // namespace

int retained_wavenumber(int resolution, int degree) {
    if (degree <= 1) return resolution / 2 - 1;
    return (resolution - 1) / (degree + 1);
}

OperatorPtr heat_plaplace(double p, double nu, int resolution) {
    if (!(p >= 2.0)) throw ContractViolation("p-Laplace requires p >= 2");
    if (!(nu > 0.0)) throw ContractViolation("viscosity must be positive");
    SpaceDescriptor d;
    d.geometry.spatial_dim = 1;
    if (p == 2.0) {
        require_resolution(resolution, 4, "heat");
        d.max_wavenumber = retained_wavenumber(resolution, 1);
        d.h_rule = {WeightRule::Kind::Sobolev, 0.0};
        d.v_rule = {WeightRule::Kind::Sobolev, 1.0};
        auto space = make_space(d);
        auto diag = per_coefficient(*space, [nu](double k2) { return -nu * k2; });
        return std::make_shared<DiagonalOperator>(space, std::move(diag), heat_constants(nu), "heat");
    }
    const int degree = static_cast<int>(std::ceil(p - 1.0));
    require_resolution(resolution, degree + 2, "p-Laplace");
    d.max_wavenumber = retained_wavenumber(resolution, degree);
    d.include_mean = false;
    d.h_rule = {WeightRule::Kind::Sobolev, 0.0};
    d.v_rule = {WeightRule::Kind::Homogeneous, 1.0};
    d.alpha = p;
    d.v_norm = VNormKind::GradientLp;
    auto space = make_space(d);
    return std::make_shared<PLaplaceOperator>(space, plaplace_constants(p, nu), p, nu, resolution);
}

OperatorPtr surface_growth_1d(int resolution) {
    require_resolution(resolution, 4, "surface growth");
    SpaceDescriptor d;
    d.geometry.spatial_dim = 1;
    d.max_wavenumber = retained_wavenumber(resolution, 2);
    d.include_mean = false;
    d.h_rule = {WeightRule::Kind::Homogeneous, 2.0};
    d.v_rule = {WeightRule::Kind::Homogeneous, 4.0};
    auto space = make_space(d);
    auto diag = per_coefficient(*space, [](double k2) { return -k2 * k2 + k2; });
    auto op = std::make_shared<SurfaceGrowthOperator>(space, surface_growth_constants(), "surface_growth", diag,
                                                      resolution);

    StructuralConstants c1;
    c1.alpha = 2.0;
    c1.beta = 0.0;
    c1.delta = 1.0;
    c1.c_growth = 1.0;
    c1.g = GrowthFunction::linear(1.0);
    auto a1 = std::make_shared<DiagonalOperator>(space, diag, c1, "surface_growth_linear");
    auto a2 = std::make_shared<SurfaceGrowthOperator>(space, surface_growth_constants(), "surface_growth_nonlinear",
                                                      std::vector<double>(space->size(), 0.0), resolution);
    op->set_split({a1, a2});
    return op;
}

OperatorPtr cahn_hilliard_1d(std::vector<double> phi, int resolution, bool neumann) {
    while (!phi.empty() && phi.back() == 0.0) phi.pop_back();
    const int degree = phi.empty() ? 0 : static_cast<int>(phi.size()) - 1;
    if (degree > 5) throw ContractViolation("Cahn-Hilliard: polynomial degree above 5 is not admissible in 1D");
    if (degree >= 2 && (degree % 2 == 0 || phi.back() < 0.0))
        throw ContractViolation("Cahn-Hilliard: phi' must be bounded below (odd degree, positive leading term)");
    require_resolution(resolution, std::max(4, degree + 2), "Cahn-Hilliard");
    SpaceDescriptor d;
    d.geometry.spatial_dim = 1;
    d.max_wavenumber = retained_wavenumber(resolution, degree);
    d.basis = neumann ? BasisKind::Cosine : BasisKind::Fourier;
    d.h_rule = {WeightRule::Kind::Sobolev, 0.0};
    d.v_rule = {WeightRule::Kind::Shifted, 2.0};
    auto space = make_space(d);
    const double a1 = phi.size() > 1 ? phi[1] : 0.0;
    auto diag = per_coefficient(*space, [a1](double k2) { return -k2 * k2 - a1 * k2; });
    return std::make_shared<CahnHilliardOperator>(space, cahn_hilliard_constants(phi), std::move(diag),
                                                  resolution, std::move(phi));
}

OperatorPtr nse_3d(double nu, int resolution, std::optional<Taming> tamed) {
    if (!(nu > 0.0)) throw ContractViolation("viscosity must be positive");
    if (tamed && !(tamed->level > 0.0)) throw ContractViolation("taming level must be positive");
    require_resolution(resolution, 4, "Navier-Stokes");
    SpaceDescriptor d;
    d.geometry.spatial_dim = 3;
    d.geometry.components = 3;
    d.max_wavenumber = retained_wavenumber(resolution, 2);
    d.h_rule = {WeightRule::Kind::Sobolev, 1.0};
    d.v_rule = {WeightRule::Kind::Sobolev, 2.0};
    auto space = make_space(d);
    return std::make_shared<NseOperator>(space, nse_constants(nu, tamed), nu, resolution, tamed);
}

double taming_function(double r, double level, double nu) {
    const double s = r - level;
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return s / nu;
    return (2.0 - s) * s * s / nu;
}

double taming_derivative(double r, double level, double nu) {
    const double s = r - level;
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0 / nu;
    return (4.0 - 3.0 * s) * s / nu;
}

void leray_project(const SpectralSpace& space, std::span<double> coeffs) {
    space.require_conforming(coeffs, "leray_project");
    if (space.components() != 3) throw ContractViolation("Leray projection needs three components");
    for (std::size_t m = 0; m < space.dim(); ++m) {
        const auto& w = space.waves()[space.modes()[m].wave];
        if (w.kappa_sq == 0.0) continue;
        double* c = &coeffs[m * 3];
        const double dot = w.kappa[0] * c[0] + w.kappa[1] * c[1] + w.kappa[2] * c[2];
        for (std::size_t a = 0; a < 3; ++a) c[a] -= w.kappa[a] * dot / w.kappa_sq;
    }
}

double max_divergence(const SpectralSpace& space, std::span<const double> coeffs) {
    space.require_conforming(coeffs, "max_divergence");
    if (space.components() != 3) throw ContractViolation("divergence needs three components");
    double worst = 0.0;
    for (std::size_t m = 0; m < space.dim(); ++m) {
        const auto& w = space.waves()[space.modes()[m].wave];
        const double* c = &coeffs[m * 3];
        worst = std::max(worst, std::abs(w.kappa[0] * c[0] + w.kappa[1] * c[1] + w.kappa[2] * c[2]));
    }
    return worst;
}

std::vector<double> surface_growth_nonlinearity(const EvolutionOperator& op, std::span<const double> v) {
    const auto* sg = dynamic_cast<const SurfaceGrowthOperator*>(&op);
    if (!sg) throw ContractViolation("not a surface growth operator");
    op.space().require_conforming(v, "surface_growth_nonlinearity");
    return sg->nonlinear(v);
}

std::vector<double> nse_transport(const EvolutionOperator& op, std::span<const double> u) {
    const auto* nse = dynamic_cast<const NseOperator*>(&op);
    if (!nse) throw ContractViolation("not a Navier-Stokes operator");
    op.space().require_conforming(u, "nse_transport");
    return nse->transport(u);
}

std::vector<double> nse_taming_term(const EvolutionOperator& op, std::span<const double> u) {
    const auto* nse = dynamic_cast<const NseOperator*>(&op);
    if (!nse) throw ContractViolation("not a Navier-Stokes operator");
    op.space().require_conforming(u, "nse_taming_term");
    return nse->taming(u);
}

namespace {

void reject_unknown(const nlohmann::json& params, const nlohmann::json& defaults, const std::string& name) {
    if (!params.is_object()) throw ConfigError(name + ": parameters must be an object");
    for (auto it = params.begin(); it != params.end(); ++it)
        if (!defaults.contains(it.key())) throw ConfigError(name + ": unknown parameter '" + it.key() + "'");
}

nlohmann::json merged(const nlohmann::json& params, const nlohmann::json& defaults) {
    nlohmann::json out = defaults;
    out.update(params);
    return out;
}

std::vector<ZooEntry> make_registry() {
    std::vector<ZooEntry> r;
    r.push_back({"heat", Globality::Global, "nu * Laplacian; exact constants delta = g slope = 2 nu",
                 [](const nlohmann::json& p) {
                     return heat_plaplace(2.0, p.at("nu").get<double>(), p.at("resolution").get<int>());
                 },
                 {{"nu", 1.0}, {"resolution", 32}}});
    r.push_back({"p_laplace", Globality::Global, "nu * div(|grad v|^(p-2) grad v), zero mean, monotone",
                 [](const nlohmann::json& p) {
                     return heat_plaplace(p.at("p").get<double>(), p.at("nu").get<double>(),
                                          p.at("resolution").get<int>());
                 },
                 {{"p", 4.0}, {"nu", 1.0}, {"resolution", 64}}});
    r.push_back({"surface_growth", Globality::Local, "-dx^4 - dx^2 + dx^2 (dx v)^2, zero mean; empirical constants",
                 [](const nlohmann::json& p) { return surface_growth_1d(p.at("resolution").get<int>()); },
                 {{"resolution", 64}}});
    r.push_back({"cahn_hilliard", Globality::Global, "-dx^4 v + dx^2 phi(v); empirical constants",
                 [](const nlohmann::json& p) {
                     return cahn_hilliard_1d(p.at("phi").get<std::vector<double>>(), p.at("resolution").get<int>(),
                                             p.at("neumann").get<bool>());
                 },
                 {{"phi", {0.0, -1.0, 0.0, 1.0}}, {"resolution", 64}, {"neumann", false}}});
    r.push_back({"nse", Globality::Local, "3D Navier-Stokes, H = H1, V = H2; empirical constants",
                 [](const nlohmann::json& p) {
                     return nse_3d(p.at("nu").get<double>(), p.at("resolution").get<int>());
                 },
                 {{"nu", 1.0}, {"resolution", 8}}});
    r.push_back({"tamed_nse", Globality::Global, "tamed 3D Navier-Stokes; empirical constants",
                 [](const nlohmann::json& p) {
                     return nse_3d(p.at("nu").get<double>(), p.at("resolution").get<int>(),
                                   Taming{p.at("N").get<double>()});
                 },
                 {{"nu", 1.0}, {"resolution", 8}, {"N", 1.0}}});
    return r;
}

}  // namespace

const std::vector<ZooEntry>& zoo_registry() {
    static const std::vector<ZooEntry> registry = make_registry();
    return registry;
}

const ZooEntry& zoo_entry(const std::string& name) {
    for (const auto& e : zoo_registry())
        if (e.name == name) return e;
    throw ConfigError("unknown operator '" + name + "'");
}

OperatorPtr build_operator(const std::string& name, const nlohmann::json& params) {
    const auto& e = zoo_entry(name);
    const nlohmann::json p = params.is_null() ? nlohmann::json::object() : params;
    reject_unknown(p, e.defaults, name);
    return e.build(merged(p, e.defaults));
}

OperatorPtr zero_operator(SpacePtr space, StructuralConstants constants) {
    auto diag = std::vector<double>(space->size(), 0.0);
    return std::make_shared<DiagonalOperator>(std::move(space), std::move(diag), std::move(constants), "zero");
}

OperatorPtr identity_operator(SpacePtr space, StructuralConstants constants) {
    auto diag = std::vector<double>(space->size(), 1.0);
    return std::make_shared<DiagonalOperator>(std::move(space), std::move(diag), std::move(constants), "identity");
}

OperatorPtr sign_operator(SpacePtr space, StructuralConstants constants) {
    return std::make_shared<FunctionOperator>(
        std::move(space),
        [](double, std::span<const double> v, std::span<double> out) {
            std::fill(out.begin(), out.end(), 0.0);
            out[0] = v[0] > 0.0 ? 1.0 : (v[0] < 0.0 ? -1.0 : 0.0);
        },
        std::move(constants), "sign");
}

GalerkinState initial_condition(const EvolutionOperator& op, const nlohmann::json& rule, std::uint64_t seed) {
    const auto& space = op.space();
    if (!rule.is_object()) throw ConfigError("initial: expected an object");
    for (auto it = rule.begin(); it != rule.end(); ++it)
        if (it.key() != "profile" && it.key() != "amplitude" && it.key() != "decay" && it.key() != "values")
            throw ConfigError("initial: unknown key '" + it.key() + "'");
    const auto profile = rule.value("profile", std::string("sine"));
    const double amp = rule.value("amplitude", 0.1);
    GalerkinState u = zero_state(space);
    if (profile == "zero") return u;
    if (profile == "coefficients") {
        u.coeffs = rule.at("values").get<std::vector<double>>();
        if (!space.conforms(u.coeffs))
            throw ConfigError("initial: expected " + std::to_string(space.size()) + " coefficients");
        return u;
    }
    const int dim = space.geometry().spatial_dim;
    if (profile == "sine" || profile == "cosine") {
        const bool sine = profile == "sine";
        u = from_function(space, [&](const std::array<double, 3>& x, std::span<double> out) {
            if (space.components() == 3 && dim == 3) {
                out[0] = amp * std::sin(x[0]) * std::cos(x[1]) * std::cos(x[2]);
                out[1] = -amp * std::cos(x[0]) * std::sin(x[1]) * std::cos(x[2]);
                out[2] = 0.0;
                return;
            }
            for (auto& o : out) o = amp * (sine ? std::sin(x[0]) : std::cos(x[0]));
        });
        op.constrain(u.coeffs);
        return u;
    }
    if (profile == "random") {
        const double decay = rule.value("decay", 2.0);
        const CounterRng rng(seed, 0x1417);
        const auto comps = static_cast<std::size_t>(space.components());
        for (std::size_t i = 0; i < u.coeffs.size(); ++i)
            u.coeffs[i] = rng.normal(i) * std::pow(1.0 + space.kappa_sq(i / comps), -0.5 * decay);
        op.constrain(u.coeffs);
        const double norm = h_norm(space, u.coeffs);
        if (norm > 0.0)
            for (auto& c : u.coeffs) c *= amp / norm;
        return u;
    }
    throw ConfigError("initial: unknown profile '" + profile + "'");
}

}  // namespace gelfand
