#include "gelfand/triple.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "gelfand/errors.hpp"
#include "gelfand/spectral_grid.hpp"

namespace gelfand {

double Geometry::volume() const {
    double v = 1.0;
    for (int a = 0; a < spatial_dim; ++a) v *= period[static_cast<std::size_t>(a)];
    return v;
}

double WeightRule::operator()(double kappa_sq) const {
    switch (kind) {
    case Kind::Sobolev: return std::pow(1.0 + kappa_sq, order);
    case Kind::Shifted: return 1.0 + std::pow(kappa_sq, order);
    case Kind::Homogeneous: return std::pow(kappa_sq, order);
    }
    return 0.0;
}

namespace {

const char* rule_name(WeightRule::Kind k) {
    switch (k) {
    case WeightRule::Kind::Sobolev: return "sobolev";
    case WeightRule::Kind::Shifted: return "shifted";
    case WeightRule::Kind::Homogeneous: return "homogeneous";
    }
    return "sobolev";
}

WeightRule::Kind rule_kind(const std::string& s) {
    if (s == "sobolev") return WeightRule::Kind::Sobolev;
    if (s == "shifted") return WeightRule::Kind::Shifted;
    if (s == "homogeneous") return WeightRule::Kind::Homogeneous;
    throw ConfigError("unknown weight rule '" + s + "'");
}

nlohmann::json rule_json(const WeightRule& r) { return {{"rule", rule_name(r.kind)}, {"order", r.order}}; }

WeightRule rule_from(const nlohmann::json& j) {
    return WeightRule{rule_kind(j.at("rule").get<std::string>()), j.at("order").get<double>()};
}

bool in_half_space(const Wavevector& k) {
    for (int v : k) {
        if (v > 0) return true;
        if (v < 0) return false;
    }
    return false;
}

}  // namespace

void to_json(nlohmann::json& j, const SpaceDescriptor& d) {
    const auto& g = d.geometry;
    nlohmann::json period = nlohmann::json::array();
    for (int a = 0; a < g.spatial_dim; ++a) period.push_back(g.period[static_cast<std::size_t>(a)]);
    j = {
        {"geometry", {{"spatial_dim", g.spatial_dim}, {"period", period}, {"components", g.components}}},
        {"max_wavenumber", d.max_wavenumber},
        {"basis", d.basis == BasisKind::Fourier ? "fourier" : "cosine"},
        {"include_mean", d.include_mean},
        {"h_weights", rule_json(d.h_rule)},
        {"v_weights", rule_json(d.v_rule)},
        {"alpha", d.alpha},
        {"v_norm", d.v_norm == VNormKind::Quadratic ? "quadratic" : "gradient_lp"},
        {"quadrature_points", d.quadrature_points},
    };
}

void from_json(const nlohmann::json& j, SpaceDescriptor& d) {
    const auto& g = j.at("geometry");
    d.geometry.spatial_dim = g.at("spatial_dim").get<int>();
    const auto& period = g.at("period");
    if (period.size() != static_cast<std::size_t>(d.geometry.spatial_dim))
        throw ConfigError("geometry.period must have spatial_dim entries");
    for (std::size_t a = 0; a < period.size(); ++a) d.geometry.period[a] = period[a].get<double>();
    d.geometry.components = g.at("components").get<int>();
    d.max_wavenumber = j.at("max_wavenumber").get<int>();
    d.basis = j.at("basis").get<std::string>() == "cosine" ? BasisKind::Cosine : BasisKind::Fourier;
    d.include_mean = j.at("include_mean").get<bool>();
    d.h_rule = rule_from(j.at("h_weights"));
    d.v_rule = rule_from(j.at("v_weights"));
    d.alpha = j.at("alpha").get<double>();
    d.v_norm = j.at("v_norm").get<std::string>() == "gradient_lp" ? VNormKind::GradientLp : VNormKind::Quadratic;
    d.quadrature_points = j.value("quadrature_points", 0);
}

SpectralSpace::SpectralSpace(SpaceDescriptor descriptor) : descriptor_(std::move(descriptor)) {
    const auto& g = descriptor_.geometry;
    if (g.spatial_dim < 1 || g.spatial_dim > 3) throw ContractViolation("spatial_dim must be 1, 2 or 3");
    if (g.components < 1) throw ContractViolation("components must be positive");
    if (descriptor_.max_wavenumber < 0) throw ContractViolation("max_wavenumber must be non-negative");
    if (!(descriptor_.alpha > 1.0)) throw ContractViolation("alpha must exceed 1");
    for (int a = 0; a < g.spatial_dim; ++a)
        if (!(g.period[static_cast<std::size_t>(a)] > 0.0)) throw ContractViolation("periods must be positive");

    const int kmax = descriptor_.max_wavenumber;
    std::vector<Wavevector> ks;
    const int r1 = g.spatial_dim >= 2 ? kmax : 0;
    const int r2 = g.spatial_dim >= 3 ? kmax : 0;
    for (int a = -kmax; a <= kmax; ++a)
        for (int b = -r1; b <= r1; ++b)
            for (int c = -r2; c <= r2; ++c) {
                Wavevector k{a, b, c};
                const bool zero = a == 0 && b == 0 && c == 0;
                if (zero ? descriptor_.include_mean : in_half_space(k)) ks.push_back(k);
            }
    auto ksq = [](const Wavevector& k) { return k[0] * k[0] + k[1] * k[1] + k[2] * k[2]; };
    std::sort(ks.begin(), ks.end(), [&](const Wavevector& x, const Wavevector& y) {
        if (ksq(x) != ksq(y)) return ksq(x) < ksq(y);
        return x > y;
    });

    for (const auto& k : ks) {
        WaveEntry w;
        w.k = k;
        for (int a = 0; a < g.spatial_dim; ++a) {
            const auto ua = static_cast<std::size_t>(a);
            w.kappa[ua] = 2.0 * std::numbers::pi * k[ua] / g.period[ua];
            w.kappa_sq += w.kappa[ua] * w.kappa[ua];
        }
        const bool zero = k == Wavevector{0, 0, 0};
        const std::size_t wi = waves_.size();
        w.cos_mode = modes_.size();
        modes_.push_back({k, zero ? ModePart::Mean : ModePart::Cos, wi});
        if (!zero && descriptor_.basis == BasisKind::Fourier) {
            w.sin_mode = modes_.size();
            modes_.push_back({k, ModePart::Sin, wi});
        }
        waves_.push_back(w);
    }
    if (modes_.empty()) throw ContractViolation("space has no modes");

    for (std::size_t m = 0; m < modes_.size(); ++m) {
        const double ks2 = waves_[modes_[m].wave].kappa_sq;
        const double hw = descriptor_.h_rule(ks2);
        const double vw = descriptor_.v_rule(ks2);
        if (!(hw > 0.0) || !(vw > 0.0) || !std::isfinite(hw) || !std::isfinite(vw)) {
            std::ostringstream os;
            os << "non-positive weight at mode " << m << " (exclude the mean mode for homogeneous rules)";
            throw ContractViolation(os.str());
        }
        h_weights_.push_back(hw);
        v_weights_.push_back(vw);
        c_emb_ = std::max(c_emb_, hw / vw);
        lookup_.emplace(std::make_pair(modes_[m].k, modes_[m].part), m);
    }

    int q = descriptor_.quadrature_points;
    if (q <= 0) q = fft_friendly(4 * kmax + 4);
    if (q < 2 * kmax + 1) throw ContractViolation("quadrature grid too coarse for the retained modes");
    quadrature_ = std::make_shared<const GridTransform>(*this, q);
}

std::optional<std::size_t> SpectralSpace::find_mode(const Wavevector& k, ModePart part) const {
    auto it = lookup_.find({k, part});
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
}

void SpectralSpace::require_conforming(std::span<const double> coeffs, const char* what) const {
    if (coeffs.size() != size()) {
        std::ostringstream os;
        os << what << ": coefficient vector of length " << coeffs.size() << " does not match space size " << size();
        throw ContractViolation(os.str());
    }
}

GalerkinState zero_state(const SpectralSpace& space, double time) {
    return GalerkinState{std::vector<double>(space.size(), 0.0), time};
}

namespace {

double weighted_sq(const SpectralSpace& space, std::span<const double> u, std::span<const double> w) {
    const auto nc = static_cast<std::size_t>(space.components());
    double s = 0.0;
    for (std::size_t m = 0; m < space.dim(); ++m) {
        double cm = 0.0;
        for (std::size_t c = 0; c < nc; ++c) cm += u[m * nc + c] * u[m * nc + c];
        s += w[m] * cm;
    }
    return s;
}

double gradient_lp_norm(const SpectralSpace& space, std::span<const double> u) {
    const auto& grid = space.quadrature();
    const auto spec = to_spectrum(space, u);
    const int d = space.geometry().spatial_dim;
    const auto nc = static_cast<std::size_t>(space.components());
    std::vector<double> grad_sq(grid.grid_size(), 0.0);
    std::vector<Complex> comp(space.waves().size());
    for (std::size_t c = 0; c < nc; ++c) {
        for (int a = 0; a < d; ++a) {
            std::array<int, 3> order{0, 0, 0};
            order[static_cast<std::size_t>(a)] = 1;
            for (std::size_t w = 0; w < comp.size(); ++w) comp[w] = spec[w * nc + c];
            auto vals = grid_values(space, grid, comp, 0, order);
            for (std::size_t i = 0; i < vals.size(); ++i) grad_sq[i] += vals[i] * vals[i];
        }
    }
    const double p = space.alpha();
    double s = 0.0;
    for (double g2 : grad_sq) s += std::pow(g2, 0.5 * p);
    return std::pow(s * grid.cell_volume(), 1.0 / p);
}

}  // namespace

double h_norm(const SpectralSpace& space, std::span<const double> u) {
    space.require_conforming(u, "h_norm");
    return std::sqrt(weighted_sq(space, u, space.h_weights()));
}

double v_norm(const SpectralSpace& space, std::span<const double> u) {
    space.require_conforming(u, "v_norm");
    if (space.quadratic_v()) return std::sqrt(weighted_sq(space, u, space.v_weights()));
    return gradient_lp_norm(space, u);
}

double pairing(const SpectralSpace& space, std::span<const double> w, std::span<const double> v) {
    space.require_conforming(w, "pairing");
    space.require_conforming(v, "pairing");
    const auto nc = static_cast<std::size_t>(space.components());
    const auto hw = space.h_weights();
    double s = 0.0;
    for (std::size_t m = 0; m < space.dim(); ++m) {
        double cm = 0.0;
        for (std::size_t c = 0; c < nc; ++c) cm += w[m * nc + c] * v[m * nc + c];
        s += hw[m] * cm;
    }
    return s;
}

double vstar_norm(const SpectralSpace& space, std::span<const double> w) {
    space.require_conforming(w, "vstar_norm");
    const auto nc = static_cast<std::size_t>(space.components());
    const auto hw = space.h_weights();
    const auto vw = space.v_weights();
    if (space.quadratic_v()) {
        double s = 0.0;
        for (std::size_t m = 0; m < space.dim(); ++m)
            for (std::size_t c = 0; c < nc; ++c) {
                const double x = w[m * nc + c];
                s += x * x * hw[m] * hw[m] / vw[m];
            }
        return std::sqrt(s);
    }

    // p-type V: supremum over a fixed candidate family.
    double best = 0.0;
    auto consider = [&](std::span<const double> v) {
        const double vn = v_norm(space, v);
        if (vn > 0.0) best = std::max(best, std::abs(pairing(space, w, v)) / vn);
    };
    std::vector<double> cand(w.begin(), w.end());
    consider(cand);
    for (std::size_t m = 0; m < space.dim(); ++m)
        for (std::size_t c = 0; c < nc; ++c) cand[m * nc + c] = w[m * nc + c] * hw[m] / vw[m];
    consider(cand);
    std::mt19937_64 gen(0x5eedULL);
    for (int trial = 0; trial < 32; ++trial) {
        for (std::size_t i = 0; i < cand.size(); ++i) {
            const double u1 = (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
            const double u2 = (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
            const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
            cand[i] = w[i] + 0.5 * std::abs(w[i]) * z;
        }
        consider(cand);
    }
    return best;
}

GalerkinState project(const SpectralSpace& target, const SpectralSpace& source, const GalerkinState& u) {
    source.require_conforming(u.coeffs, "project");
    if (target.components() != source.components() ||
        target.geometry().spatial_dim != source.geometry().spatial_dim)
        throw ContractViolation("project: incompatible geometry");
    for (int a = 0; a < target.geometry().spatial_dim; ++a) {
        const auto ua = static_cast<std::size_t>(a);
        if (target.geometry().period[ua] != source.geometry().period[ua])
            throw ContractViolation("project: incompatible periods");
    }
    const auto nc = static_cast<std::size_t>(target.components());
    GalerkinState out = zero_state(target, u.time);
    for (std::size_t m = 0; m < target.dim(); ++m) {
        const auto& mode = target.modes()[m];
        auto src = source.find_mode(mode.k, mode.part);
        if (!src) throw ContractViolation("project: source space does not contain the target modes");
        for (std::size_t c = 0; c < nc; ++c) out.coeffs[m * nc + c] = u.coeffs[*src * nc + c];
    }
    return out;
}

}  // namespace gelfand
