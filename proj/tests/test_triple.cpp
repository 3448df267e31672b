#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "gelfand/errors.hpp"
#include "gelfand/spectral_grid.hpp"
#include "gelfand/triple.hpp"

using namespace gelfand;

namespace {

SpaceDescriptor line(int K, WeightRule h, WeightRule v, bool mean = true) {
    SpaceDescriptor d;
    d.max_wavenumber = K;
    d.h_rule = h;
    d.v_rule = v;
    d.include_mean = mean;
    return d;
}

std::vector<double> random_coeffs(const SpectralSpace& s, std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    std::vector<double> c(s.size());
    for (auto& x : c) x = n(rng);
    return c;
}

const WeightRule kL2{WeightRule::Kind::Sobolev, 0.0};
const WeightRule kH1{WeightRule::Kind::Sobolev, 1.0};

}  // namespace

TEST(HNorm, ZeroStateHasZeroNorm) {
    SpectralSpace s(line(6, kL2, kH1));
    EXPECT_EQ(h_norm(s, zero_state(s)), 0.0);
    EXPECT_EQ(v_norm(s, zero_state(s)), 0.0);
}

TEST(HNorm, UnitMassOnOneModeHasUnitNorm) {
    SpectralSpace s(line(6, kL2, kH1));
    auto u = zero_state(s);
    u.coeffs[*s.find_mode({3, 0, 0}, ModePart::Sin)] = 1.0;
    EXPECT_DOUBLE_EQ(h_norm(s, u), 1.0);
}

TEST(HNorm, WeightedSumOfTwoModes) {
    SpectralSpace s(line(2, {WeightRule::Kind::Homogeneous, 1.0}, {WeightRule::Kind::Homogeneous, 2.0}, false));
    auto u = zero_state(s);
    const auto a = *s.find_mode({1, 0, 0}, ModePart::Cos);
    const auto b = *s.find_mode({2, 0, 0}, ModePart::Cos);
    ASSERT_DOUBLE_EQ(s.h_weights()[a], 1.0);
    ASSERT_DOUBLE_EQ(s.h_weights()[b], 4.0);
    u.coeffs[a] = 1.0;
    u.coeffs[b] = 1.0;
    EXPECT_NEAR(h_norm(s, u), std::sqrt(5.0), 1e-15);
}

TEST(HNorm, DimensionMismatchIsAContractViolation) {
    SpectralSpace s(line(4, kL2, kH1));
    std::vector<double> wrong(s.size() + 1, 0.0);
    EXPECT_THROW(h_norm(s, wrong), ContractViolation);
    EXPECT_THROW(v_norm(s, wrong), ContractViolation);
    EXPECT_THROW(vstar_norm(s, wrong), ContractViolation);
    EXPECT_THROW(pairing(s, wrong, wrong), ContractViolation);
}

TEST(VNorm, H1WeightOnWavenumberOne) {
    SpectralSpace s(line(4, kL2, kH1));
    auto u = zero_state(s);
    u.coeffs[*s.find_mode({1, 0, 0}, ModePart::Cos)] = 1.0;
    EXPECT_NEAR(v_norm(s, u), std::sqrt(2.0), 1e-15);
}

TEST(VNorm, DominatesScaledHNorm) {
    SpectralSpace s(line(8, kL2, kH1));
    std::mt19937_64 rng(11);
    for (int i = 0; i < 1000; ++i) {
        const auto c = random_coeffs(s, rng);
        EXPECT_GE(v_norm(s, c) * (1.0 + 1e-14), h_norm(s, c) / std::sqrt(s.embedding_constant()));
    }
}

TEST(VNorm, GradientLpMatchesGridQuadrature) {
    auto d = line(6, kL2, kH1, false);
    d.alpha = 4.0;
    d.v_norm = VNormKind::GradientLp;
    SpectralSpace s(d);
    auto u = from_function(s, [](const std::array<double, 3>& x, std::span<double> o) { o[0] = std::sin(x[0]); });
    // ∫ cos⁴ over [0, 2π] = 3π/4.
    EXPECT_NEAR(v_norm(s, u), std::pow(3.0 * std::numbers::pi / 4.0, 0.25), 1e-12);
    EXPECT_FALSE(s.quadratic_v());
}

TEST(VStarNorm, ZeroIsZero) {
    SpectralSpace s(line(4, kL2, kH1));
    EXPECT_EQ(vstar_norm(s, zero_state(s).coeffs), 0.0);
}

TEST(VStarNorm, SingleModeWithVWeightFour) {
    SpectralSpace s(line(3, kL2, {WeightRule::Kind::Homogeneous, 1.0}, false));
    auto w = zero_state(s);
    const auto m = *s.find_mode({2, 0, 0}, ModePart::Sin);
    ASSERT_DOUBLE_EQ(s.v_weights()[m], 4.0);
    w.coeffs[m] = -3.0;
    EXPECT_NEAR(vstar_norm(s, w.coeffs), 1.5, 1e-15);
}

TEST(VStarNorm, CauchySchwarzIsSharpOnAlignedMode) {
    SpectralSpace s(line(5, {WeightRule::Kind::Sobolev, 1.0}, {WeightRule::Kind::Sobolev, 2.0}));
    auto w = zero_state(s);
    const auto m = *s.find_mode({4, 0, 0}, ModePart::Cos);
    w.coeffs[m] = 2.5;
    EXPECT_NEAR(std::abs(pairing(s, w.coeffs, w.coeffs)), vstar_norm(s, w.coeffs) * v_norm(s, w.coeffs), 1e-12);
}

TEST(VStarNorm, BoundsEveryPairing) {
    SpectralSpace s(line(8, kL2, kH1));
    std::mt19937_64 rng(5);
    for (int i = 0; i < 500; ++i) {
        const auto w = random_coeffs(s, rng);
        const auto v = random_coeffs(s, rng);
        EXPECT_LE(std::abs(pairing(s, w, v)), vstar_norm(s, w) * v_norm(s, v) * (1.0 + 1e-12));
    }
}

TEST(VStarNorm, AttainedBySampledSupremumOnSmallSpace) {
    SpectralSpace s(line(1, kL2, kH1));
    ASSERT_EQ(s.dim(), 3u);
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n;
    for (int trial = 0; trial < 20; ++trial) {
        const auto w = random_coeffs(s, rng);
        double sup = 0.0;
        for (int i = 0; i < 1000; ++i) {
            std::vector<double> v(s.size());
            for (std::size_t k = 0; k < v.size(); ++k) v[k] = n(rng) / std::sqrt(s.v_weights()[k]);
            sup = std::max(sup, std::abs(pairing(s, w, v)) / v_norm(s, v));
        }
        EXPECT_GE(sup, 0.95 * vstar_norm(s, w));
        EXPECT_LE(sup, vstar_norm(s, w) * (1.0 + 1e-12));
    }
}

TEST(Pairing, WithZeroIsZero) {
    SpectralSpace s(line(4, kL2, kH1));
    std::mt19937_64 rng(1);
    EXPECT_EQ(pairing(s, random_coeffs(s, rng), zero_state(s).coeffs), 0.0);
}

TEST(Pairing, SymmetricAndConsistentWithHNorm) {
    SpectralSpace s(line(6, {WeightRule::Kind::Sobolev, 1.0}, {WeightRule::Kind::Sobolev, 2.0}));
    std::mt19937_64 rng(2);
    for (int i = 0; i < 200; ++i) {
        const auto u = random_coeffs(s, rng);
        const auto v = random_coeffs(s, rng);
        EXPECT_DOUBLE_EQ(pairing(s, u, v), pairing(s, v, u));
        EXPECT_NEAR(pairing(s, u, u), h_norm(s, u) * h_norm(s, u), 1e-12 * pairing(s, u, u));
    }
}

TEST(Project, SameSpaceIsIdentity) {
    SpectralSpace s(line(6, kL2, kH1));
    std::mt19937_64 rng(3);
    GalerkinState u{random_coeffs(s, rng), 0.5};
    const auto p = project(s, s, u);
    EXPECT_EQ(p.coeffs, u.coeffs);
    EXPECT_EQ(p.time, u.time);
}

TEST(Project, RetainedSingleModeIsUnchanged) {
    SpectralSpace fine(line(8, kL2, kH1));
    SpectralSpace coarse(line(4, kL2, kH1));
    auto u = zero_state(fine);
    u.coeffs[*fine.find_mode({3, 0, 0}, ModePart::Sin)] = 0.7;
    const auto p = project(coarse, fine, u);
    EXPECT_EQ(p.coeffs[*coarse.find_mode({3, 0, 0}, ModePart::Sin)], 0.7);
    EXPECT_DOUBLE_EQ(h_norm(coarse, p), h_norm(fine, u));
}

TEST(Project, NormNonIncreasingAndIdempotent) {
    SpectralSpace fine(line(10, kL2, kH1));
    SpectralSpace mid(line(6, kL2, kH1));
    std::mt19937_64 rng(4);
    for (int i = 0; i < 1000; ++i) {
        GalerkinState u{random_coeffs(fine, rng), 0.0};
        const auto p = project(mid, fine, u);
        EXPECT_LE(h_norm(mid, p), h_norm(fine, u));
        EXPECT_EQ(project(mid, mid, p).coeffs, p.coeffs);
    }
}

TEST(Project, IncompatibleModeSetsAreRejected) {
    SpectralSpace fine(line(8, kL2, kH1));
    SpectralSpace coarse(line(4, kL2, kH1));
    EXPECT_THROW(project(fine, coarse, zero_state(coarse)), ContractViolation);
    auto d = line(4, kL2, kH1);
    d.geometry.spatial_dim = 2;
    SpectralSpace plane(d);
    EXPECT_THROW(project(plane, fine, zero_state(fine)), ContractViolation);
}

TEST(SpaceDescriptor, JsonRoundTripRebuildsTheSpace) {
    auto d = line(5, {WeightRule::Kind::Homogeneous, 2.0}, {WeightRule::Kind::Shifted, 4.0}, false);
    d.geometry.spatial_dim = 2;
    d.geometry.components = 2;
    d.basis = BasisKind::Fourier;
    nlohmann::json j = d;
    const auto back = j.get<SpaceDescriptor>();
    SpectralSpace a(d);
    SpectralSpace b(back);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t m = 0; m < a.dim(); ++m) {
        EXPECT_EQ(a.modes()[m].k, b.modes()[m].k);
        EXPECT_EQ(a.h_weights()[m], b.h_weights()[m]);
        EXPECT_EQ(a.v_weights()[m], b.v_weights()[m]);
    }
    EXPECT_EQ(nlohmann::json(back), j);
}

TEST(SpectralSpace, CosineBasisKeepsOnlyCosModes) {
    auto d = line(6, kL2, kH1);
    d.basis = BasisKind::Cosine;
    SpectralSpace s(d);
    EXPECT_EQ(s.dim(), 7u);
    for (const auto& m : s.modes()) EXPECT_NE(m.part, ModePart::Sin);
}

TEST(SpectralSpace, HomogeneousWeightsRequireExcludedMean) {
    EXPECT_THROW(SpectralSpace(line(4, {WeightRule::Kind::Homogeneous, 1.0}, kH1, true)), ContractViolation);
}

TEST(SpectralSpace, BasisIsOrthonormalUnderGridQuadrature) {
    SpectralSpace s(line(5, kL2, kH1));
    const auto& g = s.quadrature();
    std::vector<std::vector<double>> fields;
    for (std::size_t m = 0; m < s.dim(); ++m) {
        std::vector<double> e(s.size(), 0.0);
        e[m] = 1.0;
        const auto spec = to_spectrum(s, e);
        fields.push_back(grid_values(s, g, spec, 0));
    }
    for (std::size_t a = 0; a < s.dim(); ++a)
        for (std::size_t b = 0; b < s.dim(); ++b) {
            double ip = 0.0;
            for (std::size_t i = 0; i < g.grid_size(); ++i) ip += fields[a][i] * fields[b][i] * g.cell_volume();
            EXPECT_NEAR(ip, a == b ? 1.0 : 0.0, 1e-12);
        }
}
