#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "gelfand/errors.hpp"
#include "gelfand/galerkin.hpp"
#include "gelfand/spectral_grid.hpp"
#include "gelfand/zoo.hpp"

using namespace gelfand;

namespace {

OperatorPtr heat(int n = 32) { return heat_plaplace(2.0, 1.0, n); }

SolveConfig config(double T, double rel_tol = 1e-8, Integrator integ = Integrator::ExplicitAdaptive) {
    SolveConfig c;
    c.t_end_request = T;
    c.rel_tol = rel_tol;
    c.abs_tol = 1e-14;
    c.integrator = integ;
    return c;
}

GalerkinState unit_mode(const SpectralSpace& s, int k, ModePart part, double a = 1.0) {
    auto u = zero_state(s);
    u.coeffs[*s.find_mode({k, 0, 0}, part)] = a;
    return u;
}

// δ‖v‖_V² ≤ g(‖v‖²_H) holds on the retained modes, so A ≡ 0 satisfies these.
StructuralConstants inert_constants(GrowthFunction g = GrowthFunction::linear(1.0)) {
    StructuralConstants c;
    c.delta = 1e-3;
    c.g = std::move(g);
    return c;
}

GalerkinState random_state(const EvolutionOperator& op, double amplitude, std::uint64_t seed = 1) {
    return initial_condition(op, {{"profile", "random"}, {"amplitude", amplitude}, {"decay", 2.0}}, seed);
}

void expect_envelope_respected(const Trajectory& traj, double slack) {
    for (std::size_t i = 0; i < traj.times.size(); ++i)
        EXPECT_LE(traj.h_sq_series[i] + traj.delta * traj.v_alpha_integral[i], traj.envelope_series[i] * (1 + slack))
            << "snapshot " << i;
}

}  // namespace

TEST(Solve, HeatModeDecaysExactly) {
    const auto op = heat();
    const auto& s = op->space();
    for (int k : {1, 3, 6}) {
        const auto traj = solve(*op, unit_mode(s, k, ModePart::Sin), config(1.0));
        ASSERT_EQ(traj.termination, Termination::Completed);
        const std::size_t m = *s.find_mode({k, 0, 0}, ModePart::Sin);
        for (std::size_t i = 0; i < traj.times.size(); ++i)
            EXPECT_NEAR(traj.states[i].coeffs[m], std::exp(-k * k * traj.times[i]), 1e-6);
    }
}

TEST(Solve, ZeroOperatorKeepsTheState) {
    const auto space = heat()->space_ptr();
    const auto op = zero_operator(space, inert_constants());
    const auto u0 = random_state(*heat(), 1.0);
    const auto traj = solve(*op, u0, config(1.0));
    EXPECT_EQ(traj.termination, Termination::Completed);
    for (const auto& st : traj.states) EXPECT_EQ(st.coeffs, u0.coeffs);
    EXPECT_EQ(energy_residual(*op, traj), 0.0);
}

TEST(Solve, TrajectoryInvariants) {
    const auto op = cahn_hilliard_1d({0.0, -1.0, 0.0, 1.0}, 32);
    const auto traj = solve(*op, random_state(*op, 0.5), config(0.2, 1e-8, Integrator::LinearExponentialSplit));
    ASSERT_EQ(traj.termination, Termination::Completed);
    EXPECT_EQ(traj.times.front(), 0.0);
    EXPECT_DOUBLE_EQ(traj.times.back(), 0.2);
    for (std::size_t i = 1; i < traj.times.size(); ++i) EXPECT_GT(traj.times[i], traj.times[i - 1]);
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const double h = h_norm(op->space(), traj.states[i]);
        EXPECT_NEAR(traj.h_sq_series[i], h * h, 1e-14 * (1 + h * h));
    }
}

TEST(Solve, SmallSurfaceGrowthDataReachesUnitTime) {
    const auto op = surface_growth_1d(32);
    const auto u0 = random_state(*op, 0.1);
    EXPECT_NEAR(h_norm(op->space(), u0), 0.1, 1e-14);
    const auto traj = solve(*op, u0, config(1.0, 1e-8, Integrator::LinearExponentialSplit));
    EXPECT_EQ(traj.termination, Termination::Completed);
    EXPECT_DOUBLE_EQ(traj.times.back(), 1.0);
    expect_envelope_respected(traj, 0.05);
}

TEST(Solve, EnvelopeHoldsForEveryZooOperator) {
    for (const auto& entry : zoo_registry()) {
        auto params = entry.defaults;
        if (params.contains("resolution") && entry.name.find("nse") == std::string::npos) params["resolution"] = 32;
        const auto op = entry.build(params);
        const auto u0 = random_state(*op, 0.2, 3);
        const auto integ = op->linear_diagonal() ? Integrator::LinearExponentialSplit : Integrator::ExplicitAdaptive;
        const auto traj = solve(*op, u0, config(0.1, 1e-7, integ));
        EXPECT_NE(traj.termination, Termination::EnvelopeBreach) << entry.name;
        EXPECT_NE(traj.termination, Termination::Overflow) << entry.name;
        expect_envelope_respected(traj, 0.05);
    }
}

TEST(Solve, BitwiseDeterministic) {
    const auto op = surface_growth_1d(32);
    const auto u0 = random_state(*op, 0.3);
    const auto cfg = config(0.3, 1e-8, Integrator::LinearExponentialSplit);
    const auto a = solve(*op, u0, cfg);
    const auto b = solve(*op, u0, cfg);
    ASSERT_EQ(a.times, b.times);
    for (std::size_t i = 0; i < a.states.size(); ++i) EXPECT_EQ(a.states[i].coeffs, b.states[i].coeffs);
    EXPECT_EQ(a.envelope_series, b.envelope_series);
}

TEST(Solve, HalvingTheToleranceMovesTheResultWithinTenTolerances) {
    const auto op = cahn_hilliard_1d({0.0, -1.0, 0.0, 1.0}, 32);
    const auto u0 = random_state(*op, 1.0, 5);
    for (auto integ : {Integrator::ExplicitAdaptive, Integrator::LinearExponentialSplit}) {
        const double tol = 1e-6;
        const auto a = solve(*op, u0, config(0.2, tol, integ));
        const auto b = solve(*op, u0, config(0.2, tol / 2, integ));
        EXPECT_LT(std::abs(h_norm(op->space(), a.final_state()) - h_norm(op->space(), b.final_state())), 10 * tol);
    }
}

TEST(Solve, StopsAtTheExistenceHorizon) {
    const auto op = zero_operator(heat()->space_ptr(), inert_constants(GrowthFunction::power(1.0, 2.0)));
    const auto u0 = unit_mode(op->space(), 1, ModePart::Cos);
    const auto traj = solve(*op, u0, config(2.0));
    EXPECT_EQ(traj.termination, Termination::HorizonReached);
    EXPECT_NEAR(traj.horizon.t0, 1.0, 1e-9);
    EXPECT_LE(traj.times.back(), traj.horizon.t0);
}

TEST(Solve, FalseConstantsBreachTheEnvelope) {
    StructuralConstants c;
    c.delta = 1.0;
    c.g = GrowthFunction::linear(1e-3);
    const auto op = identity_operator(heat()->space_ptr(), c);
    const auto u0 = unit_mode(op->space(), 0, ModePart::Mean);
    auto cfg = config(1.0);
    const auto stopped = solve(*op, u0, cfg);
    EXPECT_EQ(stopped.termination, Termination::EnvelopeBreach);
    EXPECT_LT(stopped.times.back(), 1.0);
    cfg.envelope_policy = EnvelopePolicy::WarnOnly;
    const auto warned = solve(*op, u0, cfg);
    EXPECT_EQ(warned.termination, Termination::Completed);
    EXPECT_FALSE(warned.warnings.empty());
}

TEST(Solve, OverflowKeepsTheLastFiniteSnapshot) {
    const auto base = heat();
    FunctionOperator blow(
        base->space_ptr(),
        [](double t, std::span<const double>, std::span<double> out) {
            std::fill(out.begin(), out.end(), t > 0.05 ? std::numeric_limits<double>::infinity() : 0.0);
        },
        base->constants());
    const auto traj = solve(blow, zero_state(blow.space()), config(1.0));
    EXPECT_EQ(traj.termination, Termination::Overflow);
    ASSERT_FALSE(traj.states.empty());
    for (double x : traj.final_state().coeffs) EXPECT_TRUE(std::isfinite(x));
    EXPECT_LT(traj.times.back(), 1.0);
}

TEST(Solve, SplitIntegratorNeedsADiagonal) {
    const auto base = heat();
    FunctionOperator plain(
        base->space_ptr(), [](double, std::span<const double>, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); },
        base->constants());
    EXPECT_THROW(solve(plain, zero_state(plain.space()), config(0.1, 1e-8, Integrator::LinearExponentialSplit)),
                 PreconditionFailure);
}

TEST(Solve, RecordIntervalSnapshotsOnMultiples) {
    const auto op = heat();
    auto cfg = config(1.0);
    cfg.record_interval = 0.25;
    const auto traj = solve(*op, unit_mode(op->space(), 2, ModePart::Sin), cfg);
    ASSERT_EQ(traj.times.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(traj.times[i], 0.25 * i, 1e-14);
}

TEST(EnergyResidual, HeatIsBelowMicro) {
    const auto op = heat();
    const auto traj = solve(*op, random_state(*op, 1.0), config(1.0));
    EXPECT_LE(energy_residual(*op, traj), 1e-6);
}

TEST(EnergyResidual, TamedNavierStokesIsBelowTenThousandth) {
    const auto op = nse_3d(1.0, 8, Taming{1.0});
    const auto u0 = initial_condition(*op, {{"profile", "sine"}, {"amplitude", 1.0}});
    auto cfg = config(0.2, 1e-6);
    cfg.record_interval = 0.005;
    const auto traj = solve(*op, u0, cfg);
    ASSERT_EQ(traj.termination, Termination::Completed);
    EXPECT_LE(energy_residual(*op, traj), 1e-4);
}

TEST(Dependence, IdenticalDataGiveIdenticalSolutions) {
    const auto op = surface_growth_1d(32);
    const auto u0 = random_state(*op, 0.2);
    const auto r = continuous_dependence_check(*op, u0, u0, config(0.3, 1e-8, Integrator::LinearExponentialSplit));
    EXPECT_TRUE(r.identical);
}

TEST(Dependence, HeatDifferenceDecaysBelowTheBound) {
    const auto op = heat();
    const auto u0 = random_state(*op, 1.0, 1);
    const auto v0 = random_state(*op, 1.0, 2);
    const auto r = continuous_dependence_check(*op, u0, v0, config(1.0));
    ASSERT_FALSE(r.identical);
    for (std::size_t i = 0; i < r.times.size(); ++i) {
        EXPECT_EQ(r.bound[i], 1.0);
        EXPECT_LE(r.ratio[i], 1.0 + 1e-12);
    }
    EXPECT_LE(r.max_quotient, 1.0 + 1e-12);
}

TEST(Dependence, SurfaceGrowthSmallPairWithinSlack) {
    const auto op = surface_growth_1d(32);
    const auto u0 = random_state(*op, 0.1, 1);
    const auto v0 = random_state(*op, 0.1, 2);
    const auto r = continuous_dependence_check(*op, u0, v0, config(0.5, 1e-9, Integrator::LinearExponentialSplit));
    EXPECT_EQ(r.termination_u, Termination::Completed);
    EXPECT_EQ(r.termination_v, Termination::Completed);
    EXPECT_LE(r.max_quotient, 1.05);
}

TEST(Convergence, HeatDifferencesAreAtMachineLevel) {
    const auto rows = convergence_study(
        [](int n) { return heat(n); },
        [](const SpectralSpace& s) {
            return from_function(s, [](const std::array<double, 3>& x, std::span<double> o) {
                o[0] = std::sin(x[0]) + 0.5 * std::cos(3 * x[0]);
            });
        },
        {16, 32, 64}, config(0.5, 1e-8, Integrator::LinearExponentialSplit));
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_LE(rows[0].difference, 1e-12);
    EXPECT_LE(rows[1].difference, 1e-12);
    EXPECT_TRUE(std::isnan(rows[2].difference));
}

TEST(Convergence, CahnHilliardGainsTenfoldPerDoubling) {
    const auto rows = convergence_study(
        [](int n) { return cahn_hilliard_1d({0.0, -1.0, 0.0, 1.0}, n); },
        [](const SpectralSpace& s) {
            return from_function(s, [](const std::array<double, 3>& x, std::span<double> o) {
                o[0] = 0.8 / (1.2 + std::cos(x[0]));
            });
        },
        {16, 32, 64, 128}, config(0.05, 1e-10, Integrator::LinearExponentialSplit));
    for (const auto& r : rows) ASSERT_EQ(r.termination, Termination::Completed);
    for (std::size_t i = 0; i + 2 < rows.size(); ++i)
        EXPECT_LE(rows[i + 1].difference, std::max(rows[i].difference / 10, 1e-11))
            << "resolution " << rows[i + 1].resolution;
}

TEST(SolveConfig, JsonRoundTripAndStrictKeys) {
    SolveConfig c;
    c.t_end_request = 0.7;
    c.integrator = Integrator::LinearExponentialSplit;
    c.envelope_policy = EnvelopePolicy::WarnOnly;
    c.record_interval = 0.1;
    nlohmann::json j = c;
    const auto back = j.get<SolveConfig>();
    EXPECT_EQ(nlohmann::json(back), j);
    j["stepsize"] = 1.0;
    EXPECT_THROW(j.get<SolveConfig>(), ConfigError);
}

TEST(SolveConfig, RejectsNonPositiveTolerances) {
    auto c = config(1.0);
    c.rel_tol = 0.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = config(-1.0);
    EXPECT_THROW(c.validate(), ConfigError);
}
