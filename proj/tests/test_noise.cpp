#include <cmath>

#include <gtest/gtest.h>

#include "gelfand/checks.hpp"
#include "gelfand/errors.hpp"
#include "gelfand/noise.hpp"
#include "gelfand/random.hpp"
#include "gelfand/spectral_grid.hpp"
#include "gelfand/zoo.hpp"

using namespace gelfand;

namespace {

OperatorPtr heat(int n = 16) { return heat_plaplace(2.0, 1.0, n); }

std::size_t mode(const SpectralSpace& s, int k, ModePart part) { return *s.find_mode({k, 0, 0}, part); }

struct Moments {
    double mean = 0.0;
    double var = 0.0;
};

Moments moments(const std::vector<double>& x) {
    Moments m;
    for (double v : x) m.mean += v;
    m.mean /= static_cast<double>(x.size());
    for (double v : x) m.var += (v - m.mean) * (v - m.mean);
    m.var /= static_cast<double>(x.size() - 1);
    return m;
}

SolveConfig split_config(double T) {
    SolveConfig c;
    c.t_end_request = T;
    c.integrator = Integrator::LinearExponentialSplit;
    return c;
}

GalerkinState small_sine(const SpectralSpace& s) {
    return from_function(s, [](const std::array<double, 3>& x, std::span<double> o) { o[0] = 0.1 * std::sin(x[0]); });
}

}  // namespace

TEST(Wiener, ZeroModelGivesZeroIncrements) {
    const auto op = heat();
    NoiseModel m;
    m.b_coeffs.assign(op->space().size(), 0.0);
    const auto w = sample_wiener(m, op->space(), 1e-3, 100, 3);
    for (double x : w.increments) EXPECT_EQ(x, 0.0);
}

TEST(Wiener, SameSeedSameTable) {
    const auto op = heat();
    const auto m = NoiseModel::power_law(op->space(), 0.3, 1.0);
    const auto a = sample_wiener(m, op->space(), 1e-3, 200, 11);
    const auto b = sample_wiener(m, op->space(), 1e-3, 200, 11);
    const auto c = sample_wiener(m, op->space(), 1e-3, 200, 12);
    EXPECT_EQ(a.increments, b.increments);
    EXPECT_NE(a.increments, c.increments);
    EXPECT_EQ(wiener_normal(5, 2, 9), wiener_normal(5, 2, 9));
}

TEST(Wiener, SingleModeVarianceWithinChiSquareBand) {
    const auto op = heat();
    const std::size_t i = mode(op->space(), 1, ModePart::Cos);
    const double b = 0.7;
    const double dt = 1e-3;
    const std::size_t steps = 10000;
    const auto m = NoiseModel::single(op->space(), i, b);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto w = sample_wiener(m, op->space(), dt, steps, seed);
        double sq = 0.0;
        for (std::size_t k = 0; k < steps; ++k) {
            sq += w.at(k, i) * w.at(k, i);
            for (std::size_t j = 0; j < w.size; ++j)
                if (j != i) ASSERT_EQ(w.at(k, j), 0.0);
        }
        const double chi = sq / (b * b * dt);
        EXPECT_LE(std::abs(chi - double(steps)), 3.0 * std::sqrt(2.0 * steps));
        EXPECT_NEAR(sq, b * b * dt * steps, 3.0 * b * b * dt * std::sqrt(2.0 * steps));
    }
}

TEST(NoiseModel, HilbertSchmidtNormUsesHWeights) {
    const auto op = surface_growth_1d(32);
    const auto& s = op->space();
    const auto m = NoiseModel::power_law(s, 0.5, 2.0);
    double expected = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) expected += s.h_weights()[k] * m.b_coeffs[k] * m.b_coeffs[k];
    EXPECT_DOUBLE_EQ(m.hs_norm_sq(s), expected);
    EXPECT_FALSE(m.is_zero());
}

TEST(NoiseModel, RejectsNegativeOrMisSizedCoefficients) {
    const auto op = heat();
    NoiseModel m;
    m.b_coeffs.assign(op->space().size(), 0.1);
    m.b_coeffs[2] = -0.1;
    EXPECT_THROW(m.validate(op->space()), ContractViolation);
    m.b_coeffs.assign(op->space().size() + 1, 0.1);
    EXPECT_THROW(m.validate(op->space()), ContractViolation);
}

TEST(NoiseModel, JsonAcceptsListsAndPowerLaws) {
    const auto op = heat();
    const auto& s = op->space();
    const auto m = NoiseModel::power_law(s, 0.2, 1.5);
    nlohmann::json j = m;
    const auto back = noise_model_from_json(j, s);
    EXPECT_EQ(back.b_coeffs, m.b_coeffs);
    const auto law = noise_model_from_json({{"b_coeffs", {{"scale", 0.2}, {"decay", 1.5}}}}, s);
    EXPECT_EQ(law.b_coeffs, m.b_coeffs);
    EXPECT_THROW(noise_model_from_json({{"b", 1.0}}, s), ConfigError);
}

TEST(PathConfig, NoiseGridMustNotBeCoarserThanFirstStep) {
    PathConfig p;
    SolveConfig c;
    c.dt_init = 1e-3;
    p.dt_noise = 1e-4;
    EXPECT_NO_THROW(p.validate(c));
    p.dt_noise = 1e-2;
    EXPECT_THROW(p.validate(c), ConfigError);
    nlohmann::json j = PathConfig{};
    EXPECT_EQ(nlohmann::json(j.get<PathConfig>()), j);
    j["threads"] = 2;
    EXPECT_THROW(j.get<PathConfig>(), ConfigError);
}

TEST(AuxiliaryProcess, ZeroNoiseGivesZeroPath) {
    const auto op = heat();
    NoiseModel m;
    m.b_coeffs.assign(op->space().size(), 0.0);
    const auto y = solve_auxiliary_y(*op, m, 1.0, 1e-3, 1);
    EXPECT_TRUE(y.zero);
    for (double x : y.at(0.37)) EXPECT_EQ(x, 0.0);
}

TEST(AuxiliaryProcess, RefusesGeneratorsOutsideTheSplitClass) {
    EXPECT_NO_THROW(require_noise_generator(*heat()));
    EXPECT_THROW(require_noise_generator(*surface_growth_1d(32)), PreconditionFailure);
    EXPECT_THROW(require_noise_generator(*nse_3d(1.0, 8)), PreconditionFailure);
}

TEST(AuxiliaryProcess, OrnsteinUhlenbeckMomentsOverThousandPaths) {
    const auto op = heat();
    const std::size_t i = mode(op->space(), 2, ModePart::Cos);
    const double b = 1.0;
    const double lambda = 4.0;
    const double t = 0.5;
    const auto m = NoiseModel::single(op->space(), i, b);
    std::vector<double> samples;
    for (std::uint64_t seed = 1; seed <= 1000; ++seed) samples.push_back(solve_auxiliary_y(*op, m, t, 1e-3, seed).at(t)[i]);
    const auto mo = moments(samples);
    const double var = b * b * (1.0 - std::exp(-2.0 * lambda * t)) / (2.0 * lambda);
    const double n = static_cast<double>(samples.size());
    EXPECT_LE(std::abs(mo.mean), 3.0 * std::sqrt(var / n));
    EXPECT_LE(std::abs(mo.var - var), 3.0 * var * std::sqrt(2.0 / (n - 1)));
}

TEST(AuxiliaryProcess, PathIsLinearInTheNoiseCoefficient) {
    const auto op = surface_growth_1d(32);
    const auto& a1 = *op->split()->a1;
    const auto m = NoiseModel::power_law(op->space(), 0.05, 2.0);
    auto m3 = m;
    for (auto& b : m3.b_coeffs) b *= 3.0;
    const auto y = solve_auxiliary_y(a1, m, 0.2, 1e-3, 4);
    const auto y3 = solve_auxiliary_y(a1, m3, 0.2, 1e-3, 4);
    ASSERT_TRUE(y.exact);
    for (std::size_t k = 0; k < y.states.size(); ++k)
        for (std::size_t j = 0; j < y.states[k].size(); ++j)
            EXPECT_NEAR(y3.states[k][j], 3.0 * y.states[k][j], 1e-13 * (1.0 + std::abs(y3.states[k][j])));
}

TEST(Additive, ZeroNoiseReproducesTheDeterministicSolve) {
    const auto op = surface_growth_1d(32);
    const auto x0 = small_sine(op->space());
    NoiseModel m;
    m.b_coeffs.assign(op->space().size(), 0.0);
    const auto cfg = split_config(0.3);
    const auto noisy = solve_additive(x0, *op, m, cfg, 1e-4, 1);
    const auto plain = solve(*op, x0, cfg);
    ASSERT_EQ(noisy.x.termination, plain.termination);
    const auto& a = noisy.x.final_state().coeffs;
    const auto& b = plain.final_state().coeffs;
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-12);
}

TEST(Additive, HeatMeanDecaysLikeTheDeterministicMode) {
    const auto op = heat();
    const auto& s = op->space();
    const std::size_t i = mode(s, 1, ModePart::Cos);
    auto x0 = zero_state(s);
    x0.coeffs[i] = 1.0;
    const auto a2 = zero_operator(op->space_ptr());
    const auto m = NoiseModel::single(s, i, 0.5);
    SolveConfig cfg;
    cfg.t_end_request = 0.5;
    cfg.rel_tol = 1e-6;
    std::vector<double> samples;
    for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
        const auto r = solve_additive(x0, op, a2, op->constants(), m, cfg, 1e-3, seed);
        ASSERT_EQ(r.x.termination, Termination::Completed);
        samples.push_back(r.x.final_state().coeffs[i]);
    }
    const auto mo = moments(samples);
    EXPECT_LE(std::abs(mo.mean - std::exp(-0.5)), 3.0 * std::sqrt(mo.var / samples.size()));
}

TEST(Additive, SameSeedSamePath) {
    const auto op = surface_growth_1d(32);
    const auto x0 = small_sine(op->space());
    const auto m = NoiseModel::power_law(op->space(), 0.05, 2.0);
    const auto a = solve_additive(x0, *op, m, split_config(0.1), 1e-4, 9);
    const auto b = solve_additive(x0, *op, m, split_config(0.1), 1e-4, 9);
    EXPECT_EQ(a.x.final_state().coeffs, b.x.final_state().coeffs);
    EXPECT_FALSE(a.f_tilde_values.empty());
    for (double f : a.f_tilde_values) EXPECT_GE(f, 0.0);
}

TEST(Additive, RequiresADeclaredSplit) {
    const auto op = nse_3d(1.0, 8);
    NoiseModel m;
    m.b_coeffs.assign(op->space().size(), 0.0);
    EXPECT_THROW(solve_additive(zero_state(op->space()), *op, m, SolveConfig{}, 1e-4, 1), PreconditionFailure);
}

TEST(ShiftedOperator, LocallyMonotoneAlongASampledPath) {
    const auto op = surface_growth_1d(32);
    const auto& split = *op->split();
    const auto m = NoiseModel::power_law(op->space(), 0.05, 2.0);
    auto y = std::make_shared<const NoisePath>(solve_auxiliary_y(*split.a1, m, 0.2, 1e-4, 7));
    const ShiftedOperator shifted(split.a1, split.a2, op->constants(), y, m.shift_constant);
    CheckOptions o;
    o.trials = 2000;
    o.sampler.t_max = 0.2;
    EXPECT_TRUE(check_local_monotonicity(shifted, o).passed());
}

TEST(Ensemble, NoisySurfaceGrowthMostlyReachesTheEnd) {
    const auto op = surface_growth_1d(32);
    const auto x0 = small_sine(op->space());
    const auto m = NoiseModel::power_law(op->space(), 0.05, 2.0);
    PathConfig pc;
    pc.n_paths = 100;
    pc.seed = 7;
    const auto e = run_ensemble(x0, *op, m, split_config(0.2), pc);
    int reached = 0;
    for (const auto& p : e.paths)
        if (p.ok && p.termination == Termination::Completed) ++reached;
    EXPECT_GE(reached, 95);
    const auto agg = e.aggregate_json(0.2);
    EXPECT_EQ(agg["paths"], 100);
    int total = 0;
    for (int c : agg["attained_histogram"]["counts"]) total += c;
    EXPECT_EQ(total, 100);
}

TEST(Ensemble, IndependentOfWorkerCount) {
    const auto op = heat();
    const auto m = NoiseModel::power_law(op->space(), 0.3, 1.0);
    auto x0 = zero_state(op->space());
    x0.coeffs[mode(op->space(), 1, ModePart::Sin)] = 1.0;
    const auto a2 = zero_operator(op->space_ptr());
    auto sum = std::make_shared<SumOperator>(op, a2, op->constants(), "heat_split");
    sum->set_split({op, a2});
    SolveConfig cfg;
    cfg.t_end_request = 0.2;
    PathConfig p1;
    p1.n_paths = 8;
    p1.dt_noise = 1e-4;
    p1.workers = 1;
    auto p3 = p1;
    p3.workers = 3;
    const auto a = run_ensemble(x0, *sum, m, cfg, p1);
    const auto b = run_ensemble(x0, *sum, m, cfg, p3);
    EXPECT_EQ(a.mean_h_norm, b.mean_h_norm);
    EXPECT_EQ(a.var_h_norm, b.var_h_norm);
    for (std::size_t k = 0; k < a.paths.size(); ++k) EXPECT_EQ(a.paths[k].seed, p1.seed + k);
}

TEST(CounterRng, PhiloxKnownAnswers) {
    using Block = std::array<std::uint32_t, 4>;
    EXPECT_EQ(philox4x32({0, 0, 0, 0}, {0, 0}), (Block{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
    EXPECT_EQ(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
              (Block{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
    EXPECT_EQ(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
              (Block{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(CounterRng, DrawsDependOnlyOnTheCounter) {
    CounterRng a(9, 3), b(9, 3), c(9, 4);
    std::vector<double> seq;
    for (int i = 0; i < 100; ++i) seq.push_back(a.next_normal());
    for (int i = 99; i >= 0; --i) EXPECT_EQ(b.normal(static_cast<std::uint64_t>(i)), seq[static_cast<std::size_t>(i)]);
    EXPECT_NE(c.normal(0), seq[0]);
    for (std::uint64_t i = 0; i < 10000; ++i) {
        const double u = a.uniform(i);
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}
