#pragma once

// Evolution operators A : [0,T] × V → V* on a SpectralSpace together with
// the structural constants they declare.

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gelfand/bihari.hpp"
#include "gelfand/triple.hpp"

namespace gelfand {

/// Non-negative f(t), stored as a constant, a step table or linear samples.
class TimeFunction {
public:
    enum class Kind { Constant, StepTable, Samples };

    static TimeFunction constant(double value);
    /// value[i] on [times[i], times[i+1]); the last value continues forever.
    static TimeFunction step_table(std::vector<double> times, std::vector<double> values);
    /// Piecewise linear through (times[i], values[i]); constant outside.
    static TimeFunction samples(std::vector<double> times, std::vector<double> values);

    double operator()(double t) const;
    /// ∫_0^t f.
    double integral(double t) const;
    Kind kind() const noexcept { return kind_; }
    /// Returns a copy with all values multiplied by s.
    TimeFunction scaled(double s) const;
    /// Largest stored value.
    double max_value() const;

    const std::vector<double>& times() const noexcept { return times_; }
    const std::vector<double>& values() const noexcept { return values_; }

private:
    TimeFunction(Kind kind, std::vector<double> times, std::vector<double> values);

    Kind kind_ = Kind::Constant;
    std::vector<double> times_;
    std::vector<double> values_;
};

void to_json(nlohmann::json& j, const TimeFunction& f);
TimeFunction time_function_from_json(const nlohmann::json& j);

/// Norm appearing in a functional form.
struct NormSpec {
    enum class Kind {
        H,       ///< norm of the space's H
        V,       ///< norm of the space's V
        Sobolev, ///< H^order = (Σ (1+|κ|²)^order |c|²)^{1/2}
        Lp,      ///< (∫|u|^p)^{1/p}, |·| Euclidean over components
        WInf,    ///< max over derivative multi-indices |a| ≤ order of max|∂^a u|
    };
    Kind kind = Kind::H;
    double order = 0.0;  ///< Sobolev or W^{m,∞} order, or p for Lp
};

/// Σ_i coefficient_i · ‖v‖_{norm_i}^{exponent_i}; used for ρ and η.
class FunctionalForm {
public:
    struct Term {
        double coefficient = 1.0;
        NormSpec norm;
        double exponent = 1.0;
    };

    FunctionalForm() = default;
    explicit FunctionalForm(std::vector<Term> terms);

    static FunctionalForm zero() { return {}; }

    double operator()(const SpectralSpace& space, std::span<const double> v) const;
    bool is_zero() const noexcept;
    /// Returns a copy with every coefficient multiplied by s.
    FunctionalForm scaled(double s) const;
    /// Sum of two forms (terms concatenated).
    FunctionalForm plus(const FunctionalForm& other) const;
    /// C with F(u+v) ≤ C·(F(u)+F(v)) implied by the triangle inequality.
    double subadditivity_constant() const;
    /// Human-readable formula, e.g. "1·‖v‖_{L∞}^2 + 1·‖v‖_{L4}^8".
    std::string describe() const;

    const std::vector<Term>& terms() const noexcept { return terms_; }

private:
    std::vector<Term> terms_;
};

void to_json(nlohmann::json& j, const FunctionalForm& f);
FunctionalForm functional_form_from_json(const nlohmann::json& j);

/// Evaluates a single norm of a coefficient vector.
double evaluate_norm(const SpectralSpace& space, std::span<const double> v, const NormSpec& norm);

struct StructuralConstants {
    double alpha = 2.0;
    double beta = 0.0;
    double delta = 1.0;
    double c_growth = 1.0;  ///< C of the growth condition
    TimeFunction f = TimeFunction::constant(0.0);
    GrowthFunction g = GrowthFunction::linear(1.0);
    FunctionalForm rho_form;
    FunctionalForm eta_form;
    double gamma_c3 = 0.0;  ///< ρ + η ≤ c_c3 (1 + ‖v‖_V^α)(1 + ‖v‖_H^gamma_c3)
    double c_c3 = 0.0;

    void validate() const;
};

void to_json(nlohmann::json& j, const StructuralConstants& c);
StructuralConstants constants_from_json(const nlohmann::json& j);

class EvolutionOperator;

/// Decomposition A = A₁ + A₂ used by the additive-noise reduction.
struct OperatorSplit {
    std::shared_ptr<const EvolutionOperator> a1;
    std::shared_ptr<const EvolutionOperator> a2;
};

/// A(t, v) projected on the space.  Subclasses implement apply(); eval()
/// adds the finiteness contract.  Instances are immutable and shareable.
class EvolutionOperator {
public:
    EvolutionOperator(std::shared_ptr<const SpectralSpace> space, StructuralConstants constants, std::string name);
    virtual ~EvolutionOperator() = default;

    const SpectralSpace& space() const noexcept { return *space_; }
    const std::shared_ptr<const SpectralSpace>& space_ptr() const noexcept { return space_; }
    const StructuralConstants& constants() const noexcept { return constants_; }
    const std::string& name() const noexcept { return name_; }

    /// Coordinates of P_n A(t, v) in the basis of the space.
    virtual void apply(double t, std::span<const double> v, std::span<double> out) const = 0;

    /// Per-coefficient diagonal L of the linear part, when A(v) = L v + N(t, v).
    virtual std::optional<std::vector<double>> linear_diagonal() const { return std::nullopt; }

    /// Projects a state onto the admissible subspace (e.g. divergence-free fields).
    virtual void constrain(std::span<double> v) const { (void)v; }

    /// apply() with a finiteness check; throws OperatorOverflow naming the first bad coefficient.
    std::vector<double> eval(double t, std::span<const double> v) const;
    void eval(double t, std::span<const double> v, std::span<double> out) const;

    double rho(std::span<const double> v) const { return constants_.rho_form(*space_, v); }
    double eta(std::span<const double> v) const { return constants_.eta_form(*space_, v); }

    const std::optional<OperatorSplit>& split() const noexcept { return split_; }
    void set_split(OperatorSplit split) { split_ = std::move(split); }

private:
    std::shared_ptr<const SpectralSpace> space_;
    StructuralConstants constants_;
    std::string name_;
    std::optional<OperatorSplit> split_;
};

using OperatorPtr = std::shared_ptr<const EvolutionOperator>;

/// A(v) = d ⊙ v with a fixed per-coefficient diagonal.
class DiagonalOperator : public EvolutionOperator {
public:
    DiagonalOperator(std::shared_ptr<const SpectralSpace> space, std::vector<double> diagonal,
                     StructuralConstants constants, std::string name = "diagonal");

    void apply(double t, std::span<const double> v, std::span<double> out) const override;
    std::optional<std::vector<double>> linear_diagonal() const override { return diagonal_; }

private:
    std::vector<double> diagonal_;
};

/// A₁ + A₂ on a common space; the linear diagonal is the sum when both declare one.
class SumOperator : public EvolutionOperator {
public:
    SumOperator(OperatorPtr a, OperatorPtr b, StructuralConstants constants, std::string name = "sum");

    void apply(double t, std::span<const double> v, std::span<double> out) const override;
    std::optional<std::vector<double>> linear_diagonal() const override;
    void constrain(std::span<double> v) const override;

private:
    OperatorPtr a_;
    OperatorPtr b_;
};

/// Wraps a callable; mainly for tests and synthetic operators.
class FunctionOperator : public EvolutionOperator {
public:
    using Fn = std::function<void(double, std::span<const double>, std::span<double>)>;

    FunctionOperator(std::shared_ptr<const SpectralSpace> space, Fn fn, StructuralConstants constants,
                     std::string name = "function", std::optional<std::vector<double>> diagonal = std::nullopt);

    void apply(double t, std::span<const double> v, std::span<double> out) const override;
    std::optional<std::vector<double>> linear_diagonal() const override { return diagonal_; }

private:
    Fn fn_;
    std::optional<std::vector<double>> diagonal_;
};

/// Linear diagonal of op, or the zero vector when op declares none.
std::vector<double> diagonal_or_zero(const EvolutionOperator& op);

}  // namespace gelfand
