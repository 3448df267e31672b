#pragma once

// Bihari-inequality machinery.
//
//   G(x) = ∫_{x0}^{x} ds / g(s),
//   p(t) ≤ G⁻¹(G(K) + ∫_0^t q)           while the argument stays below sup G,
//   T0   < sup G − G(K + ∫_0^{T0} f)      (local existence horizon).
//
// Linear and Power growth have closed forms; Tabulated growth and the
// cross-checks go through adaptive quadrature and monotone bisection.

#include <functional>
#include <limits>
#include <variant>
#include <vector>

#include <json.hpp>

namespace gelfand {

/// Non-decreasing continuous g : [0, ∞) → [0, ∞) with g(x) > 0 for x > 0.
class GrowthFunction {
public:
    struct Linear {
        double c = 1.0;
    };
    struct Power {
        double c0 = 1.0;
        double gamma = 1.0;
    };
    /// Piecewise linear through (x[i], y[i]); power-law head and tail
    /// extrapolation fitted to the first and last two samples.
    struct Tabulated {
        std::vector<double> x;
        std::vector<double> y;
    };
    using Variant = std::variant<Linear, Power, Tabulated>;

    static GrowthFunction linear(double c);
    static GrowthFunction power(double c0, double gamma);
    static GrowthFunction tabulated(std::vector<double> x, std::vector<double> y);
    /// Samples fn on a geometric grid of n points in [x_lo, x_hi].
    static GrowthFunction tabulate(const std::function<double(double)>& fn, double x_lo, double x_hi, int n);

    double operator()(double x) const;
    const Variant& variant() const noexcept { return v_; }

    /// Exponent γ with g(x) ~ x^γ as x → ∞; sup G is finite iff γ > 1.
    double tail_exponent() const;
    /// Whether ∫_0^ε ds/g(s) is finite.
    bool integrable_at_zero() const;
    /// Returns a copy with every amplitude multiplied by s.
    GrowthFunction scaled(double s) const;

private:
    explicit GrowthFunction(Variant v) : v_(std::move(v)) {}
    double head_exponent() const;
    double tail_exponent_table() const;

    Variant v_;
};

void to_json(nlohmann::json& j, const GrowthFunction& g);
GrowthFunction growth_from_json(const nlohmann::json& j);

enum class Evaluation {
    ClosedForm,  ///< closed forms where available, quadrature otherwise
    Quadrature,  ///< always adaptive quadrature + bisection
};

struct BihariOptions {
    double x0 = 1.0;
    Evaluation mode = Evaluation::ClosedForm;
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

double g_big(double x, const GrowthFunction& g, const BihariOptions& opt = {});
/// sup_{x>0} G(x); +∞ when the tail exponent is ≤ 1.
double sup_g_big(const GrowthFunction& g, const BihariOptions& opt = {});
/// lim_{x→0+} G(x); −∞ when 1/g is not integrable at zero.
double inf_g_big(const GrowthFunction& g, const BihariOptions& opt = {});
/// G⁻¹(y) for inf G < y < sup G.
double g_big_inverse(double y, const GrowthFunction& g, const BihariOptions& opt = {});

enum class BoundStatus { Finite, Escaped };

/// Result of the Bihari bound: a value, or "escaped" when the argument of G⁻¹
/// leaves its domain.
struct Bound {
    BoundStatus status = BoundStatus::Finite;
    double value = 0.0;

    bool escaped() const noexcept { return status == BoundStatus::Escaped; }
    static Bound finite(double v) { return {BoundStatus::Finite, v}; }
    static Bound escape() { return {BoundStatus::Escaped, kInfinity}; }
};

/// G⁻¹(G(K) + q_integral); K = 0 with non-integrable 1/g at zero yields 0.
Bound bihari_bound(double K, double q_integral, const GrowthFunction& g, const BihariOptions& opt = {});

struct HorizonEstimate {
    double t0 = 0.0;           ///< guaranteed existence time
    double t_requested = 0.0;  ///< T
    double sup_g = kInfinity;  ///< sup G
    double initial = 0.0;      ///< K = ‖u0‖²_H
    double g_at_k = 0.0;       ///< G(K)
    double effective = 0.0;    ///< K + ∫_0^{t0} f
    GrowthFunction g = GrowthFunction::linear(1.0);
    BihariOptions options;

    bool global() const noexcept { return t0 >= t_requested; }
};

struct HorizonOptions {
    BihariOptions bihari;
    double tolerance = 1e-12;  ///< bisection tolerance on t0
};

/// Largest t0 ≤ T with t0 < sup G − G(K + F(t0)), F(t) = ∫_0^t f.
HorizonEstimate horizon(double K, const std::function<double(double)>& f_integral, const GrowthFunction& g,
                        double T, const HorizonOptions& opt = {});

/// Energy envelope G⁻¹(G(K + F(t0)) + t) for t in [0, t0].
double envelope(const HorizonEstimate& est, double t);

struct OracleResult {
    BoundStatus status = BoundStatus::Finite;
    double value = 0.0;          ///< p(t) when finite
    double blowup_time = kInfinity;  ///< time at which p left every bound
};

/// Adaptive Dormand–Prince solution of p' = g(p), p(0) = K, independent of G.
OracleResult ode_oracle(double K, const GrowthFunction& g, double t);

}  // namespace gelfand
