#include "gelfand/opcore.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gelfand/errors.hpp"
#include "gelfand/spectral_grid.hpp"

namespace gelfand {

TimeFunction::TimeFunction(Kind kind, std::vector<double> times, std::vector<double> values)
    : kind_(kind), times_(std::move(times)), values_(std::move(values)) {
    if (times_.size() != values_.size() || values_.empty()) throw ContractViolation("time function: bad table");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i]) || values_[i] < 0.0)
            throw ContractViolation("time function values must be finite and non-negative");
        if (!std::isfinite(times_[i]) || (i > 0 && !(times_[i] > times_[i - 1])))
            throw ContractViolation("time function abscissae must increase");
    }
}

TimeFunction TimeFunction::constant(double value) { return TimeFunction(Kind::Constant, {0.0}, {value}); }

TimeFunction TimeFunction::step_table(std::vector<double> times, std::vector<double> values) {
    return TimeFunction(Kind::StepTable, std::move(times), std::move(values));
}

TimeFunction TimeFunction::samples(std::vector<double> times, std::vector<double> values) {
    return TimeFunction(Kind::Samples, std::move(times), std::move(values));
}

double TimeFunction::operator()(double t) const {
    switch (kind_) {
        case Kind::Constant:
            return values_[0];
        case Kind::StepTable: {
            const auto it = std::upper_bound(times_.begin(), times_.end(), t);
            if (it == times_.begin()) return values_.front();
            return values_[static_cast<std::size_t>(it - times_.begin()) - 1];
        }
        case Kind::Samples: {
            if (t <= times_.front()) return values_.front();
            if (t >= times_.back()) return values_.back();
            const auto i = static_cast<std::size_t>(std::upper_bound(times_.begin(), times_.end(), t) - times_.begin());
            const double w = (t - times_[i - 1]) / (times_[i] - times_[i - 1]);
            return values_[i - 1] + w * (values_[i] - values_[i - 1]);
        }
    }
    return 0.0;
}

double TimeFunction::integral(double t) const {
    if (t <= 0.0) return 0.0;
    if (kind_ == Kind::Constant) return values_[0] * t;
    // Exact integration of the piecewise constant / linear interpolant from 0 to t.
    std::vector<double> knots{0.0};
    for (double x : times_)
        if (x > 0.0 && x < t) knots.push_back(x);
    knots.push_back(t);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        const double a = knots[i];
        const double b = knots[i + 1];
        if (kind_ == Kind::StepTable)
            total += (*this)(a) * (b - a);
        else
            total += 0.5 * ((*this)(a) + (*this)(b)) * (b - a);
    }
    return total;
}

TimeFunction TimeFunction::scaled(double s) const {
    auto v = values_;
    for (auto& x : v) x *= s;
    return TimeFunction(kind_, times_, std::move(v));
}

double TimeFunction::max_value() const { return *std::max_element(values_.begin(), values_.end()); }

void to_json(nlohmann::json& j, const TimeFunction& f) {
    switch (f.kind()) {
        case TimeFunction::Kind::Constant:
            j = {{"kind", "constant"}, {"value", f.values()[0]}};
            break;
        case TimeFunction::Kind::StepTable:
            j = {{"kind", "steps"}, {"t", f.times()}, {"value", f.values()}};
            break;
        case TimeFunction::Kind::Samples:
            j = {{"kind", "samples"}, {"t", f.times()}, {"value", f.values()}};
            break;
    }
}

TimeFunction time_function_from_json(const nlohmann::json& j) {
    if (j.is_number()) return TimeFunction::constant(j.get<double>());
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "constant") return TimeFunction::constant(j.at("value").get<double>());
    auto t = j.at("t").get<std::vector<double>>();
    auto v = j.at("value").get<std::vector<double>>();
    if (kind == "steps") return TimeFunction::step_table(std::move(t), std::move(v));
    if (kind == "samples") return TimeFunction::samples(std::move(t), std::move(v));
    throw ConfigError("unknown time function kind '" + kind + "'");
}

namespace {

// Derivative multi-indices with total order ≤ m in the first `dim` axes.
std::vector<std::array<int, 3>> multi_indices(int dim, int m) {
    std::vector<std::array<int, 3>> out;
    for (int a = 0; a <= m; ++a)
        for (int b = 0; b <= (dim > 1 ? m - a : 0); ++b)
            for (int c = 0; c <= (dim > 2 ? m - a - b : 0); ++c) out.push_back({a, b, c});
    return out;
}

}  // namespace

double evaluate_norm(const SpectralSpace& space, std::span<const double> v, const NormSpec& norm) {
    space.require_conforming(v, "evaluate_norm");
    switch (norm.kind) {
        case NormSpec::Kind::H:
            return h_norm(space, v);
        case NormSpec::Kind::V:
            return v_norm(space, v);
        case NormSpec::Kind::Sobolev: {
            const auto nc = static_cast<std::size_t>(space.components());
            double s = 0.0;
            for (std::size_t m = 0; m < space.dim(); ++m) {
                const double w = std::pow(1.0 + space.kappa_sq(m), norm.order);
                for (std::size_t c = 0; c < nc; ++c) s += w * v[m * nc + c] * v[m * nc + c];
            }
            return std::sqrt(s);
        }
        case NormSpec::Kind::Lp:
        case NormSpec::Kind::WInf:
            break;
    }

    const auto& grid = space.quadrature();
    const auto spec = to_spectrum(space, v);
    const int nc = space.components();
    if (norm.kind == NormSpec::Kind::Lp) {
        const double p = norm.order;
        if (!(p >= 1.0)) throw ContractViolation("Lp norm requires p >= 1");
        std::vector<double> mag(grid.grid_size(), 0.0);
        for (int c = 0; c < nc; ++c) {
            const auto vals = grid_values(space, grid, spec, c);
            for (std::size_t i = 0; i < mag.size(); ++i) mag[i] += vals[i] * vals[i];
        }
        double s = 0.0;
        for (double m2 : mag) s += std::pow(m2, 0.5 * p);
        return std::pow(s * grid.cell_volume(), 1.0 / p);
    }

    double best = 0.0;
    for (const auto& idx : multi_indices(space.geometry().spatial_dim, static_cast<int>(norm.order))) {
        std::vector<double> mag(grid.grid_size(), 0.0);
        for (int c = 0; c < nc; ++c) {
            const auto vals = grid_values(space, grid, spec, c, idx);
            for (std::size_t i = 0; i < mag.size(); ++i) mag[i] += vals[i] * vals[i];
        }
        best = std::max(best, std::sqrt(*std::max_element(mag.begin(), mag.end())));
    }
    return best;
}

FunctionalForm::FunctionalForm(std::vector<Term> terms) : terms_(std::move(terms)) {
    for (const auto& t : terms_)
        if (!(t.coefficient >= 0.0) || !(t.exponent >= 0.0))
            throw ContractViolation("functional form terms need non-negative coefficient and exponent");
}

double FunctionalForm::operator()(const SpectralSpace& space, std::span<const double> v) const {
    double s = 0.0;
    for (const auto& t : terms_)
        if (t.coefficient != 0.0) s += t.coefficient * std::pow(evaluate_norm(space, v, t.norm), t.exponent);
    return s;
}

bool FunctionalForm::is_zero() const noexcept {
    return std::all_of(terms_.begin(), terms_.end(), [](const Term& t) { return t.coefficient == 0.0; });
}

FunctionalForm FunctionalForm::scaled(double s) const {
    auto terms = terms_;
    for (auto& t : terms) t.coefficient *= s;
    return FunctionalForm(std::move(terms));
}

FunctionalForm FunctionalForm::plus(const FunctionalForm& other) const {
    auto terms = terms_;
    terms.insert(terms.end(), other.terms_.begin(), other.terms_.end());
    return FunctionalForm(std::move(terms));
}

double FunctionalForm::subadditivity_constant() const {
    double e = 1.0;
    for (const auto& t : terms_) e = std::max(e, t.exponent);
    return std::pow(2.0, e - 1.0);
}

namespace {

std::string norm_name(const NormSpec& n) {
    std::ostringstream os;
    switch (n.kind) {
        case NormSpec::Kind::H: return "H";
        case NormSpec::Kind::V: return "V";
        case NormSpec::Kind::Sobolev: os << "H" << n.order; break;
        case NormSpec::Kind::Lp: os << "L" << n.order; break;
        case NormSpec::Kind::WInf:
            if (n.order == 0.0) return "Linf";
            os << "W" << n.order << ",inf";
            break;
    }
    return os.str();
}

NormSpec norm_from_name(const std::string& s) {
    if (s == "H") return {NormSpec::Kind::H, 0.0};
    if (s == "V") return {NormSpec::Kind::V, 0.0};
    if (s == "Linf") return {NormSpec::Kind::WInf, 0.0};
    if (s.size() > 4 && s.front() == 'W' && s.substr(s.size() - 4) == ",inf")
        return {NormSpec::Kind::WInf, std::stod(s.substr(1, s.size() - 5))};
    if (s.size() > 1 && s.front() == 'L') return {NormSpec::Kind::Lp, std::stod(s.substr(1))};
    if (s.size() > 1 && s.front() == 'H') return {NormSpec::Kind::Sobolev, std::stod(s.substr(1))};
    throw ConfigError("unknown norm '" + s + "'");
}

}  // namespace

std::string FunctionalForm::describe() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        if (i) os << " + ";
        os << terms_[i].coefficient << "*|v|_" << norm_name(terms_[i].norm) << "^" << terms_[i].exponent;
    }
    return os.str();
}

void to_json(nlohmann::json& j, const FunctionalForm& f) {
    j = nlohmann::json::array();
    for (const auto& t : f.terms())
        j.push_back({{"coefficient", t.coefficient}, {"norm", norm_name(t.norm)}, {"exponent", t.exponent}});
}

FunctionalForm functional_form_from_json(const nlohmann::json& j) {
    std::vector<FunctionalForm::Term> terms;
    for (const auto& t : j)
        terms.push_back({t.at("coefficient").get<double>(), norm_from_name(t.at("norm").get<std::string>()),
                         t.at("exponent").get<double>()});
    return FunctionalForm(std::move(terms));
}

void StructuralConstants::validate() const {
    if (!(alpha > 1.0)) throw ContractViolation("alpha must exceed 1");
    if (!(beta >= 0.0)) throw ContractViolation("beta must be non-negative");
    if (!(delta > 0.0)) throw ContractViolation("delta must be positive");
    if (!(c_growth >= 0.0)) throw ContractViolation("growth constant must be non-negative");
    if (!(gamma_c3 >= 0.0) || !(c_c3 >= 0.0)) throw ContractViolation("uniqueness constants must be non-negative");
}

void to_json(nlohmann::json& j, const StructuralConstants& c) {
    j = {{"alpha", c.alpha},       {"beta", c.beta},     {"delta", c.delta},         {"c_growth", c.c_growth},
         {"f", c.f},               {"g", c.g},           {"rho", c.rho_form},        {"eta", c.eta_form},
         {"gamma_c3", c.gamma_c3}, {"c_c3", c.c_c3}};
}

StructuralConstants constants_from_json(const nlohmann::json& j) {
    StructuralConstants c;
    c.alpha = j.at("alpha").get<double>();
    c.beta = j.at("beta").get<double>();
    c.delta = j.at("delta").get<double>();
    c.c_growth = j.at("c_growth").get<double>();
    c.f = time_function_from_json(j.at("f"));
    c.g = growth_from_json(j.at("g"));
    c.rho_form = functional_form_from_json(j.at("rho"));
    c.eta_form = functional_form_from_json(j.at("eta"));
    c.gamma_c3 = j.value("gamma_c3", 0.0);
    c.c_c3 = j.value("c_c3", 0.0);
    c.validate();
    return c;
}

EvolutionOperator::EvolutionOperator(std::shared_ptr<const SpectralSpace> space, StructuralConstants constants,
                                     std::string name)
    : space_(std::move(space)), constants_(std::move(constants)), name_(std::move(name)) {
    if (!space_) throw ContractViolation("operator needs a space");
    constants_.validate();
}

std::vector<double> EvolutionOperator::eval(double t, std::span<const double> v) const {
    std::vector<double> out(space_->size());
    eval(t, v, out);
    return out;
}

void EvolutionOperator::eval(double t, std::span<const double> v, std::span<double> out) const {
    space_->require_conforming(v, "eval");
    space_->require_conforming(out, "eval");
    apply(t, v, out);
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!std::isfinite(out[i])) {
            std::ostringstream os;
            os << name_ << ": non-finite output at coefficient " << i;
            throw OperatorOverflow(i, os.str());
        }
    }
}

DiagonalOperator::DiagonalOperator(std::shared_ptr<const SpectralSpace> space, std::vector<double> diagonal,
                                   StructuralConstants constants, std::string name)
    : EvolutionOperator(std::move(space), std::move(constants), std::move(name)), diagonal_(std::move(diagonal)) {
    if (diagonal_.size() != this->space().size()) throw ContractViolation("diagonal length mismatch");
}

void DiagonalOperator::apply(double, std::span<const double> v, std::span<double> out) const {
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = diagonal_[i] * v[i];
}

SumOperator::SumOperator(OperatorPtr a, OperatorPtr b, StructuralConstants constants, std::string name)
    : EvolutionOperator(a->space_ptr(), std::move(constants), std::move(name)), a_(std::move(a)), b_(std::move(b)) {
    if (b_->space().size() != a_->space().size()) throw ContractViolation("sum of operators on different spaces");
}

void SumOperator::apply(double t, std::span<const double> v, std::span<double> out) const {
    std::vector<double> tmp(out.size());
    a_->apply(t, v, out);
    b_->apply(t, v, tmp);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += tmp[i];
}

std::optional<std::vector<double>> SumOperator::linear_diagonal() const {
    auto da = a_->linear_diagonal();
    auto db = b_->linear_diagonal();
    if (!da || !db) return std::nullopt;
    for (std::size_t i = 0; i < da->size(); ++i) (*da)[i] += (*db)[i];
    return da;
}

void SumOperator::constrain(std::span<double> v) const {
    a_->constrain(v);
    b_->constrain(v);
}

FunctionOperator::FunctionOperator(std::shared_ptr<const SpectralSpace> space, Fn fn, StructuralConstants constants,
                                   std::string name, std::optional<std::vector<double>> diagonal)
    : EvolutionOperator(std::move(space), std::move(constants), std::move(name)),
      fn_(std::move(fn)),
      diagonal_(std::move(diagonal)) {}

void FunctionOperator::apply(double t, std::span<const double> v, std::span<double> out) const { fn_(t, v, out); }

std::vector<double> diagonal_or_zero(const EvolutionOperator& op) {
    if (auto d = op.linear_diagonal()) return *d;
    return std::vector<double>(op.space().size(), 0.0);
}

}  // namespace gelfand
