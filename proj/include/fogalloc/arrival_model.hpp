#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "fogalloc/random.hpp"

namespace fogalloc {

/// Exponential law on [0, inf) with rate alpha (mean 1/alpha).
struct ExponentialLaw {
    double alpha = 1.0;
};

/// Uniform law on [0, beta].
struct UniformLaw {
    double beta = 1.0;
};

/// Arbitrary law given by its density, distribution and quantile functions.
/// Hazard terms are derived from these generically.
struct CustomLaw {
    std::string name = "custom";
    std::function<double(double)> pdf;
    std::function<double(double)> cdf;
    std::function<double(double)> inverse_cdf;
    double support_min = 0.0;
    double support_max = std::numeric_limits<double>::infinity();
};

using Law = std::variant<ExponentialLaw, UniformLaw, CustomLaw>;

/// One request: arrival time (hours) and raw characteristic x (minimum
/// required response rate).
struct Arrival {
    double time = 0.0;
    double x = 0.0;
};

/// Poisson arrivals of rate lambda whose transformed characteristic
/// x^(1/eta) follows `law`. Immutable; safe to share across threads.
///
/// All distribution functionals below take the *transformed* variable.
class ArrivalModel {
public:
    ArrivalModel(double lambda, Law law, double eta = 1.0);

    double lambda() const noexcept { return lambda_; }
    double eta() const noexcept { return eta_; }
    const Law& law() const noexcept { return law_; }
    std::string law_name() const;

    double support_min() const noexcept { return support_min_; }
    double support_max() const noexcept { return support_max_; }
    bool in_support(double x) const noexcept { return x >= support_min_ && x <= support_max_; }

    /// Throws std::domain_error outside the support.
    double pdf(double x) const;
    double cdf(double x) const;
    /// 1 - F(x), evaluated without cancellation for the built-in laws.
    double survival(double x) const;
    /// Throws std::domain_error unless 0 <= p <= 1.
    double inverse_cdf(double p) const;

    /// (1 - F(x)) / f(x). Throws std::domain_error where f(x) = 0.
    double hazard_inverse(double x) const;
    /// (1 - F(x))^2 / f(x), the integrand of the threshold equations.
    double squared_survival_over_pdf(double x) const;

    /// psi(x) = x - (1 - F(x)) / f(x).
    double virtual_valuation(double x) const;
    /// Root of psi, computed once at construction by bisection.
    double reserve() const noexcept { return reserve_; }

    /// Mean of the transformed characteristic (quadrature for custom laws).
    double mean_transformed() const;

    /// Homogeneous Poisson arrivals on [0, horizon] with x = xhat^eta.
    std::vector<Arrival> sample_arrivals(double horizon, Engine& engine) const;
    std::vector<Arrival> sample_arrivals(double horizon, std::uint64_t seed) const;

    /// One draw of the transformed characteristic.
    double sample_transformed(Engine& engine) const;

    /// Density at s of the first arrival after t whose raw characteristic
    /// exceeds threshold(.) (a raw-unit cutoff curve).
    double first_qualifying_density(const std::function<double(double)>& threshold, double t,
                                    double s) const;

    /// Same model with a different arrival rate / law (sweeps).
    ArrivalModel with_lambda(double lambda) const { return {lambda, law_, eta_}; }
    ArrivalModel with_law(Law law) const { return {lambda_, std::move(law), eta_}; }

private:
    double find_reserve() const;

    double lambda_;
    Law law_;
    double eta_;
    double support_min_ = 0.0;
    double support_max_ = 0.0;
    double reserve_ = 0.0;
};

}  // namespace fogalloc
