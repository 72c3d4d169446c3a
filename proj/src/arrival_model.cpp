#include "fogalloc/arrival_model.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <stdexcept>
#include <string>

namespace fogalloc {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string describe(double x) { return std::to_string(x); }

}  // namespace

ArrivalModel::ArrivalModel(double lambda, Law law, double eta)
    : lambda_(lambda), law_(std::move(law)), eta_(eta) {
    if (!(lambda_ > 0.0) || !std::isfinite(lambda_))
        throw std::invalid_argument("arrival rate lambda must be positive, got " + describe(lambda_));
    if (!(eta_ >= 1.0) || !std::isfinite(eta_))
        throw std::invalid_argument("QoE exponent eta must be >= 1, got " + describe(eta_));

    std::visit(overloaded{
                   [&](const ExponentialLaw& l) {
                       if (!(l.alpha > 0.0) || !std::isfinite(l.alpha))
                           throw std::invalid_argument("exponential alpha must be positive");
                       support_min_ = 0.0;
                       support_max_ = std::numeric_limits<double>::infinity();
                   },
                   [&](const UniformLaw& l) {
                       if (!(l.beta > 0.0) || !std::isfinite(l.beta))
                           throw std::invalid_argument("uniform beta must be positive");
                       support_min_ = 0.0;
                       support_max_ = l.beta;
                   },
                   [&](const CustomLaw& l) {
                       if (!l.pdf || !l.cdf || !l.inverse_cdf)
                           throw std::invalid_argument("custom law needs pdf, cdf and inverse_cdf");
                       if (!(l.support_min < l.support_max))
                           throw std::invalid_argument("custom law has an empty support");
                       support_min_ = l.support_min;
                       support_max_ = l.support_max;
                   },
               },
               law_);
    reserve_ = find_reserve();
}

std::string ArrivalModel::law_name() const {
    return std::visit(overloaded{
                          [](const ExponentialLaw&) { return std::string("exponential"); },
                          [](const UniformLaw&) { return std::string("uniform"); },
                          [](const CustomLaw& l) { return l.name; },
                      },
                      law_);
}

double ArrivalModel::pdf(double x) const {
    if (!in_support(x)) throw std::domain_error("pdf evaluated outside the support at x=" + describe(x));
    return std::visit(overloaded{
                          [&](const ExponentialLaw& l) { return l.alpha * std::exp(-l.alpha * x); },
                          [&](const UniformLaw& l) { return 1.0 / l.beta; },
                          [&](const CustomLaw& l) { return l.pdf(x); },
                      },
                      law_);
}

double ArrivalModel::cdf(double x) const {
    if (x <= support_min_) return 0.0;
    if (x >= support_max_) return 1.0;
    return std::visit(overloaded{
                          [&](const ExponentialLaw& l) { return -std::expm1(-l.alpha * x); },
                          [&](const UniformLaw& l) { return x / l.beta; },
                          [&](const CustomLaw& l) { return l.cdf(x); },
                      },
                      law_);
}

double ArrivalModel::survival(double x) const {
    if (x <= support_min_) return 1.0;
    if (x >= support_max_) return 0.0;
    return std::visit(overloaded{
                          [&](const ExponentialLaw& l) { return std::exp(-l.alpha * x); },
                          [&](const UniformLaw& l) { return (l.beta - x) / l.beta; },
                          [&](const CustomLaw& l) { return 1.0 - l.cdf(x); },
                      },
                      law_);
}

double ArrivalModel::inverse_cdf(double p) const {
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("inverse_cdf needs 0 <= p <= 1, got " + describe(p));
    return std::visit(overloaded{
                          [&](const ExponentialLaw& l) { return -std::log1p(-p) / l.alpha; },
                          [&](const UniformLaw& l) { return p * l.beta; },
                          [&](const CustomLaw& l) { return l.inverse_cdf(p); },
                      },
                      law_);
}

double ArrivalModel::hazard_inverse(double x) const {
    const double density = pdf(x);
    if (!(density > 0.0)) throw std::domain_error("hazard undefined where pdf is zero, x=" + describe(x));
    return survival(x) / density;
}

double ArrivalModel::squared_survival_over_pdf(double x) const {
    const double density = pdf(x);
    if (!(density > 0.0)) throw std::domain_error("hazard undefined where pdf is zero, x=" + describe(x));
    const double s = survival(x);
    return s * s / density;
}

double ArrivalModel::virtual_valuation(double x) const { return x - hazard_inverse(x); }

double ArrivalModel::find_reserve() const {
    double lo = support_min_;
    double hi = std::min(support_max_, inverse_cdf(1.0 - 1e-9));
    double psi_lo = virtual_valuation(lo);
    const double psi_hi = virtual_valuation(hi);
    if (psi_lo == 0.0) return lo;
    if (psi_hi == 0.0) return hi;
    if ((psi_lo > 0.0) == (psi_hi > 0.0))
        throw std::domain_error("virtual valuation has no sign change on [" + describe(lo) + ", " +
                                describe(hi) + "]");
    // Bisect until the bracket stops shrinking.
    for (int it = 0; it < 2000; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double psi_mid = virtual_valuation(mid);
        if (psi_mid == 0.0) return mid;
        if ((psi_mid > 0.0) == (psi_lo > 0.0)) {
            lo = mid;
            psi_lo = psi_mid;
        } else {
            hi = mid;
        }
    }
    const double psi_hi_final = virtual_valuation(hi);
    return std::abs(psi_lo) <= std::abs(psi_hi_final) ? lo : hi;
}

double ArrivalModel::mean_transformed() const {
    return std::visit(overloaded{
                          [](const ExponentialLaw& l) { return 1.0 / l.alpha; },
                          [](const UniformLaw& l) { return 0.5 * l.beta; },
                          [&](const CustomLaw&) {
                              const double hi = std::min(support_max_, inverse_cdf(1.0 - 1e-12));
                              return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                                  [&](double x) { return x * pdf(x); }, support_min_, hi, 15, 1e-12);
                          },
                      },
                      law_);
}

double ArrivalModel::sample_transformed(Engine& engine) const { return inverse_cdf(uniform_open(engine)); }

std::vector<Arrival> ArrivalModel::sample_arrivals(double horizon, Engine& engine) const {
    std::vector<Arrival> out;
    if (!(horizon > 0.0)) return out;
    out.reserve(static_cast<std::size_t>(lambda_ * horizon * 1.2) + 16);
    double t = 0.0;
    for (;;) {
        t += -std::log(uniform_open(engine)) / lambda_;
        if (t > horizon) break;
        const double xhat = sample_transformed(engine);
        out.push_back({t, eta_ == 1.0 ? xhat : std::pow(xhat, eta_)});
    }
    return out;
}

std::vector<Arrival> ArrivalModel::sample_arrivals(double horizon, std::uint64_t seed) const {
    Engine engine(seed);
    return sample_arrivals(horizon, engine);
}

double ArrivalModel::first_qualifying_density(const std::function<double(double)>& threshold, double t,
                                              double s) const {
    if (s < t) return 0.0;
    auto intensity = [&](double u) {
        const double y = threshold(u);
        if (!(y < std::numeric_limits<double>::infinity())) return 0.0;
        const double yhat = eta_ == 1.0 ? y : std::pow(y, 1.0 / eta_);
        return lambda_ * survival(yhat);
    };
    const double rate_s = intensity(s);
    if (rate_s == 0.0 || s == t) return rate_s;
    const double cumulative =
        boost::math::quadrature::gauss_kronrod<double, 31>::integrate(intensity, t, s, 10, 1e-12);
    return rate_s * std::exp(-cumulative);
}

}  // namespace fogalloc
