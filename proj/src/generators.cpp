#include "nnps/generators.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace nnps {

namespace {

// Deterministic standard-normal stream: Box-Muller on explicit 53-bit
// uniforms.  std::normal_distribution is implementation-defined, which would
// break byte-identical regeneration across standard libraries.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

    double next()
    {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * M_PI * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

    std::mt19937_64 rng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

double require_positive(const std::map<std::string, double>& params, const std::string& key)
{
    const double value = params.at(key);
    if (!(value > 0.0))
        throw std::invalid_argument("generator parameter '" + key + "' must be positive");
    return value;
}

}  // namespace

Family parse_family(const std::string& name)
{
    if (name == "poisson_pmf") return Family::poisson_pmf;
    if (name == "gamma_pdf") return Family::gamma_pdf;
    if (name == "weibull_pdf") return Family::weibull_pdf;
    if (name == "pareto_pdf") return Family::pareto_pdf;
    throw std::invalid_argument("unknown family '" + name +
                                "' (expected poisson_pmf, gamma_pdf, weibull_pdf, pareto_pdf)");
}

const char* to_string(Family family)
{
    switch (family) {
    case Family::poisson_pmf: return "poisson_pmf";
    case Family::gamma_pdf: return "gamma_pdf";
    case Family::weibull_pdf: return "weibull_pdf";
    case Family::pareto_pdf: return "pareto_pdf";
    }
    return "?";
}

std::map<std::string, double> default_params(Family family)
{
    switch (family) {
    case Family::poisson_pmf: return {{"mean", 20.0}};
    case Family::gamma_pdf: return {{"alpha", 2.0}, {"beta", 2.0}};
    case Family::weibull_pdf: return {{"alpha", 1.0}, {"beta", 1.5}};
    case Family::pareto_pdf: return {{"alpha", 1.0}, {"b", 1.0}};
    }
    return {};
}

double family_value(Family family, const std::map<std::string, double>& params, double x)
{
    std::map<std::string, double> merged = default_params(family);
    for (const auto& [key, value] : params) {
        if (merged.find(key) == merged.end())
            throw std::invalid_argument("family " + std::string(to_string(family)) +
                                        " has no parameter '" + key + "'");
        merged[key] = value;
    }

    switch (family) {
    case Family::poisson_pmf: {
        const double mean = require_positive(merged, "mean");
        if (x < 0.0)
            return 0.0;
        return std::exp(x * std::log(mean) - mean - std::lgamma(x + 1.0));
    }
    case Family::gamma_pdf: {
        const double alpha = require_positive(merged, "alpha");
        const double beta = require_positive(merged, "beta");
        if (x < 0.0)
            return 0.0;
        if (x == 0.0)
            return alpha > 1.0 ? 0.0 : (alpha == 1.0 ? 1.0 / beta : INFINITY);
        return std::exp((alpha - 1.0) * std::log(x) - x / beta - alpha * std::log(beta) -
                        std::lgamma(alpha));
    }
    case Family::weibull_pdf: {
        const double alpha = require_positive(merged, "alpha");
        const double beta = require_positive(merged, "beta");
        if (x < 0.0)
            return 0.0;
        if (x == 0.0)
            return alpha > 1.0 ? 0.0 : (alpha == 1.0 ? 1.0 / beta : INFINITY);
        const double scaled = x / beta;
        return (alpha / beta) * std::pow(scaled, alpha - 1.0) *
               std::exp(-std::pow(scaled, alpha));
    }
    case Family::pareto_pdf: {
        const double alpha = require_positive(merged, "alpha");
        const double b = require_positive(merged, "b");
        if (x < b)
            return 0.0;
        return alpha * std::pow(b, alpha) / std::pow(x, alpha + 1.0);
    }
    }
    return 0.0;
}

DataSet generate(const GeneratorSpec& spec)
{
    if (!(spec.noise_sigma >= 0.0))
        throw std::invalid_argument("generate: noise sigma must be nonnegative");

    DataSet data;
    data.x = spec.abscissae;
    data.y.resize(spec.abscissae.size());
    GaussianStream noise(spec.seed);
    for (int i = 0; i < data.x.size(); ++i) {
        double value = family_value(spec.family, spec.params, data.x[i]);
        if (spec.noise_sigma > 0.0)
            value += spec.noise_sigma * noise.next();
        data.y[i] = value;
    }
    return data;
}

}  // namespace nnps
