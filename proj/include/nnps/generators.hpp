#pragma once

#include "nnps/csv.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace nnps {

/// Synthetic families standing in for the benchmark datasets: probability
/// mass/density curves that a nonnegative fit should track.
enum class Family { poisson_pmf, gamma_pdf, weibull_pdf, pareto_pdf };

Family parse_family(const std::string& name);
const char* to_string(Family family);

/// Parameters a family accepts, with its conventional defaults:
///   poisson_pmf: mean = 20
///   gamma_pdf:   alpha = 2, beta = 2      (shape, scale)
///   weibull_pdf: alpha = 1, beta = 1.5    (shape, scale)
///   pareto_pdf:  alpha = 1, b = 1         (shape, lower bound)
std::map<std::string, double> default_params(Family family);

/// Closed-form family value at x (zero outside the support).  Throws on
/// out-of-domain parameters or unknown parameter names.
double family_value(Family family, const std::map<std::string, double>& params, double x);

struct GeneratorSpec {
    Family family = Family::gamma_pdf;
    std::map<std::string, double> params;  ///< missing keys take defaults
    Eigen::VectorXd abscissae;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
};

/// y_i = family(x_i) + Gaussian noise.  The noise stream is a fixed
/// Box-Muller transform over mt19937_64 so identical seeds reproduce
/// identical samples on every platform.
DataSet generate(const GeneratorSpec& spec);

}  // namespace nnps
