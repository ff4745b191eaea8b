#pragma once

#include "nnps/bspline.hpp"
#include "nnps/conic.hpp"
#include "nnps/nonneg.hpp"

#include <vector>

namespace nnps {

/// One penalized fitting instance: scattered samples, a knot vector, and the
/// second-difference smoothing weight.
struct FitProblem {
    Eigen::VectorXd x;
    Eigen::VectorXd y;
    KnotVector knots;
    double lambda = 0.0;

    int n_samples() const { return static_cast<int>(x.size()); }
    void validate() const;
};

/// Banded n x (n-2) matrix whose transpose maps coefficients to their second
/// differences; the penalty equals alpha' D D' alpha.
Eigen::MatrixXd second_diff_matrix(int n);

/// Penalized least-squares loss: ||y - X alpha||^2 + lambda ||D' alpha||^2.
double pspline_loss(const FitProblem& problem, const Eigen::VectorXd& alpha);

/// Solves the normal equations (X'X + lambda D D') alpha = X'y.  Throws a
/// rank-deficiency error naming the smallest pivot when the normal matrix is
/// numerically singular.
SplineModel unconstrained_fit(const FitProblem& problem);

/** Coordinate bookkeeping for the fitting cone programs.
 *
 *  Groups, in coordinate order:
 *    alpha (free) | Model II: u, v (free bounds) | certificates, one
 *    rotated-Q3 triple pair per interval in cone coordinates
 *    (c11, c22, sqrt2*c12, d11, d22, sqrt2*d12) | the cone-resident
 *    auxiliaries (Model I: one big second-order cone headed by the epigraph
 *    z; Model II: one Q3 per datum and per penalty term).
 */
struct VariableLayout {
    int n_alpha = 0;
    int n_intervals = 0;
    int m_data = 0;
    int n_penalty = 0;

    int alpha_start = 0;
    int u_start = -1;        ///< Model II residual bounds (m)
    int v_start = -1;        ///< Model II penalty bounds (n-2)
    int cert_start = 0;      ///< 6 cone coordinates per interval
    int z_index = -1;        ///< Model I epigraph variable
    int resid_start = -1;    ///< coordinates carrying residual expressions
    int penalty_start = -1;  ///< coordinates carrying penalty expressions
    int total_vars = 0;

    int cert_col(int interval, bool d_side) const
    {
        return cert_start + 6 * interval + (d_side ? 3 : 0);
    }
};

struct BuiltModel {
    ConeProgram program;
    VariableLayout layout;
};

/// Epigraph-of-norm construction: minimize z over one second-order cone
/// (z, residuals, sqrt(lambda) * second differences), so the optimum is the
/// square root of the penalized loss.
BuiltModel build_model_I(const FitProblem& problem);

/// Squared-norm construction: per-datum and per-penalty rotated bounds
/// (u+1, u-1, 2*expr) in Q3 with objective sum(u) + lambda * sum(v), so the
/// optimum equals the penalized loss itself.
BuiltModel build_model_II(const FitProblem& problem);

struct ExtractedModel {
    SplineModel model;
    std::vector<CubicCertificate> certificates;
};

/// Pulls the fitted coefficients and audit certificates out of an optimal
/// solution; refuses non-optimal statuses.
ExtractedModel extract_model(const Solution& solution, const VariableLayout& layout,
                             const KnotVector& knots);

enum class FitModel { model_I, model_II };

/// Fitting-path solver settings: accept at 1e-7 but keep iterating toward
/// 1e-12 while progress lasts.  Boundary-touching fits lack strictly
/// complementary solutions, so the embedding can plateau above 1e-8; the
/// loose acceptance bar keeps those honest instead of failing them.
struct FitOptions {
    FitModel model = FitModel::model_II;
    SolverSettings solver = {.tol = 1e-7, .max_iter = 200, .tol_target = 1e-12};
};

/// Build + solve + extract in one step.  The data is normalized to unit
/// magnitude for the solve and the result scaled back, which leaves the
/// minimizer unchanged (the loss is quadratic in the y units).
struct ConstrainedFit {
    SolveStatus status = SolveStatus::numerical_failure;
    SplineModel model;
    std::vector<CubicCertificate> certificates;
    double objective = 0.0;  ///< solver objective (Model II: the Eq-style loss)
    int iterations = 0;
};

ConstrainedFit constrained_fit(const FitProblem& problem, const FitOptions& options = {});

}  // namespace nnps
