#pragma once

#include "nnps/formulate.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace nnps {

/// Hyperparameter grid for the two-level scan; values are sorted ascending
/// and deduplicated on construction so tie-breaking is order-independent.
struct SelectionGrid {
    std::vector<double> lambda_values;
    std::vector<int> interior_knot_counts;

    SelectionGrid() = default;
    SelectionGrid(std::vector<double> lambdas, std::vector<int> knot_counts);

    /// lambda in decades 1e-4 .. 1e4, interior knots 4 .. 19.
    static SelectionGrid default_grid();
};

/// One grid cell: fit statistics plus the fitted model.
struct FitReport {
    int n_interior = 0;
    double lambda = 0.0;
    double asr = 0.0;
    double trace_s = 0.0;
    double gcv = 0.0;
    double aic = 0.0;
    bool aic_degenerate = false;  ///< zero-residual sentinel (aic = -inf)
    SolveStatus solver_status = SolveStatus::numerical_failure;
    bool valid = false;  ///< participates in the argmin scans
    std::string note;    ///< failure reason when not valid
    SplineModel model;
};

/// Mean squared residual of the fitted model on the data.
double asr(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys, const SplineModel& model);

/// Hat matrix X (X'X + lambda D D')^-1 X' of the unconstrained penalized fit.
/// Throws when the penalized normal matrix is numerically singular.
Eigen::MatrixXd smoother_matrix(const Eigen::MatrixXd& X, double lambda,
                                const Eigen::MatrixXd& D);

/// Trace of the smoother matrix without forming it (effective dof).
double smoother_trace(const Eigen::MatrixXd& X, double lambda, const Eigen::MatrixXd& D);

/** GCV statistic ASR / (1 - tr(S)/m)^2.
 *
 *  The ASR comes from the constrained fit while tr(S) is the unconstrained
 *  smoother trace; the underlying formulas define S without reference to the
 *  cone constraints.  Throws a degenerate-dof error when tr(S) >= m.
 */
double gcv(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys, const KnotVector& knots,
           double lambda, const FitOptions& options = {});

/// m { ln(RSS/m) + 1 } + 2n with n the number of basis functions; returns
/// -infinity and sets *degenerate when the residual vanishes.
double aic(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys, const SplineModel& model,
           int n_basis, bool* degenerate = nullptr);

/// Fits one grid cell (knots spanning the data range) and fills its report.
FitReport evaluate_cell(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys, int n_interior,
                        double lambda, const FitOptions& options = {});

struct SelectionResult {
    FitReport best;
    std::vector<FitReport> table;  ///< grid order: knot counts outer, lambda inner
};

/** Two-level scan: for each knot count pick the GCV-minimizing lambda (ties
 *  to the smaller lambda), then pick the knot count minimizing AIC at its
 *  selected lambda (ties to fewer knots).  Failed cells are flagged and
 *  skipped; throws a selection error when every cell fails.
 */
SelectionResult select_model(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys,
                             const SelectionGrid& grid, const FitOptions& options = {});

/// Report table as CSV: n_interior, lambda, asr, trace_s, gcv, aic, status.
void write_report_csv(const std::vector<FitReport>& table, std::ostream& out);

}  // namespace nnps
