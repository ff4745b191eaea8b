#include "nnps/modelselect.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace nnps {

namespace {

Eigen::LDLT<Eigen::MatrixXd> penalized_normal_ldlt(const Eigen::MatrixXd& X, double lambda,
                                                   const Eigen::MatrixXd& D)
{
    const Eigen::MatrixXd normal = X.transpose() * X + lambda * (D * D.transpose());
    Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
    const double pivot_min = ldlt.vectorD().minCoeff();
    const double pivot_max = ldlt.vectorD().maxCoeff();
    if (!(pivot_min > pivot_max * 1e-13))
        throw std::runtime_error("smoother_matrix: penalized normal matrix is singular "
                                 "(smallest pivot " +
                                 std::to_string(pivot_min) + ")");
    return ldlt;
}

std::string num17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

SelectionGrid::SelectionGrid(std::vector<double> lambdas, std::vector<int> knot_counts)
    : lambda_values(std::move(lambdas)), interior_knot_counts(std::move(knot_counts))
{
    if (lambda_values.empty() || interior_knot_counts.empty())
        throw std::invalid_argument("SelectionGrid: both grids must be nonempty");
    for (double value : lambda_values)
        if (!(value > 0.0))
            throw std::invalid_argument("SelectionGrid: lambda values must be positive");
    for (int count : interior_knot_counts)
        if (count < 0)
            throw std::invalid_argument("SelectionGrid: knot counts must be nonnegative");
    std::sort(lambda_values.begin(), lambda_values.end());
    lambda_values.erase(std::unique(lambda_values.begin(), lambda_values.end()),
                        lambda_values.end());
    std::sort(interior_knot_counts.begin(), interior_knot_counts.end());
    interior_knot_counts.erase(
        std::unique(interior_knot_counts.begin(), interior_knot_counts.end()),
        interior_knot_counts.end());
}

SelectionGrid SelectionGrid::default_grid()
{
    std::vector<double> lambdas;
    for (int exponent = -4; exponent <= 4; ++exponent)
        lambdas.push_back(std::pow(10.0, exponent));
    std::vector<int> knots;
    for (int count = 4; count <= 19; ++count)
        knots.push_back(count);
    return SelectionGrid(std::move(lambdas), std::move(knots));
}

double asr(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys, const SplineModel& model)
{
    if (xs.size() == 0 || xs.size() != ys.size())
        throw std::invalid_argument("asr: data must be nonempty with matching lengths");
    double total = 0.0;
    for (int i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - eval_spline(model, xs[i]);
        total += r * r;
    }
    return total / xs.size();
}

Eigen::MatrixXd smoother_matrix(const Eigen::MatrixXd& X, double lambda,
                                const Eigen::MatrixXd& D)
{
    const auto ldlt = penalized_normal_ldlt(X, lambda, D);
    return X * ldlt.solve(X.transpose());
}

double smoother_trace(const Eigen::MatrixXd& X, double lambda, const Eigen::MatrixXd& D)
{
    const auto ldlt = penalized_normal_ldlt(X, lambda, D);
    const Eigen::MatrixXd Z = ldlt.solve(X.transpose());  // n x m
    double trace = 0.0;
    for (int k = 0; k < X.rows(); ++k)
        trace += X.row(k).dot(Z.col(k));
    return trace;
}

double gcv(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys, const KnotVector& knots,
           double lambda, const FitOptions& options)
{
    FitProblem problem{xs, ys, knots, lambda};
    const ConstrainedFit fit = constrained_fit(problem, options);
    if (fit.status != SolveStatus::optimal)
        throw std::runtime_error(std::string("gcv: constrained fit failed with status ") +
                                 to_string(fit.status));

    const Eigen::MatrixXd X = design_matrix(knots, xs);
    const Eigen::MatrixXd D = second_diff_matrix(knots.n_basis);
    const double trace = smoother_trace(X, lambda, D);
    const double m = static_cast<double>(xs.size());
    // tr S = m only in rounding error when the fit interpolates; both cases
    // leave the statistic meaningless
    if (trace >= m * (1.0 - 1e-12))
        throw std::runtime_error("gcv: degenerate degrees of freedom (tr S = " +
                                 std::to_string(trace) + " ~ m = " + std::to_string(m) + ")");
    const double denom = 1.0 - trace / m;
    return asr(xs, ys, fit.model) / (denom * denom);
}

double aic(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys, const SplineModel& model,
           int n_basis, bool* degenerate)
{
    if (degenerate)
        *degenerate = false;
    const double m = static_cast<double>(xs.size());
    const double rss = asr(xs, ys, model) * m;
    if (rss <= 0.0) {
        if (degenerate)
            *degenerate = true;
        return -std::numeric_limits<double>::infinity();
    }
    return m * (std::log(rss / m) + 1.0) + 2.0 * n_basis;
}

FitReport evaluate_cell(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys, int n_interior,
                        double lambda, const FitOptions& options)
{
    FitReport report;
    report.n_interior = n_interior;
    report.lambda = lambda;

    try {
        const KnotVector knots =
            make_uniform_knots(xs.minCoeff(), xs.maxCoeff(), n_interior);
        FitProblem problem{xs, ys, knots, lambda};
        const ConstrainedFit fit = constrained_fit(problem, options);
        report.solver_status = fit.status;
        if (fit.status != SolveStatus::optimal) {
            report.note = std::string("solver status ") + to_string(fit.status);
            return report;
        }
        report.model = fit.model;
        report.asr = asr(xs, ys, fit.model);

        const Eigen::MatrixXd X = design_matrix(knots, xs);
        const Eigen::MatrixXd D = second_diff_matrix(knots.n_basis);
        report.trace_s = smoother_trace(X, lambda, D);
        const double m = static_cast<double>(xs.size());
        if (report.trace_s >= m * (1.0 - 1e-12)) {
            report.note = "degenerate degrees of freedom";
            return report;
        }
        const double denom = 1.0 - report.trace_s / m;
        report.gcv = report.asr / (denom * denom);
        report.aic = aic(xs, ys, fit.model, knots.n_basis, &report.aic_degenerate);
        report.valid = true;
    } catch (const std::exception& err) {
        report.note = err.what();
    }
    return report;
}

SelectionResult select_model(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys,
                             const SelectionGrid& grid, const FitOptions& options)
{
    if (xs.size() == 0 || xs.size() != ys.size())
        throw std::invalid_argument("select_model: data must be nonempty with matching lengths");

    SelectionResult result;
    result.table.reserve(grid.interior_knot_counts.size() * grid.lambda_values.size());

    int best_index = -1;
    for (int n_interior : grid.interior_knot_counts) {
        // inner level: lambda by GCV (ascending grid, strict < keeps the
        // smaller lambda on ties)
        int cell_index = -1;
        for (double lambda : grid.lambda_values) {
            result.table.push_back(evaluate_cell(xs, ys, n_interior, lambda, options));
            const FitReport& cell = result.table.back();
            if (!cell.valid)
                continue;
            if (cell_index < 0 || cell.gcv < result.table[cell_index].gcv)
                cell_index = static_cast<int>(result.table.size()) - 1;
        }
        if (cell_index < 0)
            continue;
        // outer level: knot count by AIC at the selected lambda (ascending,
        // strict < keeps fewer knots on ties)
        if (best_index < 0 || result.table[cell_index].aic < result.table[best_index].aic)
            best_index = cell_index;
    }

    if (best_index < 0)
        throw std::runtime_error("select_model: every grid cell failed");
    result.best = result.table[best_index];
    return result;
}

void write_report_csv(const std::vector<FitReport>& table, std::ostream& out)
{
    out << "n_interior,lambda,asr,trace_s,gcv,aic,status\n";
    for (const FitReport& cell : table) {
        out << cell.n_interior << "," << num17(cell.lambda) << ",";
        if (cell.valid)
            out << num17(cell.asr) << "," << num17(cell.trace_s) << "," << num17(cell.gcv) << ","
                << num17(cell.aic);
        else
            out << ",,,";
        out << "," << to_string(cell.solver_status) << "\n";
    }
}

}  // namespace nnps
