#include "nnps/formulate.hpp"

#include <cmath>
#include <stdexcept>

namespace nnps {

namespace {

using Eigen::VectorXd;
using Triplets = std::vector<Eigen::Triplet<double>>;

void append_nonneg_rows(const NonnegSystem& sys, const VariableLayout& layout, Triplets& trip)
{
    // nonneg system columns: [alpha | certificates]; remap certificates to
    // their position in the fitting layout
    for (int col = 0; col < sys.equalities.outerSize(); ++col)
        for (Eigen::SparseMatrix<double>::InnerIterator it(sys.equalities, col); it; ++it) {
            const int target = col < sys.n_alpha
                                   ? layout.alpha_start + col
                                   : layout.cert_start + (col - sys.n_alpha);
            trip.emplace_back(it.row(), target, it.value());
        }
}

void append_cert_cones(const VariableLayout& layout, std::vector<Cone>& cones)
{
    for (int i = 0; i < 2 * layout.n_intervals; ++i)
        cones.push_back({ConeKind::rotated_second_order, 3});
}

}  // namespace

void FitProblem::validate() const
{
    if (x.size() != y.size())
        throw std::invalid_argument("FitProblem: x and y lengths differ");
    if (x.size() < 1)
        throw std::invalid_argument("FitProblem: at least one sample required");
    if (!(lambda >= 0.0))
        throw std::invalid_argument("FitProblem: lambda must be nonnegative");
    for (int i = 0; i < x.size(); ++i)
        if (!(x[i] >= knots.x_min() && x[i] <= knots.x_max()))
            throw std::domain_error("FitProblem: x[" + std::to_string(i) + "] = " +
                                    std::to_string(x[i]) + " outside the knot range");
}

Eigen::MatrixXd second_diff_matrix(int n)
{
    if (n < 3)
        throw std::invalid_argument("second_diff_matrix: need n >= 3");
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n - 2);
    for (int q = 0; q < n - 2; ++q) {
        D(q, q) = 1.0;
        D(q + 1, q) = -2.0;
        D(q + 2, q) = 1.0;
    }
    return D;
}

double pspline_loss(const FitProblem& problem, const Eigen::VectorXd& alpha)
{
    const Eigen::MatrixXd X = design_matrix(problem.knots, problem.x);
    const Eigen::MatrixXd D = second_diff_matrix(problem.knots.n_basis);
    return (problem.y - X * alpha).squaredNorm() +
           problem.lambda * (D.transpose() * alpha).squaredNorm();
}

SplineModel unconstrained_fit(const FitProblem& problem)
{
    problem.validate();
    const Eigen::MatrixXd X = design_matrix(problem.knots, problem.x);
    const Eigen::MatrixXd D = second_diff_matrix(problem.knots.n_basis);
    const Eigen::MatrixXd normal =
        X.transpose() * X + problem.lambda * (D * D.transpose());

    Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
    const double pivot_min = ldlt.vectorD().minCoeff();
    const double pivot_max = ldlt.vectorD().maxCoeff();
    if (!(pivot_min > pivot_max * 1e-13))
        throw std::runtime_error("unconstrained_fit: normal matrix is rank deficient "
                                 "(smallest pivot " +
                                 std::to_string(pivot_min) + ")");
    const VectorXd alpha = ldlt.solve(X.transpose() * problem.y);
    return {problem.knots, alpha};
}

BuiltModel build_model_I(const FitProblem& problem)
{
    problem.validate();
    if (!interior_knots_distinct(problem.knots))
        throw std::invalid_argument("build_model_I: interior knots must be distinct");

    const NonnegSystem sys = spline_nonneg_system(problem.knots);
    const int n = problem.knots.n_basis;
    const int m = problem.n_samples();
    const int n_pen = n - 2;

    VariableLayout L;
    L.n_alpha = n;
    L.n_intervals = sys.n_intervals;
    L.m_data = m;
    L.n_penalty = n_pen;
    L.alpha_start = 0;
    L.cert_start = n;
    L.z_index = n + 6 * sys.n_intervals;
    L.resid_start = L.z_index + 1;
    L.penalty_start = L.resid_start + m;
    L.total_vars = L.penalty_start + n_pen;

    const int nonneg_rows = 4 * sys.n_intervals;
    const int total_rows = nonneg_rows + m + n_pen;

    ConeProgram prog;
    prog.c = VectorXd::Zero(L.total_vars);
    prog.c[L.z_index] = 1.0;
    prog.b = VectorXd::Zero(total_rows);

    Triplets trip;
    append_nonneg_rows(sys, L, trip);

    // residual definitions r_p + (X alpha)_p = y_p
    const Eigen::MatrixXd X = design_matrix(problem.knots, problem.x);
    for (int p = 0; p < m; ++p) {
        const int row = nonneg_rows + p;
        trip.emplace_back(row, L.resid_start + p, 1.0);
        for (int j = 0; j < n; ++j)
            if (X(p, j) != 0.0)
                trip.emplace_back(row, L.alpha_start + j, X(p, j));
        prog.b[row] = problem.y[p];
    }

    // penalty definitions w_q - sqrt(lambda) (D' alpha)_q = 0
    const double sqrt_lambda = std::sqrt(problem.lambda);
    for (int q = 0; q < n_pen; ++q) {
        const int row = nonneg_rows + m + q;
        trip.emplace_back(row, L.penalty_start + q, 1.0);
        if (sqrt_lambda != 0.0) {
            trip.emplace_back(row, L.alpha_start + q, -sqrt_lambda);
            trip.emplace_back(row, L.alpha_start + q + 1, 2.0 * sqrt_lambda);
            trip.emplace_back(row, L.alpha_start + q + 2, -sqrt_lambda);
        }
    }

    prog.A.resize(total_rows, L.total_vars);
    prog.A.setFromTriplets(trip.begin(), trip.end());

    prog.cones = {{ConeKind::free, n}};
    append_cert_cones(L, prog.cones);
    prog.cones.push_back({ConeKind::second_order, 1 + m + n_pen});

    return {std::move(prog), L};
}

BuiltModel build_model_II(const FitProblem& problem)
{
    problem.validate();
    if (!interior_knots_distinct(problem.knots))
        throw std::invalid_argument("build_model_II: interior knots must be distinct");

    const NonnegSystem sys = spline_nonneg_system(problem.knots);
    const int n = problem.knots.n_basis;
    const int m = problem.n_samples();
    const int n_pen = n - 2;

    VariableLayout L;
    L.n_alpha = n;
    L.n_intervals = sys.n_intervals;
    L.m_data = m;
    L.n_penalty = n_pen;
    L.alpha_start = 0;
    L.u_start = n;
    L.v_start = n + m;
    L.cert_start = n + m + n_pen;
    L.resid_start = L.cert_start + 6 * sys.n_intervals;  // Q3 triples (u+1, u-1, 2r)
    L.penalty_start = L.resid_start + 3 * m;
    L.total_vars = L.penalty_start + 3 * n_pen;

    const int nonneg_rows = 4 * sys.n_intervals;
    const int total_rows = nonneg_rows + 3 * m + 3 * n_pen;

    ConeProgram prog;
    prog.c = VectorXd::Zero(L.total_vars);
    prog.c.segment(L.u_start, m).setOnes();
    prog.c.segment(L.v_start, n_pen).setConstant(problem.lambda);
    prog.b = VectorXd::Zero(total_rows);

    Triplets trip;
    append_nonneg_rows(sys, L, trip);

    const Eigen::MatrixXd X = design_matrix(problem.knots, problem.x);
    int row = nonneg_rows;
    for (int p = 0; p < m; ++p) {
        const int a_p = L.resid_start + 3 * p;
        // (u_p + 1, u_p - 1, 2 r_p) in Q3
        trip.emplace_back(row, a_p + 0, 1.0);
        trip.emplace_back(row, L.u_start + p, -1.0);
        prog.b[row++] = 1.0;
        trip.emplace_back(row, a_p + 1, 1.0);
        trip.emplace_back(row, L.u_start + p, -1.0);
        prog.b[row++] = -1.0;
        trip.emplace_back(row, a_p + 2, 1.0);
        for (int j = 0; j < n; ++j)
            if (X(p, j) != 0.0)
                trip.emplace_back(row, L.alpha_start + j, 2.0 * X(p, j));
        prog.b[row++] = 2.0 * problem.y[p];
    }
    for (int q = 0; q < n_pen; ++q) {
        const int e_q = L.penalty_start + 3 * q;
        // (v_q + 1, v_q - 1, 2 (D' alpha)_q) in Q3
        trip.emplace_back(row, e_q + 0, 1.0);
        trip.emplace_back(row, L.v_start + q, -1.0);
        prog.b[row++] = 1.0;
        trip.emplace_back(row, e_q + 1, 1.0);
        trip.emplace_back(row, L.v_start + q, -1.0);
        prog.b[row++] = -1.0;
        trip.emplace_back(row, e_q + 2, 1.0);
        trip.emplace_back(row, L.alpha_start + q, -2.0);
        trip.emplace_back(row, L.alpha_start + q + 1, 4.0);
        trip.emplace_back(row, L.alpha_start + q + 2, -2.0);
        prog.b[row++] = 0.0;
    }

    prog.A.resize(total_rows, L.total_vars);
    prog.A.setFromTriplets(trip.begin(), trip.end());

    prog.cones = {{ConeKind::free, n + m + n_pen}};
    append_cert_cones(L, prog.cones);
    for (int i = 0; i < m + n_pen; ++i)
        prog.cones.push_back({ConeKind::second_order, 3});

    return {std::move(prog), L};
}

ExtractedModel extract_model(const Solution& solution, const VariableLayout& layout,
                             const KnotVector& knots)
{
    if (solution.status != SolveStatus::optimal)
        throw std::runtime_error(std::string("extract_model: solver status ") +
                                 to_string(solution.status));

    ExtractedModel out;
    out.model.knots = knots;
    out.model.alpha = solution.x.segment(layout.alpha_start, layout.n_alpha);

    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    out.certificates.reserve(layout.n_intervals);
    for (int i = 0; i < layout.n_intervals; ++i) {
        CubicCertificate cert;
        cert.interval = knots.first_span() + i;
        const int c0 = layout.cert_col(i, false);
        const int d0 = layout.cert_col(i, true);
        cert.c11 = solution.x[c0 + 0];
        cert.c22 = solution.x[c0 + 1];
        cert.c12 = solution.x[c0 + 2] * inv_sqrt2;
        cert.d11 = solution.x[d0 + 0];
        cert.d22 = solution.x[d0 + 1];
        cert.d12 = solution.x[d0 + 2] * inv_sqrt2;
        out.certificates.push_back(cert);
    }
    return out;
}

static ConstrainedFit constrained_fit_scaled(const FitProblem& problem, const FitOptions& options,
                                             double y_scale)
{
    FitProblem scaled = problem;
    scaled.y /= y_scale;
    const BuiltModel built = options.model == FitModel::model_I ? build_model_I(scaled)
                                                                : build_model_II(scaled);
    const Solution sol = solve(built.program, options.solver);

    ConstrainedFit out;
    out.status = sol.status;
    out.iterations = sol.iterations;
    out.objective = options.model == FitModel::model_I ? sol.objective * y_scale
                                                       : sol.objective * y_scale * y_scale;
    if (sol.status == SolveStatus::optimal) {
        ExtractedModel extracted = extract_model(sol, built.layout, problem.knots);
        out.model = std::move(extracted.model);
        out.model.alpha *= y_scale;
        out.certificates = std::move(extracted.certificates);
        for (CubicCertificate& cert : out.certificates) {
            cert.c11 *= y_scale;
            cert.c22 *= y_scale;
            cert.c12 *= y_scale;
            cert.d11 *= y_scale;
            cert.d22 *= y_scale;
            cert.d12 *= y_scale;
        }
    }
    return out;
}

ConstrainedFit constrained_fit(const FitProblem& problem, const FitOptions& options)
{
    problem.validate();
    // normalize only when the data is large: the convergence measures carry
    // 1 + |.| denominators, so small-magnitude data is best left alone
    const double y_scale = std::max(1.0, problem.y.cwiseAbs().maxCoeff());
    return constrained_fit_scaled(problem, options, y_scale);
}

}  // namespace nnps
