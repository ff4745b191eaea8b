#include "nnps/nonneg.hpp"

#include <cmath>
#include <stdexcept>

namespace nnps {

CubicNonnegConstraints cubic_nonneg_constraints(const Eigen::Vector4d& beta, double t_lo,
                                                double t_hi)
{
    if (!(t_lo < t_hi))
        throw std::invalid_argument("cubic_nonneg_constraints: interval must satisfy t_lo < t_hi");

    CubicNonnegConstraints out;
    out.rhs = beta;
    out.t_lo = t_lo;
    out.t_hi = t_hi;
    Eigen::Matrix<double, 4, 6>& E = out.equations;
    E.setZero();
    //            c11     c22      c12      d11     d22      d12
    E.row(0) <<   1.0,    0.0,     0.0,    -1.0,    0.0,     0.0;
    E.row(1) << -t_lo,    0.0,     2.0,    t_hi,    0.0,    -2.0;
    E.row(2) <<   0.0,    1.0, -2.0 * t_lo, 0.0,   -1.0, 2.0 * t_hi;
    E.row(3) <<   0.0,  -t_lo,     0.0,     0.0,   t_hi,     0.0;
    return out;
}

Eigen::Vector4d cubic_from_certificate(const CubicCertificate& cert, double t_lo, double t_hi)
{
    Eigen::Vector4d beta;
    beta[0] = cert.c11 - cert.d11;
    beta[1] = -t_lo * cert.c11 + 2.0 * cert.c12 + t_hi * cert.d11 - 2.0 * cert.d12;
    beta[2] = cert.c22 - 2.0 * t_lo * cert.c12 - cert.d22 + 2.0 * t_hi * cert.d12;
    beta[3] = -t_lo * cert.c22 + t_hi * cert.d22;
    return beta;
}

NonnegSystem spline_nonneg_system(const KnotVector& kv, SpanPolicy policy)
{
    if (kv.order != 4)
        throw std::invalid_argument("spline_nonneg_system: order-4 knot vector required");

    NonnegSystem sys;
    sys.n_alpha = kv.n_basis;
    for (int p = kv.first_span(); p <= kv.last_span(); ++p) {
        if (kv.span_empty(p)) {
            if (policy == SpanPolicy::reject_empty)
                throw std::invalid_argument("spline_nonneg_system: degenerate interval at span " +
                                            std::to_string(p));
        }
        sys.interval_positions.push_back(p);
    }
    sys.n_intervals = static_cast<int>(sys.interval_positions.size());

    const double sqrt2 = std::sqrt(2.0);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(sys.n_intervals * 28);
    for (int i = 0; i < sys.n_intervals; ++i) {
        const int p = sys.interval_positions[i];
        const IntervalPolyCoeffs pc = piecewise_coeffs_unchecked(kv, p);
        const double t_lo = kv.knots[p];
        const double t_hi = kv.knots[p + 1];
        const int row0 = 4 * i;

        // alpha columns: rows ordered by degree 3, 2, 1, 0
        for (int v = 0; v < 4; ++v) {
            const int alpha_idx = pc.first_alpha + v;
            if (alpha_idx < 0 || alpha_idx >= sys.n_alpha)
                continue;
            for (int u = 0; u < 4; ++u)
                if (pc.a(u, v) != 0.0)
                    trip.emplace_back(row0 + (3 - u), alpha_idx, pc.a(u, v));
        }

        // certificate columns in cone coordinates (c11, c22, sqrt2*c12, ...):
        // the negated right-hand sides of the coupling equations
        const int c0 = sys.cert_col(i, false);
        const int d0 = sys.cert_col(i, true);
        trip.emplace_back(row0 + 0, c0 + 0, -1.0);
        trip.emplace_back(row0 + 0, d0 + 0, 1.0);

        trip.emplace_back(row0 + 1, c0 + 0, t_lo);
        trip.emplace_back(row0 + 1, c0 + 2, -sqrt2);
        trip.emplace_back(row0 + 1, d0 + 0, -t_hi);
        trip.emplace_back(row0 + 1, d0 + 2, sqrt2);

        trip.emplace_back(row0 + 2, c0 + 1, -1.0);
        trip.emplace_back(row0 + 2, c0 + 2, sqrt2 * t_lo);
        trip.emplace_back(row0 + 2, d0 + 1, 1.0);
        trip.emplace_back(row0 + 2, d0 + 2, -sqrt2 * t_hi);

        trip.emplace_back(row0 + 3, c0 + 1, t_lo);
        trip.emplace_back(row0 + 3, d0 + 1, -t_hi);
    }

    sys.equalities.resize(4 * sys.n_intervals, sys.n_alpha + sys.n_cert_cols());
    sys.equalities.setFromTriplets(trip.begin(), trip.end());
    sys.equalities.makeCompressed();
    return sys;
}

int constraint_rank(const NonnegSystem& system)
{
    const Eigen::MatrixXd dense(system.equalities);
    if (dense.size() == 0)
        return 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(dense);
    const Eigen::VectorXd& sigma = svd.singularValues();
    const double threshold = 1e-10 * sigma[0];
    int rank = 0;
    for (int i = 0; i < sigma.size(); ++i)
        if (sigma[i] > threshold)
            ++rank;
    return rank;
}

double min_on_grid(const SplineModel& model, int n_points)
{
    if (n_points < 2)
        throw std::invalid_argument("min_on_grid: need at least two points");
    const double lo = model.knots.x_min();
    const double hi = model.knots.x_max();
    double minimum = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_points; ++i) {
        const double x =
            i == n_points - 1 ? hi : std::min(hi, lo + (hi - lo) * i / (n_points - 1));
        minimum = std::min(minimum, eval_spline(model, x));
    }
    return minimum;
}

CertificateSearch find_certificate(const Eigen::Vector4d& beta, double t_lo, double t_hi,
                                   double tol)
{
    const CubicNonnegConstraints cc = cubic_nonneg_constraints(beta, t_lo, t_hi);

    // feasibility program over the cone coordinates (c11, c22, sqrt2*c12) and
    // (d11, d22, sqrt2*d12)
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    ConeProgram prog;
    prog.c = Eigen::VectorXd::Zero(6);
    prog.b = cc.rhs;
    Eigen::MatrixXd E = cc.equations;
    E.col(2) *= inv_sqrt2;  // c12 -> sqrt2*c12 coordinate
    E.col(5) *= inv_sqrt2;
    prog.A = E.sparseView();
    prog.cones = {{ConeKind::rotated_second_order, 3}, {ConeKind::rotated_second_order, 3}};

    const Solution sol = solve(prog, tol, 200);

    CertificateSearch out;
    out.status = sol.status;
    if (sol.status == SolveStatus::optimal) {
        out.certificate.c11 = sol.x[0];
        out.certificate.c22 = sol.x[1];
        out.certificate.c12 = sol.x[2] * inv_sqrt2;
        out.certificate.d11 = sol.x[3];
        out.certificate.d22 = sol.x[4];
        out.certificate.d12 = sol.x[5] * inv_sqrt2;
    }
    return out;
}

}  // namespace nnps
