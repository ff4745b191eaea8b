#pragma once

#include "nnps/bspline.hpp"
#include "nnps/conic.hpp"

#include <Eigen/Sparse>

#include <vector>

namespace nnps {

/** Markov-Lukacs certificate for one knot span: the cubic piece equals
 *  (x - t_lo) (C . H) + (t_hi - x) (D . H) with H = [[x^2, x], [x, 1]] and
 *  C = [[c11, c12], [c12, c22]], D = [[d11, d12], [d12, d22]] both PSD.
 */
struct CubicCertificate {
    int interval = 0;  ///< knot position of the span this certifies
    double c11 = 0.0, c22 = 0.0, c12 = 0.0;
    double d11 = 0.0, d22 = 0.0, d12 = 0.0;
};

/** The four linear equations tying a cubic's monomial coefficients
 *  (beta3, beta2, beta1, beta0) to certificate entries, ordered
 *  (c11, c22, c12, d11, d22, d12).  Together with C, D PSD, solvability is
 *  equivalent to nonnegativity of the cubic on [t_lo, t_hi].
 */
struct CubicNonnegConstraints {
    Eigen::Matrix<double, 4, 6> equations;
    Eigen::Vector4d rhs;  ///< beta in degree order 3, 2, 1, 0
    double t_lo = 0.0, t_hi = 0.0;
};

CubicNonnegConstraints cubic_nonneg_constraints(const Eigen::Vector4d& beta, double t_lo,
                                                double t_hi);

/// Monomial coefficients (degree order 3..0) of the cubic a certificate
/// represents; the soundness direction of the equivalence.
Eigen::Vector4d cubic_from_certificate(const CubicCertificate& cert, double t_lo, double t_hi);

/** Homogeneous constraint system coupling spline coefficients to per-interval
 *  certificates.
 *
 *  Columns: [alpha (n_alpha) | per interval: c11, c22, sqrt2*c12, d11, d22,
 *  sqrt2*d12].  The scaled off-diagonal entries make each certificate triple
 *  directly a rotated-Q3 cone member, matching the SOCP models.  Rows come in
 *  blocks of four per interval (degrees 3, 2, 1, 0); the right-hand side is
 *  identically zero.
 */
struct NonnegSystem {
    int n_alpha = 0;
    int n_intervals = 0;
    std::vector<int> interval_positions;  ///< knot position per row block
    Eigen::SparseMatrix<double> equalities;

    int n_cert_cols() const { return 6 * n_intervals; }
    /// Column of the first coordinate of interval i's c-triple (d_side for d).
    int cert_col(int i, bool d_side) const { return n_alpha + 6 * i + (d_side ? 3 : 0); }
};

enum class SpanPolicy {
    reject_empty,   ///< throw on empty spans (fitting paths)
    include_empty,  ///< emit blocks for empty spans too (rank diagnostics)
};

NonnegSystem spline_nonneg_system(const KnotVector& kv,
                                  SpanPolicy policy = SpanPolicy::reject_empty);

/// Numerical rank of the equality matrix: singular values above
/// 1e-10 * sigma_max.
int constraint_rank(const NonnegSystem& system);

/// Minimum of the spline over n_points equally spaced abscissae spanning the
/// base interval; the grid oracle used by nonnegativity audits.
double min_on_grid(const SplineModel& model, int n_points);

/// Outcome of a certificate search for one cubic.
struct CertificateSearch {
    SolveStatus status = SolveStatus::numerical_failure;
    CubicCertificate certificate;
};

/// Decides nonnegativity of a cubic on [t_lo, t_hi] by solving the small
/// feasibility cone program over its certificate variables.
CertificateSearch find_certificate(const Eigen::Vector4d& beta, double t_lo, double t_hi,
                                   double tol = 1e-8);

}  // namespace nnps
