#pragma once

#include <Eigen/Dense>

namespace nnps {

/** Nondecreasing knot sequence together with the spline order it serves.
 *
 *  The sequence has length n_basis + order.  Fitting paths use order 4 with
 *  full boundary multiplicity (the first and last knot each repeated `order`
 *  times), so the base interval [x_min(), x_max()] coincides with the knot
 *  range and the spline interpolates its first/last coefficient at the ends.
 */
struct KnotVector {
    Eigen::VectorXd knots;
    int order = 4;
    int n_basis = 0;

    double x_min() const { return knots[order - 1]; }
    double x_max() const { return knots[n_basis]; }

    /// Knot positions p such that [knots[p], knots[p+1]) lies in the base
    /// interval; includes empty spans when interior knots repeat.
    int first_span() const { return order - 1; }
    int last_span() const { return n_basis - 1; }

    bool span_empty(int p) const { return knots[p] == knots[p + 1]; }

    /// Spacing of an equally spaced interior grid; meaningful only for
    /// knot vectors built by make_uniform_knots.
    double spacing() const { return knots[order] - knots[order - 1]; }
};

/// Order-4 knot vector on [x_min, x_max] with `n_interior` equally spaced
/// interior knots and 4-fold boundary multiplicity.  n_basis = n_interior + 4.
KnotVector make_uniform_knots(double x_min, double x_max, int n_interior);

/// Wrap an arbitrary nondecreasing sequence; n_basis = length - order.
KnotVector knots_from_sequence(Eigen::VectorXd knots, int order);

/// True when every interior knot of the base interval is simple.
bool interior_knots_distinct(const KnotVector& kv);

/** Basis function value B_{i,k}(x) by the Cox–de Boor recursion, straight
 *  from the definition with the 0/0 -> 0 convention for repeated knots.
 *  Indices are zero-based; valid i satisfies 0 <= i < knots.size() - k.
 *  Intentionally unoptimized; the batched path below is the fast one and is
 *  tested against this.
 */
double eval_basis(const KnotVector& kv, int k, int i, double x);

/// All n_basis values B_{i,order}(x) via the triangular de Boor scheme.
/// x must lie in [x_min, x_max]; the right endpoint is treated as belonging
/// to the last nonempty span so boundary data stays representable.
Eigen::VectorXd eval_all_basis(const KnotVector& kv, double x);

/// Row i = basis values at xs[i].  Each row sums to 1 and has at most
/// `order` nonzeros.  Throws std::domain_error naming the offending index
/// when some abscissa falls outside the base interval.
Eigen::MatrixXd design_matrix(const KnotVector& kv, const Eigen::VectorXd& xs);

/** Monomial coefficients of the order-4 spline on one knot span.
 *
 *  On [knots[p], knots[p+1]) the spline equals
 *      sum_{v=0..3} alpha[first_alpha + v] * sum_{u=0..3} a(u, v) x^u,
 *  with columns whose alpha index falls outside [0, n_basis) zeroed.
 */
struct IntervalPolyCoeffs {
    int interval = 0;     ///< knot position p of the span [t_p, t_{p+1})
    int first_alpha = 0;  ///< alpha index of column v = 0 (may be negative)
    Eigen::Matrix4d a = Eigen::Matrix4d::Zero();
};

/// Coefficient table for the span at knot position p (general knots).
/// Throws on empty spans; rank diagnostics use the unchecked variant.
IntervalPolyCoeffs piecewise_coeffs(const KnotVector& kv, int p);

/// Same as piecewise_coeffs but admits empty spans, where the repeated-knot
/// convention zeroes the affected reciprocal factors.
IntervalPolyCoeffs piecewise_coeffs_unchecked(const KnotVector& kv, int p);

/// Simplified table for equally spaced knots: span [t_i, t_i + delta) with
/// uniform spacing delta on both sides.  Column v corresponds to the alpha
/// offset v - 3 relative to the span index.
Eigen::Matrix4d uniform_piecewise_coeffs(double t_i, double delta);

/// Fitted object: order-4 coefficients over a knot vector.
struct SplineModel {
    KnotVector knots;
    Eigen::VectorXd alpha;
};

double eval_spline(const SplineModel& model, double x);

}  // namespace nnps
