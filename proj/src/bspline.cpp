#include "nnps/bspline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nnps {

namespace {

// Reciprocal with the repeated-knot convention 1/(t_j - t_l) = 0 for t_j = t_l.
inline double recip(double d) { return d == 0.0 ? 0.0 : 1.0 / d; }

// Order-1 indicator of [t_i, t_{i+1}), closed on the right when t_{i+1} equals
// the final knot value (the last nonempty span absorbs the right endpoint).
inline double indicator(const KnotVector& kv, int i, double x)
{
    const double lo = kv.knots[i], hi = kv.knots[i + 1];
    if (lo <= x && x < hi)
        return 1.0;
    if (x == hi && lo < hi && hi == kv.knots[kv.knots.size() - 1])
        return 1.0;
    return 0.0;
}

inline double omega(const KnotVector& kv, int i, int k, double x)
{
    const double den = kv.knots[i + k - 1] - kv.knots[i];
    return den == 0.0 ? 0.0 : (x - kv.knots[i]) / den;
}

void check_in_range(const KnotVector& kv, double x)
{
    if (!(x >= kv.x_min() && x <= kv.x_max()))
        throw std::domain_error("x = " + std::to_string(x) + " outside knot range [" +
                                std::to_string(kv.x_min()) + ", " + std::to_string(kv.x_max()) + "]");
}

// Largest nonempty span position p with knots[p] <= x; x at or beyond the last
// nonempty span maps onto it (right-closed evaluation).
int find_span(const KnotVector& kv, double x)
{
    const int lo = kv.first_span(), hi = kv.last_span();
    const double* begin = kv.knots.data();
    int p = static_cast<int>(std::upper_bound(begin + lo, begin + hi + 1, x) - begin) - 1;
    p = std::clamp(p, lo, hi);
    while (p > lo && kv.span_empty(p))
        --p;
    return p;
}

// Triangular de Boor scheme: values of the `order` possibly nonzero basis
// functions at x.  The first contributing basis index is span - order + 1.
int basis_window(const KnotVector& kv, double x, Eigen::VectorXd& values)
{
    const int k = kv.order;
    const int span = find_span(kv, x);
    values.setZero(k);
    values[0] = 1.0;
    for (int j = 1; j < k; ++j) {
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double right = kv.knots[span + r + 1] - x;
            const double left = x - kv.knots[span + 1 - j + r];
            const double temp = values[r] / (right + left);
            values[r] = saved + right * temp;
            saved = left * temp;
        }
        values[j] = saved;
    }
    return span;
}

}  // namespace

KnotVector make_uniform_knots(double x_min, double x_max, int n_interior)
{
    if (!(x_min < x_max))
        throw std::invalid_argument("make_uniform_knots: x_min must be < x_max");
    if (n_interior < 0)
        throw std::invalid_argument("make_uniform_knots: n_interior must be >= 0");

    const int k = 4;
    const int n_basis = n_interior + k;
    Eigen::VectorXd t(n_basis + k);
    const double delta = (x_max - x_min) / (n_interior + 1);
    for (int i = 0; i < k; ++i) {
        t[i] = x_min;
        t[n_basis + i] = x_max;
    }
    for (int i = 0; i < n_interior; ++i)
        t[k + i] = x_min + (i + 1) * delta;

    return KnotVector{std::move(t), k, n_basis};
}

KnotVector knots_from_sequence(Eigen::VectorXd knots, int order)
{
    if (order < 1)
        throw std::invalid_argument("knots_from_sequence: order must be >= 1");
    const int n_basis = static_cast<int>(knots.size()) - order;
    if (n_basis < order)
        throw std::invalid_argument("knots_from_sequence: too few knots for the requested order");
    for (int i = 0; i + 1 < knots.size(); ++i)
        if (knots[i] > knots[i + 1])
            throw std::invalid_argument("knots_from_sequence: knots must be nondecreasing");
    return KnotVector{std::move(knots), order, n_basis};
}

bool interior_knots_distinct(const KnotVector& kv)
{
    for (int p = kv.first_span(); p <= kv.last_span(); ++p)
        if (kv.span_empty(p))
            return false;
    return true;
}

double eval_basis(const KnotVector& kv, int k, int i, double x)
{
    if (k < 1)
        throw std::out_of_range("eval_basis: order must be >= 1");
    if (i < 0 || i >= static_cast<int>(kv.knots.size()) - k)
        throw std::out_of_range("eval_basis: basis index " + std::to_string(i) +
                                " out of range for order " + std::to_string(k));
    if (!std::isfinite(x))
        throw std::out_of_range("eval_basis: x must be finite");

    if (k == 1)
        return indicator(kv, i, x);
    const double w_lo = omega(kv, i, k, x);
    const double w_hi = omega(kv, i + 1, k, x);
    return w_lo * eval_basis(kv, k - 1, i, x) + (1.0 - w_hi) * eval_basis(kv, k - 1, i + 1, x);
}

Eigen::VectorXd eval_all_basis(const KnotVector& kv, double x)
{
    check_in_range(kv, x);
    Eigen::VectorXd window;
    const int span = basis_window(kv, x, window);

    Eigen::VectorXd result = Eigen::VectorXd::Zero(kv.n_basis);
    const int first = span - kv.order + 1;
    for (int j = 0; j < kv.order; ++j) {
        const int idx = first + j;
        if (idx >= 0 && idx < kv.n_basis)
            result[idx] = window[j];
    }
    return result;
}

Eigen::MatrixXd design_matrix(const KnotVector& kv, const Eigen::VectorXd& xs)
{
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(xs.size(), kv.n_basis);
    Eigen::VectorXd window;
    for (int i = 0; i < xs.size(); ++i) {
        if (!(xs[i] >= kv.x_min() && xs[i] <= kv.x_max()))
            throw std::domain_error("design_matrix: x[" + std::to_string(i) + "] = " +
                                    std::to_string(xs[i]) + " outside knot range");
        const int span = basis_window(kv, xs[i], window);
        const int first = span - kv.order + 1;
        for (int j = 0; j < kv.order; ++j) {
            const int idx = first + j;
            if (idx >= 0 && idx < kv.n_basis)
                X(i, idx) = window[j];
        }
    }
    return X;
}

IntervalPolyCoeffs piecewise_coeffs_unchecked(const KnotVector& kv, int p)
{
    if (kv.order != 4)
        throw std::invalid_argument("piecewise_coeffs: knot vector must have order 4");
    if (p < 2 || p + 3 >= kv.knots.size())
        throw std::out_of_range("piecewise_coeffs: span index " + std::to_string(p) + " out of range");

    const Eigen::VectorXd& t = kv.knots;
    const double t_m2 = t[p - 2], t_m1 = t[p - 1], t0 = t[p];
    const double t1 = t[p + 1], t2 = t[p + 2], t3 = t[p + 3];

    // Reciprocal triple products of knot differences; each factor obeys the
    // repeated-knot convention individually.
    const double r0 = recip(t1 - t_m2) * recip(t1 - t_m1) * recip(t1 - t0);
    const double r1 = recip(t2 - t_m1) * recip(t1 - t_m1) * recip(t1 - t0);
    const double r2 = recip(t2 - t_m1) * recip(t2 - t0) * recip(t1 - t0);
    const double r3 = recip(t3 - t0) * recip(t2 - t0) * recip(t1 - t0);

    IntervalPolyCoeffs pc;
    pc.interval = p;
    pc.first_alpha = p - 3;
    Eigen::Matrix4d& a = pc.a;

    a(3, 0) = -r0;
    a(2, 0) = 3.0 * t1 * r0;
    a(1, 0) = -3.0 * t1 * t1 * r0;
    a(0, 0) = t1 * t1 * t1 * r0;

    a(3, 1) = r0 + r1 + r2;
    a(2, 1) = -(t_m2 + 2.0 * t1) * r0 - (t_m1 + t1 + t2) * r1 - (t0 + 2.0 * t2) * r2;
    a(1, 1) = (2.0 * t_m2 * t1 + t1 * t1) * r0 + (t_m1 * t1 + t_m1 * t2 + t1 * t2) * r1 +
              (2.0 * t0 * t2 + t2 * t2) * r2;
    a(0, 1) = -t_m2 * t1 * t1 * r0 - t_m1 * t1 * t2 * r1 - t0 * t2 * t2 * r2;

    a(3, 2) = -r3 - r1 - r2;
    a(2, 2) = (t3 + 2.0 * t0) * r3 + (t1 + 2.0 * t_m1) * r1 + (t2 + t0 + t_m1) * r2;
    a(1, 2) = -(t0 * t0 + 2.0 * t3 * t0) * r3 - (2.0 * t1 * t_m1 + t_m1 * t_m1) * r1 -
              (t2 * (t_m1 + t0) + t_m1 * t0) * r2;
    a(0, 2) = t3 * t0 * t0 * r3 + t1 * t_m1 * t_m1 * r1 + t2 * t0 * t_m1 * r2;

    a(3, 3) = r3;
    a(2, 3) = -3.0 * t0 * r3;
    a(1, 3) = 3.0 * t0 * t0 * r3;
    a(0, 3) = -t0 * t0 * t0 * r3;

    // Columns whose alpha index does not exist are dropped from the table.
    for (int v = 0; v < 4; ++v) {
        const int alpha_idx = pc.first_alpha + v;
        if (alpha_idx < 0 || alpha_idx >= kv.n_basis)
            a.col(v).setZero();
    }
    return pc;
}

IntervalPolyCoeffs piecewise_coeffs(const KnotVector& kv, int p)
{
    if (p < 2 || p + 3 >= kv.knots.size())
        throw std::out_of_range("piecewise_coeffs: span index " + std::to_string(p) + " out of range");
    if (kv.span_empty(p))
        throw std::invalid_argument("piecewise_coeffs: degenerate interval at span " + std::to_string(p));
    return piecewise_coeffs_unchecked(kv, p);
}

Eigen::Matrix4d uniform_piecewise_coeffs(double t_i, double delta)
{
    if (!(delta > 0.0))
        throw std::invalid_argument("uniform_piecewise_coeffs: spacing must be positive");

    const double t = t_i, d = delta;
    const double d3 = 6.0 * d * d * d;   // 6*delta^3
    const double h3 = 2.0 * d * d * d;   // 2*delta^3

    Eigen::Matrix4d a;
    a(3, 0) = -1.0 / d3;
    a(2, 0) = (t + d) / h3;
    a(1, 0) = -(t + d) * (t + d) / h3;
    a(0, 0) = (t + d) * (t + d) * (t + d) / d3;

    a(3, 1) = 1.0 / h3;
    a(2, 1) = -(3.0 * t + 2.0 * d) / h3;
    a(1, 1) = (3.0 * t * t + 4.0 * t * d) / h3;
    a(0, 1) = (-3.0 * t * t * t - 6.0 * t * t * d + 4.0 * d * d * d) / d3;

    a(3, 2) = -1.0 / h3;
    a(2, 2) = (3.0 * t + d) / h3;
    a(1, 2) = (-3.0 * t * t - 2.0 * t * d + d * d) / h3;
    a(0, 2) = (3.0 * t * t * t + 3.0 * t * t * d - 3.0 * t * d * d + d * d * d) / d3;

    a(3, 3) = 1.0 / d3;
    a(2, 3) = -t / h3;
    a(1, 3) = t * t / h3;
    a(0, 3) = -t * t * t / d3;
    return a;
}

double eval_spline(const SplineModel& model, double x)
{
    const KnotVector& kv = model.knots;
    check_in_range(kv, x);
    Eigen::VectorXd window;
    const int span = basis_window(kv, x, window);
    const int first = span - kv.order + 1;
    double value = 0.0;
    for (int j = 0; j < kv.order; ++j) {
        const int idx = first + j;
        if (idx >= 0 && idx < kv.n_basis)
            value += model.alpha[idx] * window[j];
    }
    return value;
}

}  // namespace nnps
