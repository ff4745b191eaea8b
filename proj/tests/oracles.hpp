// Test-only oracles shared by the unit and acceptance suites.  Everything in
// here is deliberately independent of the implementation paths it checks:
// brute-force enumeration, direct polynomial evaluation, and residual
// recomputation from first principles.
#pragma once

#include "nnps/conic.hpp"

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <vector>

namespace nnps::oracles {

// Minimum of c'x over {Ax = b, x >= 0} by enumerating basic solutions.
inline double lp_vertex_min(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                            const Eigen::VectorXd& c)
{
    const int m = static_cast<int>(A.rows());
    const int n = static_cast<int>(A.cols());
    double best = std::numeric_limits<double>::infinity();

    std::vector<int> idx(m);
    std::function<void(int, int)> recurse = [&](int start, int chosen) {
        if (chosen == m) {
            Eigen::MatrixXd basis(m, m);
            for (int j = 0; j < m; ++j)
                basis.col(j) = A.col(idx[j]);
            Eigen::FullPivLU<Eigen::MatrixXd> lu(basis);
            if (!lu.isInvertible())
                return;
            const Eigen::VectorXd xb = lu.solve(b);
            if ((xb.array() < -1e-9).any())
                return;
            double value = 0.0;
            for (int j = 0; j < m; ++j)
                value += c[idx[j]] * xb[j];
            best = std::min(best, value);
            return;
        }
        for (int j = start; j <= n - (m - chosen); ++j) {
            idx[chosen] = j;
            recurse(j + 1, chosen + 1);
        }
    };
    recurse(0, 0);
    return best;
}

struct KktMeasures {
    double pres = 0.0;
    double dres = 0.0;
    double gap = 0.0;
    double cone_viol = 0.0;

    double worst() const { return std::max({pres, dres, gap, cone_viol}); }
};

// Residuals of a claimed optimal solution, recomputed from the program data.
inline KktMeasures kkt_measures(const ConeProgram& prog, const Solution& sol)
{
    KktMeasures out;
    out.pres = (prog.A * sol.x - prog.b).norm() / (1.0 + prog.b.norm());
    out.dres = (prog.A.transpose() * sol.y + sol.s - prog.c).norm() / (1.0 + prog.c.norm());
    const double cx = prog.c.dot(sol.x);
    const double by = prog.b.dot(sol.y);
    out.gap = std::abs(cx - by) / (1.0 + std::abs(cx));
    int offset = 0;
    for (const Cone& cone : prog.cones) {
        out.cone_viol = std::max(out.cone_viol, membership(cone, sol.x.segment(offset, cone.dim)));
        offset += cone.dim;
    }
    return out;
}

// Cubic in degree order 3..0, evaluated by Horner's rule.
inline double cubic_eval(const Eigen::Vector4d& beta, double x)
{
    return ((beta[0] * x + beta[1]) * x + beta[2]) * x + beta[3];
}

inline double cubic_grid_min(const Eigen::Vector4d& beta, double lo, double hi, int n_points)
{
    double minimum = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_points; ++i) {
        const double x = lo + (hi - lo) * i / (n_points - 1);
        minimum = std::min(minimum, cubic_eval(beta, x));
    }
    return minimum;
}

}  // namespace nnps::oracles
