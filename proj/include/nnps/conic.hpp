#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <iosfwd>
#include <string>
#include <vector>

namespace nnps {

enum class ConeKind { free, nonnegative, second_order, rotated_second_order };

/// One block of the variable partition.  second_order requires dim >= 2,
/// rotated_second_order dim >= 3, the others dim >= 1.
struct Cone {
    ConeKind kind;
    int dim;
};

/// Standard-form conic problem:  min c'x  s.t.  A x = b,  x in K,
/// where K is the product of `cones` over consecutive coordinate blocks.
struct ConeProgram {
    Eigen::VectorXd c;
    Eigen::SparseMatrix<double> A;
    Eigen::VectorXd b;
    std::vector<Cone> cones;

    int n_vars() const { return static_cast<int>(c.size()); }
    int n_rows() const { return static_cast<int>(b.size()); }

    /// Throws std::invalid_argument when dimensions or cone sizes disagree.
    void validate() const;
};

enum class SolveStatus {
    optimal,
    primal_infeasible,
    dual_infeasible,
    max_iterations,
    numerical_failure,
};

const char* to_string(SolveStatus status);

struct Residuals {
    double primal = 0.0;
    double dual = 0.0;
    double gap = 0.0;
};

/** Solver output.
 *
 *  For status optimal, (x, y, s) is a primal-dual pair: x is cone-feasible,
 *  y are the equality multipliers and s the dual slack (A'y + s = c, s in K*,
 *  zero on free coordinates), with all residuals at or below the requested
 *  tolerance.  For primal_infeasible, y carries a Farkas certificate scaled
 *  to b'y = 1 with A'y + s ~ 0, s in K*.  For dual_infeasible, x carries an
 *  unbounded ray scaled to c'x = -1 with A x ~ 0 and x cone-feasible.
 */
struct Solution {
    SolveStatus status = SolveStatus::numerical_failure;
    Eigen::VectorXd x;
    Eigen::VectorXd y;
    Eigen::VectorXd s;
    double objective = 0.0;
    Residuals residuals;
    int iterations = 0;
    std::string message;
};

struct SolverSettings {
    double tol = 1e-8;        ///< primal/dual/gap/membership tolerance
    int max_iter = 100;
    double tol_target = 0.0;  ///< internal accuracy goal; 0 = max(1e-12, 1e-4*tol).
                              ///< Iterations continue past tol toward this until
                              ///< progress stops; tol remains the acceptance bar.
    double static_reg = 1e-8; ///< quasi-definite KKT regularization
    int refine_steps = 2;     ///< iterative refinement cap per KKT solve
    double step_scale = 0.99; ///< fraction-to-boundary scaling
    bool verbose = false;
};

/** Violation of cone membership; 0 means x lies in the cone.
 *
 *  second_order measures max(0, ||x_tail|| - x0).  rotated_second_order is
 *  measured through the 45-degree rotation, which equals the normalized
 *  quadratic violation max((||x_hat||^2 - 2 x0 x1) / (u0 + ||(u1, x_hat)||),
 *  -x0, -x1) clamped at zero, written with u = rotate_to_standard(x).
 */
double membership(const Cone& cone, const Eigen::VectorXd& x);

/// 45-degree rotation ((x0+x1)/sqrt2, (x0-x1)/sqrt2, x_hat); maps the rotated
/// cone onto the standard second-order cone isometrically.
Eigen::VectorXd rotate_to_standard(const Eigen::VectorXd& x);

/** Solve with an embedded primal-dual interior-point method (homogeneous
 *  self-dual embedding, Nesterov-Todd scaling, Mehrotra predictor-corrector).
 *  Deterministic: identical inputs produce identical iterate sequences.
 */
Solution solve(const ConeProgram& prog, const SolverSettings& settings);
Solution solve(const ConeProgram& prog, double tol = 1e-8, int max_iter = 100);

/// Plain-text dump of a program (grammar documented in the README); every
/// numeric value is printed with 17 significant digits.
void dump_program(const ConeProgram& prog, std::ostream& out);

/// Inverse of dump_program; throws std::runtime_error on malformed input.
ConeProgram parse_program(std::istream& in);

}  // namespace nnps
