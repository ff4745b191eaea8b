// Embedded interior-point solver for the standard-form cone programs built by
// this library: a primal-dual path-following method on the homogeneous
// self-dual embedding, with Nesterov-Todd scaling and Mehrotra
// predictor-corrector steps.  Free variables live natively in the KKT system;
// rotated cones are rotated to standard second-order cones at presolve, so the
// core only ever sees {free, nonnegative, second_order}.  KKT systems are
// solved by a sparse LDL' factorization of the statically regularized
// quasi-definite matrix plus a bounded number of iterative-refinement steps.

#include "nnps/conic.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace nnps {

namespace {

using Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

constexpr double kStepMin = 1e-6;
constexpr double kStepMax = 0.999;
constexpr double kSigmaMin = 1e-4;
constexpr double kSigmaMax = 0.9999;

struct Block {
    ConeKind kind;  // nonnegative or second_order only
    int dim;
    int offset;  // start within the conic coordinate vector
};

// Internal standard form after presolve: min c'x s.t. Ax = b with the conic
// coordinates (columns listed in conic_cols) required to lie in the blocks.
struct Internal {
    VectorXd c;
    SpMat A;
    VectorXd b;
    std::vector<Block> blocks;
    std::vector<int> conic_cols;
    std::vector<std::pair<int, int>> rot_pairs;  // columns rotated at presolve
    std::vector<int> kept_rows;                  // internal row -> original row
    int n = 0, m = 0, p = 0;
    double degree = 0.0;  // barrier degree of the conic part
};

// Nesterov-Todd scaling state per block.
struct Scaling {
    VectorXd w_nonneg;  // sqrt(s_i/z_i) per nonnegative coordinate
    double eta = 1.0;   // SOC: W = eta * Wbar(wbar)
    double eta2 = 1.0;
    VectorXd wbar;  // SOC: hyperbolic unit scaling point
};

void apply_rotation(VectorXd& v, const std::vector<std::pair<int, int>>& pairs)
{
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (const auto& [j0, j1] : pairs) {
        const double a = v[j0], b = v[j1];
        v[j0] = (a + b) * inv_sqrt2;
        v[j1] = (a - b) * inv_sqrt2;
    }
}

// Maximum-matching structural rank of the kept equality rows.
int structural_rank(const SpMat& A)
{
    const int m = static_cast<int>(A.rows());
    std::vector<std::vector<int>> rows_of_col(A.cols());
    for (int col = 0; col < A.outerSize(); ++col)
        for (SpMat::InnerIterator it(A, col); it; ++it)
            rows_of_col[col].push_back(static_cast<int>(it.row()));

    std::vector<int> row_match(m, -1), col_match(A.cols(), -1);
    std::vector<char> visited(A.cols());

    std::function<bool(int)> augment = [&](int col) -> bool {
        for (int row : rows_of_col[col]) {
            if (row_match[row] == -1) {
                row_match[row] = col;
                col_match[col] = row;
                return true;
            }
        }
        for (int row : rows_of_col[col]) {
            const int other = row_match[row];
            if (!visited[other]) {
                visited[other] = 1;
                if (augment(other)) {
                    row_match[row] = col;
                    col_match[col] = row;
                    return true;
                }
            }
        }
        return false;
    };

    int rank = 0;
    for (int col = 0; col < A.cols(); ++col) {
        std::fill(visited.begin(), visited.end(), 0);
        visited[col] = 1;
        if (augment(col))
            ++rank;
        if (rank == m)
            break;
    }
    return rank;
}

// ---------------------------------------------------------------------------
// Jordan-algebra and scaling primitives, acting per block on conic vectors.
// ---------------------------------------------------------------------------

void cone_product(const Internal& P, const VectorXd& u, const VectorXd& v, VectorXd& out)
{
    for (const Block& blk : P.blocks) {
        if (blk.kind == ConeKind::nonnegative) {
            out.segment(blk.offset, blk.dim) =
                u.segment(blk.offset, blk.dim).cwiseProduct(v.segment(blk.offset, blk.dim));
        } else {
            const auto u_blk = u.segment(blk.offset, blk.dim);
            const auto v_blk = v.segment(blk.offset, blk.dim);
            out[blk.offset] = u_blk.dot(v_blk);
            out.segment(blk.offset + 1, blk.dim - 1) =
                u_blk[0] * v_blk.tail(blk.dim - 1) + v_blk[0] * u_blk.tail(blk.dim - 1);
        }
    }
}

// out = u \ v (inverse Jordan product by u)
void cone_division(const Internal& P, const VectorXd& u, const VectorXd& v, VectorXd& out)
{
    for (const Block& blk : P.blocks) {
        if (blk.kind == ConeKind::nonnegative) {
            out.segment(blk.offset, blk.dim) =
                v.segment(blk.offset, blk.dim).cwiseQuotient(u.segment(blk.offset, blk.dim));
        } else {
            const auto u_blk = u.segment(blk.offset, blk.dim);
            const auto v_blk = v.segment(blk.offset, blk.dim);
            const double u0 = u_blk[0];
            const double rho = u0 * u0 - u_blk.tail(blk.dim - 1).squaredNorm();
            const double zeta = u_blk.tail(blk.dim - 1).dot(v_blk.tail(blk.dim - 1));
            out[blk.offset] = (u0 * v_blk[0] - zeta) / rho;
            const double factor = (zeta / u0 - v_blk[0]) / rho;
            out.segment(blk.offset + 1, blk.dim - 1) =
                factor * u_blk.tail(blk.dim - 1) + v_blk.tail(blk.dim - 1) / u0;
        }
    }
}

void cone_identity_scaled(const Internal& P, double value, VectorXd& out)
{
    out.setZero(P.p);
    for (const Block& blk : P.blocks) {
        if (blk.kind == ConeKind::nonnegative)
            out.segment(blk.offset, blk.dim).setConstant(value);
        else
            out[blk.offset] = value;
    }
}

// out = W v
void scale_apply(const Internal& P, const std::vector<Scaling>& scalings, const VectorXd& v,
                 VectorXd& out)
{
    for (size_t k = 0; k < P.blocks.size(); ++k) {
        const Block& blk = P.blocks[k];
        const Scaling& sc = scalings[k];
        if (blk.kind == ConeKind::nonnegative) {
            out.segment(blk.offset, blk.dim) =
                sc.w_nonneg.cwiseProduct(v.segment(blk.offset, blk.dim));
        } else {
            const auto v_blk = v.segment(blk.offset, blk.dim);
            const double zeta = sc.wbar.tail(blk.dim - 1).dot(v_blk.tail(blk.dim - 1));
            const double factor = v_blk[0] + zeta / (1.0 + sc.wbar[0]);
            out[blk.offset] = sc.eta * (sc.wbar[0] * v_blk[0] + zeta);
            out.segment(blk.offset + 1, blk.dim - 1) =
                sc.eta * (v_blk.tail(blk.dim - 1) + factor * sc.wbar.tail(blk.dim - 1));
        }
    }
}

// out += W^2 v  (used by iterative refinement against the unregularized KKT)
void scale2_apply_add(const Internal& P, const std::vector<Scaling>& scalings, const VectorXd& v,
                      VectorXd& out)
{
    for (size_t k = 0; k < P.blocks.size(); ++k) {
        const Block& blk = P.blocks[k];
        const Scaling& sc = scalings[k];
        if (blk.kind == ConeKind::nonnegative) {
            out.segment(blk.offset, blk.dim) +=
                sc.w_nonneg.array().square().matrix().cwiseProduct(v.segment(blk.offset, blk.dim));
        } else {
            // W^2 = eta^2 (2 wbar wbar' - J)
            const auto v_blk = v.segment(blk.offset, blk.dim);
            const double proj = sc.wbar.dot(v_blk);
            out[blk.offset] += sc.eta2 * (2.0 * sc.wbar[0] * proj - v_blk[0]);
            out.segment(blk.offset + 1, blk.dim - 1) +=
                sc.eta2 *
                (2.0 * proj * sc.wbar.tail(blk.dim - 1) + v_blk.tail(blk.dim - 1));
        }
    }
}

// Updates scalings from a strictly cone-interior (s, z); false on breakdown.
bool update_scalings(const Internal& P, const VectorXd& s, const VectorXd& z,
                     std::vector<Scaling>& scalings, VectorXd& lambda)
{
    for (size_t k = 0; k < P.blocks.size(); ++k) {
        const Block& blk = P.blocks[k];
        Scaling& sc = scalings[k];
        if (blk.kind == ConeKind::nonnegative) {
            const auto s_blk = s.segment(blk.offset, blk.dim);
            const auto z_blk = z.segment(blk.offset, blk.dim);
            if ((s_blk.array() <= 0.0).any() || (z_blk.array() <= 0.0).any())
                return false;
            sc.w_nonneg = (s_blk.cwiseQuotient(z_blk)).cwiseSqrt();
        } else {
            const auto s_blk = s.segment(blk.offset, blk.dim);
            const auto z_blk = z.segment(blk.offset, blk.dim);
            const double sres = s_blk[0] * s_blk[0] - s_blk.tail(blk.dim - 1).squaredNorm();
            const double zres = z_blk[0] * z_blk[0] - z_blk.tail(blk.dim - 1).squaredNorm();
            if (sres <= 0.0 || zres <= 0.0)
                return false;
            const double snorm = std::sqrt(sres), znorm = std::sqrt(zres);
            const VectorXd sbar = s_blk / snorm;
            const VectorXd zbar = z_blk / znorm;
            const double gamma = std::sqrt(0.5 * (1.0 + sbar.dot(zbar)));
            sc.wbar.resize(blk.dim);
            sc.wbar[0] = (0.5 / gamma) * (sbar[0] + zbar[0]);
            sc.wbar.tail(blk.dim - 1) =
                (0.5 / gamma) * (sbar.tail(blk.dim - 1) - zbar.tail(blk.dim - 1));
            sc.eta2 = snorm / znorm;
            sc.eta = std::sqrt(sc.eta2);
        }
    }
    scale_apply(P, scalings, z, lambda);
    return true;
}

// Shifts v into the cone interior: v + (1 + alpha) e when needed.
void bring_to_cone(const Internal& P, const VectorXd& v, VectorXd& out)
{
    double alpha = -0.99;
    for (const Block& blk : P.blocks) {
        if (blk.kind == ConeKind::nonnegative) {
            for (int i = 0; i < blk.dim; ++i)
                if (v[blk.offset + i] <= 0.0)
                    alpha = std::max(alpha, -v[blk.offset + i]);
        } else {
            const double margin =
                v[blk.offset] - v.segment(blk.offset + 1, blk.dim - 1).norm();
            if (margin <= 0.0)
                alpha = std::max(alpha, -margin);
        }
    }
    out = v;
    const double shift = 1.0 + alpha;
    for (const Block& blk : P.blocks) {
        if (blk.kind == ConeKind::nonnegative)
            out.segment(blk.offset, blk.dim).array() += shift;
        else
            out[blk.offset] += shift;
    }
}

// Largest step to the cone boundary in scaled space, EiCOS-style.
double line_search(const Internal& P, const VectorXd& lambda, const VectorXd& ds,
                   const VectorXd& dz, double tau, double dtau, double kap, double dkap)
{
    double alpha = 2.0;
    for (const Block& blk : P.blocks) {
        if (blk.kind == ConeKind::nonnegative) {
            for (int i = 0; i < blk.dim; ++i) {
                const double rho = ds[blk.offset + i] / lambda[blk.offset + i];
                const double sig = dz[blk.offset + i] / lambda[blk.offset + i];
                const double worst = std::min(rho, sig);
                if (worst < 0.0)
                    alpha = std::min(alpha, -1.0 / worst);
            }
        } else {
            const auto l_blk = lambda.segment(blk.offset, blk.dim);
            const double lres = l_blk[0] * l_blk[0] - l_blk.tail(blk.dim - 1).squaredNorm();
            if (lres <= 0.0)
                continue;
            const double lnorm = std::sqrt(lres);
            const VectorXd lbar = l_blk / lnorm;
            for (const VectorXd* dir : {&ds, &dz}) {
                const auto d_blk = dir->segment(blk.offset, blk.dim);
                const double prod =
                    lbar[0] * d_blk[0] - lbar.tail(blk.dim - 1).dot(d_blk.tail(blk.dim - 1));
                const double factor = (prod + d_blk[0]) / (lbar[0] + 1.0);
                const double head = prod / lnorm;
                const double tail_norm =
                    ((d_blk.tail(blk.dim - 1) - factor * lbar.tail(blk.dim - 1)) / lnorm).norm();
                const double viol = tail_norm - head;
                if (viol > 0.0)
                    alpha = std::min(alpha, 1.0 / viol);
            }
        }
    }
    if (dtau < 0.0)
        alpha = std::min(alpha, -tau / dtau);
    if (dkap < 0.0)
        alpha = std::min(alpha, -kap / dkap);
    return std::clamp(alpha, kStepMin, kStepMax);
}

// ---------------------------------------------------------------------------
// KKT system
// ---------------------------------------------------------------------------

double* coeff_ptr(SpMat& M, int row, int col)
{
    for (int idx = M.outerIndexPtr()[col]; idx < M.outerIndexPtr()[col + 1]; ++idx)
        if (M.innerIndexPtr()[idx] == row)
            return &M.valuePtr()[idx];
    throw std::logic_error("ipm: missing KKT slot");
}

// Regularized quasi-definite KKT matrix
//   [ delta*I   A'        G'          ]
//   [ A        -delta*I   0           ]
//   [ G         0        -(W^2+delta) ]
// with G = -selection of the conic coordinates.  The sparsity pattern is fixed
// across iterations; only the W^2 slots change.
class KktSystem {
public:
    KktSystem(const Internal& P, const SolverSettings& settings)
        : P_(P), delta_(settings.static_reg), refine_steps_(settings.refine_steps)
    {
        const int n = P.n, m = P.m, p = P.p;
        dim_ = n + m + p;

        std::vector<Triplet> trip;
        trip.reserve(P.A.nonZeros() * 2 + n + m + 2 * p + soc_block_size());
        for (int i = 0; i < n; ++i)
            trip.emplace_back(i, i, delta_);
        for (int col = 0; col < P.A.outerSize(); ++col)
            for (SpMat::InnerIterator it(P.A, col); it; ++it) {
                trip.emplace_back(n + it.row(), it.col(), it.value());
                trip.emplace_back(it.col(), n + it.row(), it.value());
            }
        for (int i = 0; i < m; ++i)
            trip.emplace_back(n + i, n + i, -delta_);
        for (int r = 0; r < p; ++r) {
            trip.emplace_back(n + m + r, P.conic_cols[r], -1.0);
            trip.emplace_back(P.conic_cols[r], n + m + r, -1.0);
        }
        // scaling block, initialized to the identity scaling W^2 = I
        for (const Block& blk : P.blocks) {
            if (blk.kind == ConeKind::nonnegative) {
                for (int i = 0; i < blk.dim; ++i)
                    trip.emplace_back(n + m + blk.offset + i, n + m + blk.offset + i,
                                      -(1.0 + delta_));
            } else {
                for (int i = 0; i < blk.dim; ++i)
                    for (int j = 0; j < blk.dim; ++j)
                        trip.emplace_back(n + m + blk.offset + i, n + m + blk.offset + j,
                                          i == j ? -(1.0 + delta_) : 0.0);
            }
        }
        K_.resize(dim_, dim_);
        K_.setFromTriplets(trip.begin(), trip.end());
        K_.makeCompressed();

        for (const Block& blk : P.blocks) {
            if (blk.kind == ConeKind::nonnegative) {
                for (int i = 0; i < blk.dim; ++i)
                    slots_.push_back(
                        coeff_ptr(K_, n + m + blk.offset + i, n + m + blk.offset + i));
            } else {
                for (int j = 0; j < blk.dim; ++j)
                    for (int i = 0; i < blk.dim; ++i)
                        slots_.push_back(
                            coeff_ptr(K_, n + m + blk.offset + i, n + m + blk.offset + j));
            }
        }
        ldlt_.analyzePattern(K_);
    }

    // Writes the current scaling into the matrix and refactorizes.
    bool factorize(const std::vector<Scaling>& scalings)
    {
        size_t slot = 0;
        for (size_t k = 0; k < P_.blocks.size(); ++k) {
            const Block& blk = P_.blocks[k];
            const Scaling& sc = scalings[k];
            if (blk.kind == ConeKind::nonnegative) {
                for (int i = 0; i < blk.dim; ++i) {
                    const double w = sc.w_nonneg[i];
                    *slots_[slot++] = -(w * w + delta_);
                }
            } else {
                for (int j = 0; j < blk.dim; ++j)
                    for (int i = 0; i < blk.dim; ++i) {
                        double v = 2.0 * sc.wbar[i] * sc.wbar[j];
                        if (i == j)
                            v -= (i == 0 ? 1.0 : -1.0);
                        *slots_[slot++] = -(sc.eta2 * v + (i == j ? delta_ : 0.0));
                    }
            }
        }
        ldlt_.factorize(K_);
        return ldlt_.info() == Eigen::Success;
    }

    // Solves the unregularized KKT system with iterative refinement.
    void solve(const std::vector<Scaling>& scalings, const VectorXd& bx, const VectorXd& by,
               const VectorXd& bz, VectorXd& dx, VectorXd& dy, VectorXd& dz) const
    {
        const int n = P_.n, m = P_.m, p = P_.p;
        VectorXd rhs(dim_);
        rhs << bx, by, bz;
        VectorXd u = ldlt_.solve(rhs);

        VectorXd err(dim_);
        double err_norm_prev = std::numeric_limits<double>::max();
        VectorXd correction;
        for (int pass = 0; pass < refine_steps_; ++pass) {
            // residual against the true (unregularized) matrix
            VectorXd ex = bx;
            VectorXd ey = by;
            VectorXd ez = bz;
            const auto ux = u.head(n);
            const auto uy = u.segment(n, m);
            const auto uz = u.tail(p);
            ex -= P_.A.transpose() * uy;
            for (int r = 0; r < p; ++r)
                ex[P_.conic_cols[r]] += uz[r];
            ey -= P_.A * ux;
            for (int r = 0; r < p; ++r)
                ez[r] += ux[P_.conic_cols[r]];
            VectorXd w2_uz = VectorXd::Zero(p);
            scale2_apply_add(P_, scalings, uz, w2_uz);
            ez += w2_uz;
            err << ex, ey, ez;
            const double err_norm = err.lpNorm<Eigen::Infinity>();
            const double target = (1.0 + rhs.lpNorm<Eigen::Infinity>()) * 1e-14;
            if (err_norm <= target || err_norm >= err_norm_prev)
                break;
            err_norm_prev = err_norm;
            correction = ldlt_.solve(err);
            u += correction;
        }

        dx = u.head(n);
        dy = u.segment(n, m);
        dz = u.tail(p);
    }

private:
    size_t soc_block_size() const
    {
        size_t total = 0;
        for (const Block& blk : P_.blocks)
            total += blk.kind == ConeKind::second_order ? size_t(blk.dim) * blk.dim : blk.dim;
        return total;
    }

    const Internal& P_;
    double delta_;
    int refine_steps_;
    int dim_ = 0;
    SpMat K_;
    std::vector<double*> slots_;
    Eigen::SimplicialLDLT<SpMat, Eigen::Lower> ldlt_;
};

// ---------------------------------------------------------------------------
// Presolve
// ---------------------------------------------------------------------------

// Builds the internal problem; returns false and fills `immediate` when a
// trivial certificate settles the problem outright.
bool build_internal(const ConeProgram& prog, Internal& P, Solution& immediate)
{
    const int n = prog.n_vars();
    const int m0 = prog.n_rows();

    // column rotation for rotated cones
    P.c = prog.c;
    P.rot_pairs.clear();
    std::vector<Triplet> trip;
    trip.reserve(prog.A.nonZeros());
    {
        int offset = 0;
        for (const Cone& cone : prog.cones) {
            if (cone.kind == ConeKind::rotated_second_order)
                P.rot_pairs.emplace_back(offset, offset + 1);
            offset += cone.dim;
        }
    }
    SpMat A0 = prog.A;
    if (!P.rot_pairs.empty()) {
        // replace the (j0, j1) column pairs of A and entries of c by their
        // images under the 45-degree rotation, through triplets
        A0.makeCompressed();
        const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
        std::vector<Triplet> all;
        all.reserve(A0.nonZeros() + 16 * P.rot_pairs.size());
        std::vector<int> pair_of_col(n, -1);
        for (size_t k = 0; k < P.rot_pairs.size(); ++k) {
            pair_of_col[P.rot_pairs[k].first] = static_cast<int>(k);
            pair_of_col[P.rot_pairs[k].second] = static_cast<int>(k);
        }
        for (int col = 0; col < A0.outerSize(); ++col)
            for (SpMat::InnerIterator it(A0, col); it; ++it) {
                if (pair_of_col[col] < 0) {
                    all.emplace_back(it.row(), col, it.value());
                } else {
                    const auto& pr = P.rot_pairs[pair_of_col[col]];
                    const double v = it.value() * inv_sqrt2;
                    if (col == pr.first) {
                        all.emplace_back(it.row(), pr.first, v);
                        all.emplace_back(it.row(), pr.second, v);
                    } else {
                        all.emplace_back(it.row(), pr.first, v);
                        all.emplace_back(it.row(), pr.second, -v);
                    }
                }
            }
        A0.setZero();
        A0.setFromTriplets(all.begin(), all.end());
        apply_rotation(P.c, P.rot_pairs);
    }

    // empty-row and exact-duplicate-row presolve
    std::vector<std::vector<std::pair<int, double>>> rows(m0);
    for (int col = 0; col < A0.outerSize(); ++col)
        for (SpMat::InnerIterator it(A0, col); it; ++it)
            rows[it.row()].emplace_back(col, it.value());

    auto make_infeasible_cert = [&](const VectorXd& y_cert, const std::string& why) {
        immediate.status = SolveStatus::primal_infeasible;
        immediate.x = VectorXd::Zero(n);
        immediate.s = VectorXd::Zero(n);
        immediate.y = y_cert / prog.b.dot(y_cert);
        immediate.objective = 0.0;
        immediate.message = why;
        immediate.residuals = {0.0, 0.0, 0.0};
    };

    P.kept_rows.clear();
    std::vector<int> first_with_pattern;
    for (int i = 0; i < m0; ++i) {
        if (rows[i].empty()) {
            if (prog.b[i] != 0.0) {
                VectorXd y = VectorXd::Zero(m0);
                y[i] = prog.b[i] > 0 ? 1.0 : -1.0;
                make_infeasible_cert(y, "empty equality row with nonzero right-hand side");
                return false;
            }
            continue;  // redundant row
        }
        bool duplicate = false;
        for (int j : first_with_pattern) {
            if (rows[j] == rows[i]) {
                if (prog.b[j] == prog.b[i]) {
                    duplicate = true;
                } else {
                    VectorXd y = VectorXd::Zero(m0);
                    const double sign = prog.b[i] > prog.b[j] ? 1.0 : -1.0;
                    y[i] = sign;
                    y[j] = -sign;
                    make_infeasible_cert(y, "contradictory duplicate equality rows");
                    return false;
                }
                break;
            }
        }
        if (!duplicate) {
            first_with_pattern.push_back(i);
            P.kept_rows.push_back(i);
        }
    }

    P.m = static_cast<int>(P.kept_rows.size());
    P.n = n;
    P.b.resize(P.m);
    trip.clear();
    for (int i = 0; i < P.m; ++i) {
        P.b[i] = prog.b[P.kept_rows[i]];
        for (const auto& [col, value] : rows[P.kept_rows[i]])
            trip.emplace_back(i, col, value);
    }
    P.A.resize(P.m, n);
    P.A.setFromTriplets(trip.begin(), trip.end());
    P.A.makeCompressed();

    // conic coordinate bookkeeping (rotated cones have become standard ones)
    P.blocks.clear();
    P.conic_cols.clear();
    P.degree = 0.0;
    {
        int offset = 0;
        for (const Cone& cone : prog.cones) {
            if (cone.kind == ConeKind::nonnegative) {
                P.blocks.push_back({ConeKind::nonnegative, cone.dim,
                                    static_cast<int>(P.conic_cols.size())});
                P.degree += cone.dim;
                for (int i = 0; i < cone.dim; ++i)
                    P.conic_cols.push_back(offset + i);
            } else if (cone.kind != ConeKind::free) {
                P.blocks.push_back({ConeKind::second_order, cone.dim,
                                    static_cast<int>(P.conic_cols.size())});
                P.degree += 1.0;
                for (int i = 0; i < cone.dim; ++i)
                    P.conic_cols.push_back(offset + i);
            }
            offset += cone.dim;
        }
    }
    P.p = static_cast<int>(P.conic_cols.size());

    // a free variable in no equality row is an immediate unbounded ray when
    // its cost is nonzero
    {
        std::vector<char> col_used(n, 0);
        for (int col = 0; col < P.A.outerSize(); ++col)
            if (P.A.outerIndexPtr()[col] != P.A.outerIndexPtr()[col + 1])
                col_used[col] = 1;
        std::vector<char> is_conic(n, 0);
        for (int col : P.conic_cols)
            is_conic[col] = 1;
        for (int col = 0; col < n; ++col) {
            if (!col_used[col] && !is_conic[col] && P.c[col] != 0.0) {
                immediate.status = SolveStatus::dual_infeasible;
                VectorXd ray = VectorXd::Zero(n);
                ray[col] = P.c[col] > 0 ? -1.0 : 1.0;
                apply_rotation(ray, P.rot_pairs);
                immediate.x = ray / std::abs(P.c[col]);
                immediate.y = VectorXd::Zero(m0);
                immediate.s = VectorXd::Zero(n);
                immediate.objective = 0.0;
                immediate.message = "free variable with empty column and nonzero cost";
                immediate.residuals = {0.0, 0.0, 0.0};
                return false;
            }
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// External-space measures used for termination and reporting
// ---------------------------------------------------------------------------

struct ExternalPoint {
    VectorXd x;      // candidate primal point
    VectorXd y;      // candidate equality multipliers
    VectorXd s;      // candidate dual slack (zero on free coordinates)
    double pres = 0.0, dres = 0.0, gap = 0.0, cone_viol = 0.0;
    double objective = 0.0;
};

ExternalPoint external_point(const ConeProgram& prog, const Internal& P, const VectorXd& x_int,
                             const VectorXd& y_int, const VectorXd& z_int, double tau)
{
    ExternalPoint ep;
    ep.x = x_int / tau;
    apply_rotation(ep.x, P.rot_pairs);

    ep.y = VectorXd::Zero(prog.n_rows());
    for (int i = 0; i < P.m; ++i)
        ep.y[P.kept_rows[i]] = -y_int[i] / tau;

    ep.s = VectorXd::Zero(prog.n_vars());
    for (int r = 0; r < P.p; ++r)
        ep.s[P.conic_cols[r]] = z_int[r] / tau;
    apply_rotation(ep.s, P.rot_pairs);

    const double cx = prog.c.dot(ep.x);
    const double by = prog.b.dot(ep.y);
    ep.objective = cx;
    ep.pres = (prog.A * ep.x - prog.b).norm() / (1.0 + prog.b.norm());
    ep.dres = (prog.A.transpose() * ep.y + ep.s - prog.c).norm() / (1.0 + prog.c.norm());
    ep.gap = std::abs(cx - by) / (1.0 + std::abs(cx));
    ep.cone_viol = 0.0;
    int offset = 0;
    for (const Cone& cone : prog.cones) {
        ep.cone_viol = std::max(ep.cone_viol, membership(cone, ep.x.segment(offset, cone.dim)));
        offset += cone.dim;
    }
    return ep;
}

}  // namespace

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

Solution solve(const ConeProgram& prog, const SolverSettings& settings)
{
    prog.validate();
    if (!(settings.tol > 0.0))
        throw std::invalid_argument("solve: tolerance must be positive");

    Solution result;
    Internal P;
    if (!build_internal(prog, P, result))
        return result;

    if (structural_rank(P.A) < P.m) {
        result.status = SolveStatus::numerical_failure;
        result.message = "equality block is structurally rank-deficient after presolve";
        result.x = VectorXd::Zero(P.n);
        result.y = VectorXd::Zero(prog.n_rows());
        result.s = VectorXd::Zero(P.n);
        return result;
    }

    const int n = P.n, m = P.m, p = P.p;
    const double tol = settings.tol;
    const double tol_target =
        settings.tol_target > 0.0 ? settings.tol_target : std::max(1e-12, 1e-4 * tol);

    std::vector<Scaling> scalings(P.blocks.size());
    for (size_t k = 0; k < P.blocks.size(); ++k) {
        if (P.blocks[k].kind == ConeKind::nonnegative)
            scalings[k].w_nonneg = VectorXd::Ones(P.blocks[k].dim);
        else {
            scalings[k].wbar = VectorXd::Zero(P.blocks[k].dim);
            scalings[k].wbar[0] = 1.0;
            scalings[k].eta = scalings[k].eta2 = 1.0;
        }
    }

    KktSystem kkt(P, settings);
    if (!kkt.factorize(scalings)) {
        result.status = SolveStatus::numerical_failure;
        result.message = "initial KKT factorization failed";
        return result;
    }

    // --- initialization: two scaling-free KKT solves -----------------------
    VectorXd x(n), y(m), z(p), s(p);
    {
        VectorXd dx(n), dy(m), dz(p);
        kkt.solve(scalings, VectorXd::Zero(n), P.b, VectorXd::Zero(p), dx, dy, dz);
        x = dx;
        bring_to_cone(P, -dz, s);
        kkt.solve(scalings, -P.c, VectorXd::Zero(m), VectorXd::Zero(p), dx, dy, dz);
        y = dy;
        bring_to_cone(P, dz, z);
    }
    double tau = 1.0, kap = 1.0;

    // iterate bookkeeping
    VectorXd lambda(p);
    VectorXd rx(n), ry(m), rz(p);
    VectorXd x1(n), y1(m), z1(p), x2(n), y2(m), z2(p);
    VectorXd w_dz(p), ds_by_w(p), ds_comb(p), lam_div(p), ds_final(p), tmp(p);

    struct Best {
        VectorXd x, y, z, s;
        double tau = 1.0, kap = 1.0;
        double merit = std::numeric_limits<double>::max();
        int iter = 0;
    } best;
    best = {x, y, z, s, tau, kap, std::numeric_limits<double>::max(), 0};

    auto remember_best = [&](double merit, int iter) {
        if (merit < best.merit) {
            best = {x, y, z, s, tau, kap, merit, iter};
        }
    };

    auto finish = [&](SolveStatus status, const ExternalPoint& ep, int iter,
                      const std::string& message) {
        result.status = status;
        result.x = ep.x;
        result.y = ep.y;
        result.s = ep.s;
        result.objective = ep.objective;
        result.residuals = {ep.pres, ep.dres, ep.gap};
        result.iterations = iter;
        result.message = message;
        return result;
    };

    // The loop pushes toward tol_target; when progress stops, the best iterate
    // still counts as optimal if it meets the requested tolerance.
    auto accept_or = [&](SolveStatus fallback, int iter, const std::string& message) {
        const ExternalPoint bp = external_point(prog, P, best.x, best.y, best.z, best.tau);
        if (best.merit <= tol)
            return finish(SolveStatus::optimal, bp, iter, "");
        return finish(fallback, bp, iter, message);
    };

    int iter = 0;
    double prev_step = 1.0;
    double stall_ref = std::numeric_limits<double>::max();
    int stall_count = 0;
    for (iter = 0; iter <= settings.max_iter; ++iter) {
        // residuals of the homogeneous embedding
        rx = -P.A.transpose() * y - P.c * tau;
        for (int r = 0; r < p; ++r)
            rx[P.conic_cols[r]] += z[r];
        const double hresx = (rx + P.c * tau).norm();
        ry = P.A * x - P.b * tau;
        const double hresy = (ry + P.b * tau).norm();
        rz = s;
        for (int r = 0; r < p; ++r)
            rz[r] -= x[P.conic_cols[r]];
        const double hresz = rz.norm();
        const double cx = P.c.dot(x);
        const double by = m > 0 ? P.b.dot(y) : 0.0;
        const double rt = kap + cx + by;
        const double mu = (s.dot(z) + kap * tau) / (P.degree + 1.0);

        const double nx = x.norm(), ny = y.norm(), nz = z.norm(), ns = s.norm();

        const ExternalPoint ep = external_point(prog, P, x, y, z, tau);
        const double merit = std::max({ep.pres, ep.dres, ep.gap, ep.cone_viol});

        if (settings.verbose)
            std::printf("it %3d  obj %+.6e  pres %.2e  dres %.2e  gap %.2e  viol %.2e  "
                        "tau %.2e  kap %.2e  mu %.2e\n",
                        iter, ep.objective, ep.pres, ep.dres, ep.gap, ep.cone_viol, tau, kap, mu);

        if (!std::isfinite(merit) || !std::isfinite(mu))
            return accept_or(SolveStatus::numerical_failure, iter,
                             "numerical breakdown (non-finite iterate)");

        if (merit <= tol_target)
            return finish(SolveStatus::optimal, ep, iter, "");

        // infeasibility detection on the embedding ray
        if (tau < kap) {
            if (m > 0 && by / std::max(ny + nz, 1.0) < -tol &&
                hresx / std::max(ny + nz, 1.0) <= tol) {
                // Farkas certificate: A'yc + sc ~ 0, b'yc = 1, sc in K*
                ExternalPoint cert = external_point(prog, P, x, y, z, 1.0);
                const double scale_by = prog.b.dot(cert.y);
                cert.y /= scale_by;
                cert.s /= scale_by;
                cert.x.setZero();
                cert.objective = 0.0;
                cert.pres = (prog.A.transpose() * cert.y + cert.s).norm() / (1.0 + prog.c.norm());
                cert.dres = 0.0;
                cert.gap = 0.0;
                return finish(SolveStatus::primal_infeasible, cert, iter,
                              "primal infeasibility certificate found");
            }
            if (cx / std::max(nx, 1.0) < -tol &&
                std::max(hresy / std::max(nx, 1.0), hresz / std::max(nx + ns, 1.0)) <= tol) {
                // unbounded ray: A xc ~ 0, c'xc = -1, conic part in K
                ExternalPoint cert = external_point(prog, P, x, y, z, 1.0);
                const double scale_by = -prog.c.dot(cert.x);
                cert.x /= scale_by;
                cert.y.setZero();
                cert.s.setZero();
                cert.objective = -1.0;
                cert.pres = (prog.A * cert.x).norm() / (1.0 + prog.b.norm());
                cert.dres = 0.0;
                cert.gap = 0.0;
                return finish(SolveStatus::dual_infeasible, cert, iter,
                              "dual infeasibility certificate found");
            }
        }

        remember_best(merit, iter);

        // no-improvement stall, tracked only while the embedding points at
        // optimality (infeasible rays keep tau < kap and exit via the gates)
        if (tau >= kap) {
            if (merit < 0.99 * stall_ref) {
                stall_ref = merit;
                stall_count = 0;
            } else if (++stall_count >= 8) {
                return accept_or(SolveStatus::numerical_failure, iter,
                                 "progress stalled; returning best iterate");
            }
        }

        if (iter == settings.max_iter)
            return accept_or(SolveStatus::max_iterations, iter,
                             "iteration limit reached; returning best iterate");
        if (iter > 0 && prev_step <= kStepMin * 1.0001)
            return accept_or(SolveStatus::numerical_failure, iter,
                             "search direction stalled; returning best iterate");

        // --- Nesterov-Todd scaling and KKT refactorization ------------------
        if (!update_scalings(P, s, z, scalings, lambda))
            return accept_or(SolveStatus::numerical_failure, iter,
                             "slacks left the cone; returning best iterate");
        if (!kkt.factorize(scalings))
            return accept_or(SolveStatus::numerical_failure, iter, "KKT factorization failed");

        kkt.solve(scalings, -P.c, P.b, VectorXd::Zero(p), x1, y1, z1);
        const double dtau_denom = kap / tau - (P.c.dot(x1) + (m > 0 ? P.b.dot(y1) : 0.0));

        // --- affine (predictor) direction -----------------------------------
        kkt.solve(scalings, rx, -ry, s - rz, x2, y2, z2);
        const double dtau_aff =
            (rt - kap + P.c.dot(x2) + (m > 0 ? P.b.dot(y2) : 0.0)) / dtau_denom;
        z2 += dtau_aff * z1;  // unscaled affine dz
        scale_apply(P, scalings, z2, w_dz);
        ds_by_w = -w_dz - lambda;
        const double dkap_aff = -kap - kap / tau * dtau_aff;
        const double step_aff = line_search(P, lambda, ds_by_w, w_dz, tau, dtau_aff, kap, dkap_aff);

        const double sigma =
            std::clamp(std::pow(1.0 - step_aff, 3.0), kSigmaMin, kSigmaMax);

        // --- combined (corrector) direction ----------------------------------
        cone_product(P, lambda, lambda, ds_comb);
        cone_product(P, ds_by_w, w_dz, tmp);
        ds_comb += tmp;
        VectorXd sigma_mu_e(p);
        cone_identity_scaled(P, sigma * mu, sigma_mu_e);
        ds_comb -= sigma_mu_e;

        cone_division(P, lambda, ds_comb, lam_div);
        scale_apply(P, scalings, lam_div, tmp);  // W(lambda \ ds)
        const double one_minus_sigma = 1.0 - sigma;
        kkt.solve(scalings, one_minus_sigma * rx, -one_minus_sigma * ry,
                  -one_minus_sigma * rz + tmp, x2, y2, z2);

        const double bkap = kap * tau + dkap_aff * dtau_aff - sigma * mu;
        const double dtau = (one_minus_sigma * rt - bkap / tau + P.c.dot(x2) +
                             (m > 0 ? P.b.dot(y2) : 0.0)) /
                            dtau_denom;
        x2 += dtau * x1;
        y2 += dtau * y1;
        z2 += dtau * z1;
        scale_apply(P, scalings, z2, w_dz);
        ds_by_w = -(lam_div + w_dz);
        const double dkap = -(bkap + kap * dtau) / tau;

        const double step =
            settings.step_scale * line_search(P, lambda, ds_by_w, w_dz, tau, dtau, kap, dkap);
        scale_apply(P, scalings, ds_by_w, ds_final);

        x += step * x2;
        y += step * y2;
        z += step * z2;
        s += step * ds_final;
        kap += step * dkap;
        tau += step * dtau;
        prev_step = step;
    }

    // unreachable; the loop always exits through `finish`
    return result;
}

Solution solve(const ConeProgram& prog, double tol, int max_iter)
{
    SolverSettings settings;
    settings.tol = tol;
    settings.max_iter = max_iter;
    return solve(prog, settings);
}

}  // namespace nnps
