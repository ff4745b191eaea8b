#include "nnps/conic.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace nnps {

void ConeProgram::validate() const
{
    if (A.rows() != b.size())
        throw std::invalid_argument("ConeProgram: A has " + std::to_string(A.rows()) +
                                    " rows but b has " + std::to_string(b.size()) + " entries");
    if (A.cols() != c.size())
        throw std::invalid_argument("ConeProgram: A has " + std::to_string(A.cols()) +
                                    " columns but c has " + std::to_string(c.size()) + " entries");
    long total = 0;
    for (const Cone& cone : cones) {
        int min_dim = 1;
        if (cone.kind == ConeKind::second_order)
            min_dim = 2;
        else if (cone.kind == ConeKind::rotated_second_order)
            min_dim = 3;
        if (cone.dim < min_dim)
            throw std::invalid_argument("ConeProgram: cone of dimension " + std::to_string(cone.dim) +
                                        " below the minimum " + std::to_string(min_dim));
        total += cone.dim;
    }
    if (total != c.size())
        throw std::invalid_argument("ConeProgram: cone dimensions sum to " + std::to_string(total) +
                                    " but there are " + std::to_string(c.size()) + " variables");
}

const char* to_string(SolveStatus status)
{
    switch (status) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::primal_infeasible: return "primal_infeasible";
    case SolveStatus::dual_infeasible: return "dual_infeasible";
    case SolveStatus::max_iterations: return "max_iterations";
    case SolveStatus::numerical_failure: return "numerical_failure";
    }
    return "unknown";
}

Eigen::VectorXd rotate_to_standard(const Eigen::VectorXd& x)
{
    if (x.size() < 3)
        throw std::invalid_argument("rotate_to_standard: vector must have dimension >= 3");
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    Eigen::VectorXd u = x;
    u[0] = (x[0] + x[1]) * inv_sqrt2;
    u[1] = (x[0] - x[1]) * inv_sqrt2;
    return u;
}

double membership(const Cone& cone, const Eigen::VectorXd& x)
{
    if (x.size() != cone.dim)
        throw std::invalid_argument("membership: vector length " + std::to_string(x.size()) +
                                    " does not match cone dimension " + std::to_string(cone.dim));
    switch (cone.kind) {
    case ConeKind::free:
        return 0.0;
    case ConeKind::nonnegative:
        return std::max(0.0, -x.minCoeff());
    case ConeKind::second_order:
        return std::max(0.0, x.tail(x.size() - 1).norm() - x[0]);
    case ConeKind::rotated_second_order: {
        const Eigen::VectorXd u = rotate_to_standard(x);
        return std::max(0.0, u.tail(u.size() - 1).norm() - u[0]);
    }
    }
    return 0.0;
}

namespace {

const char* cone_tag(ConeKind kind)
{
    switch (kind) {
    case ConeKind::free: return "free";
    case ConeKind::nonnegative: return "nonneg";
    case ConeKind::second_order: return "soc";
    case ConeKind::rotated_second_order: return "rsoc";
    }
    return "?";
}

ConeKind parse_cone_tag(const std::string& tag)
{
    if (tag == "free") return ConeKind::free;
    if (tag == "nonneg") return ConeKind::nonnegative;
    if (tag == "soc") return ConeKind::second_order;
    if (tag == "rsoc") return ConeKind::rotated_second_order;
    throw std::runtime_error("parse_program: unknown cone kind '" + tag + "'");
}

std::string num17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void dump_program(const ConeProgram& prog, std::ostream& out)
{
    out << "nnps-coneprog 1\n";
    out << "vars " << prog.n_vars() << "\n";
    out << "cones " << prog.cones.size() << "\n";
    for (const Cone& cone : prog.cones)
        out << cone_tag(cone.kind) << " " << cone.dim << "\n";
    out << "objective\n";
    for (int i = 0; i < prog.c.size(); ++i)
        out << num17(prog.c[i]) << "\n";
    out << "equalities " << prog.n_rows() << " " << prog.A.nonZeros() << "\n";
    for (int col = 0; col < prog.A.outerSize(); ++col)
        for (Eigen::SparseMatrix<double>::InnerIterator it(prog.A, col); it; ++it)
            out << it.row() << " " << it.col() << " " << num17(it.value()) << "\n";
    out << "rhs\n";
    for (int i = 0; i < prog.b.size(); ++i)
        out << num17(prog.b[i]) << "\n";
    out << "end\n";
}

ConeProgram parse_program(std::istream& in)
{
    auto expect = [&](const std::string& want) {
        std::string got;
        if (!(in >> got) || got != want)
            throw std::runtime_error("parse_program: expected '" + want + "'");
    };

    expect("nnps-coneprog");
    int version = 0;
    in >> version;
    if (version != 1)
        throw std::runtime_error("parse_program: unsupported version");

    ConeProgram prog;
    int n = 0, k = 0;
    expect("vars");
    in >> n;
    expect("cones");
    in >> k;
    if (!in || n < 0 || k < 0)
        throw std::runtime_error("parse_program: bad header");
    prog.cones.reserve(k);
    for (int i = 0; i < k; ++i) {
        std::string tag;
        int dim;
        if (!(in >> tag >> dim))
            throw std::runtime_error("parse_program: truncated cone list");
        prog.cones.push_back({parse_cone_tag(tag), dim});
    }
    expect("objective");
    prog.c.resize(n);
    for (int i = 0; i < n; ++i)
        if (!(in >> prog.c[i]))
            throw std::runtime_error("parse_program: truncated objective");

    int m = 0;
    long nnz = 0;
    expect("equalities");
    if (!(in >> m >> nnz))
        throw std::runtime_error("parse_program: bad equalities header");
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(nnz);
    for (long e = 0; e < nnz; ++e) {
        int row, col;
        double value;
        if (!(in >> row >> col >> value))
            throw std::runtime_error("parse_program: truncated triplet list");
        triplets.emplace_back(row, col, value);
    }
    prog.A.resize(m, n);
    prog.A.setFromTriplets(triplets.begin(), triplets.end());
    expect("rhs");
    prog.b.resize(m);
    for (int i = 0; i < m; ++i)
        if (!(in >> prog.b[i]))
            throw std::runtime_error("parse_program: truncated rhs");
    expect("end");

    prog.validate();
    return prog;
}

}  // namespace nnps
