#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <string>

namespace nnps {

struct DataSet {
    Eigen::VectorXd x;
    Eigen::VectorXd y;

    int size() const { return static_cast<int>(x.size()); }
};

/// Reads a two-column CSV with header "x,y".  Throws std::runtime_error with
/// the offending line number on malformed rows; empty or header-only files
/// are errors.  Duplicate abscissae are permitted.
DataSet load_csv(const std::string& path);
DataSet read_csv(std::istream& in, const std::string& name);

/// Writes "x,y" rows with 17-significant-digit numerics and LF line endings;
/// a count of zero produces a header-only file.
void save_csv(const DataSet& data, const std::string& path);
void write_csv(const DataSet& data, std::ostream& out);

}  // namespace nnps
