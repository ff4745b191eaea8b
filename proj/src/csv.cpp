#include "nnps/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace nnps {

namespace {

std::string num17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

bool parse_double(const std::string& text, double& out)
{
    if (text.empty())
        return false;
    errno = 0;
    char* end = nullptr;
    out = std::strtod(text.c_str(), &end);
    return errno == 0 && end == text.c_str() + text.size();
}

}  // namespace

DataSet read_csv(std::istream& in, const std::string& name)
{
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error(name + ": empty file");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != "x,y")
        throw std::runtime_error(name + ":1: expected header 'x,y', got '" + line + "'");

    std::vector<double> xs, ys;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        const auto comma = line.find(',');
        double x, y;
        if (comma == std::string::npos || !parse_double(line.substr(0, comma), x) ||
            !parse_double(line.substr(comma + 1), y))
            throw std::runtime_error(name + ":" + std::to_string(line_no) +
                                     ": malformed row '" + line + "'");
        xs.push_back(x);
        ys.push_back(y);
    }
    if (xs.empty())
        throw std::runtime_error(name + ": no data rows");

    DataSet data;
    data.x = Eigen::Map<Eigen::VectorXd>(xs.data(), xs.size());
    data.y = Eigen::Map<Eigen::VectorXd>(ys.data(), ys.size());
    return data;
}

DataSet load_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error(path + ": cannot open for reading");
    return read_csv(in, path);
}

void write_csv(const DataSet& data, std::ostream& out)
{
    out << "x,y\n";
    for (int i = 0; i < data.size(); ++i)
        out << num17(data.x[i]) << "," << num17(data.y[i]) << "\n";
}

void save_csv(const DataSet& data, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error(path + ": cannot open for writing");
    write_csv(data, out);
}

}  // namespace nnps
