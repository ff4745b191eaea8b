#include "nnps/model_io.hpp"

#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nnps {

namespace {

constexpr const char* kSchema = "nnps-model/1";

std::string num17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_array(std::ostream& out, const Eigen::VectorXd& values)
{
    out << "[";
    for (int i = 0; i < values.size(); ++i)
        out << (i ? ", " : "") << num17(values[i]);
    out << "]";
}

}  // namespace

void save_model(const ModelFile& file, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error(path + ": cannot open for writing");

    // fixed field order, written by hand so numeric formatting stays pinned
    out << "{\n";
    out << "  \"schema\": \"" << kSchema << "\",\n";
    out << "  \"order\": " << file.order << ",\n";
    out << "  \"n_interior\": " << file.n_interior << ",\n";
    out << "  \"lambda\": " << num17(file.lambda) << ",\n";
    out << "  \"knots\": ";
    write_array(out, file.model.knots.knots);
    out << ",\n";
    out << "  \"alpha\": ";
    write_array(out, file.model.alpha);
    out << ",\n";
    out << "  \"provenance\": {\n";
    out << "    \"input\": " << nlohmann::json(file.input_path).dump() << ",\n";
    out << "    \"lambda_grid\": [";
    for (size_t i = 0; i < file.lambda_grid.size(); ++i)
        out << (i ? ", " : "") << num17(file.lambda_grid[i]);
    out << "],\n";
    out << "    \"knot_grid\": [";
    for (size_t i = 0; i < file.knot_grid.size(); ++i)
        out << (i ? ", " : "") << file.knot_grid[i];
    out << "]\n";
    out << "  }";
    if (file.has_selection) {
        out << ",\n  \"selection\": {\n";
        out << "    \"asr\": " << num17(file.sel_asr) << ",\n";
        out << "    \"trace_s\": " << num17(file.sel_trace) << ",\n";
        out << "    \"gcv\": " << num17(file.sel_gcv) << ",\n";
        out << "    \"aic\": " << num17(file.sel_aic) << ",\n";
        out << "    \"status\": " << nlohmann::json(file.sel_status).dump() << "\n";
        out << "  }";
    }
    out << "\n}\n";
}

ModelFile load_model(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error(path + ": cannot open for reading");

    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& err) {
        throw std::runtime_error(path + ": malformed model file (" + err.what() + ")");
    }

    if (doc.value("schema", "") != kSchema)
        throw std::runtime_error(path + ": unsupported schema '" +
                                 doc.value("schema", "<missing>") + "'");

    ModelFile file;
    file.order = doc.at("order").get<int>();
    file.n_interior = doc.at("n_interior").get<int>();
    file.lambda = doc.at("lambda").get<double>();

    const auto& knots = doc.at("knots");
    Eigen::VectorXd t(knots.size());
    for (size_t i = 0; i < knots.size(); ++i)
        t[i] = knots[i].get<double>();
    file.model.knots = knots_from_sequence(std::move(t), file.order);

    const auto& alpha = doc.at("alpha");
    if (static_cast<int>(alpha.size()) != file.model.knots.n_basis)
        throw std::runtime_error(path + ": alpha length does not match the knot vector");
    file.model.alpha.resize(alpha.size());
    for (size_t i = 0; i < alpha.size(); ++i)
        file.model.alpha[i] = alpha[i].get<double>();

    const auto& provenance = doc.at("provenance");
    file.input_path = provenance.at("input").get<std::string>();
    for (const auto& value : provenance.at("lambda_grid"))
        file.lambda_grid.push_back(value.get<double>());
    for (const auto& value : provenance.at("knot_grid"))
        file.knot_grid.push_back(value.get<int>());

    if (doc.contains("selection")) {
        const auto& selection = doc.at("selection");
        file.has_selection = true;
        file.sel_asr = selection.at("asr").get<double>();
        file.sel_trace = selection.at("trace_s").get<double>();
        file.sel_gcv = selection.at("gcv").get<double>();
        file.sel_aic = selection.at("aic").get<double>();
        file.sel_status = selection.at("status").get<std::string>();
    }
    return file;
}

}  // namespace nnps
