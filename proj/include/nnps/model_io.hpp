#pragma once

#include "nnps/bspline.hpp"

#include <string>
#include <vector>

namespace nnps {

/** On-disk fitted-model record (schema "nnps-model/1", a JSON document with
 *  fixed field order and 17-significant-digit numerics, so saving a loaded
 *  model reproduces the file byte for byte).
 *
 *  Provenance records the input path and the hyperparameter grid that
 *  produced the fit; it deliberately carries no wall-clock data so repeated
 *  runs of the same pipeline write identical files.
 */
struct ModelFile {
    int order = 4;
    int n_interior = 0;
    double lambda = 0.0;
    SplineModel model;

    std::string input_path;
    std::vector<double> lambda_grid;
    std::vector<int> knot_grid;

    bool has_selection = false;
    double sel_asr = 0.0;
    double sel_trace = 0.0;
    double sel_gcv = 0.0;
    double sel_aic = 0.0;
    std::string sel_status;
};

void save_model(const ModelFile& file, const std::string& path);
ModelFile load_model(const std::string& path);

}  // namespace nnps
