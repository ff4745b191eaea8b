// Command-line front end: synthetic data generation, nonnegative P-spline
// fitting with GCV/AIC hyperparameter scans, and curve export.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 solver failure.

#include "nnps/csv.hpp"
#include "nnps/generators.hpp"
#include "nnps/model_io.hpp"
#include "nnps/modelselect.hpp"
#include "nnps/nonneg.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitSolver = 3;

std::map<std::string, double> parse_params(const std::string& text)
{
    std::map<std::string, double> params;
    if (text.empty())
        return params;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw CLI::ValidationError("--params", "expected k=v, got '" + item + "'");
        try {
            params[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
        } catch (const std::exception&) {
            throw CLI::ValidationError("--params", "bad numeric value in '" + item + "'");
        }
    }
    return params;
}

std::pair<double, double> parse_range(const std::string& text)
{
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw CLI::ValidationError("--range", "expected a:b, got '" + text + "'");
    try {
        const double lo = std::stod(text.substr(0, colon));
        const double hi = std::stod(text.substr(colon + 1));
        return {lo, hi};
    } catch (const std::exception&) {
        throw CLI::ValidationError("--range", "bad numeric bounds in '" + text + "'");
    }
}

struct GenArgs {
    std::string family;
    std::string params;
    std::string range;
    int count = 0;
    double noise = 0.0;
    std::uint64_t seed = 0;
    std::string output;
};

int run_gen(const GenArgs& args)
{
    try {
        nnps::GeneratorSpec spec;
        spec.family = nnps::parse_family(args.family);
        spec.params = parse_params(args.params);
        spec.noise_sigma = args.noise;
        spec.seed = args.seed;

        const auto [lo, hi] = parse_range(args.range);
        if (!(lo <= hi)) {
            std::cerr << "gen: empty range " << args.range << "\n";
            return kExitData;
        }
        spec.abscissae.resize(args.count);
        for (int i = 0; i < args.count; ++i)
            spec.abscissae[i] =
                args.count == 1 ? lo : lo + (hi - lo) * i / double(args.count - 1);

        const nnps::DataSet data = nnps::generate(spec);
        nnps::save_csv(data, args.output);
    } catch (const std::exception& err) {
        std::cerr << "gen: " << err.what() << "\n";
        return kExitData;
    }
    return 0;
}

struct FitArgs {
    std::string input;
    std::string output;
    std::optional<double> lambda;
    bool scan = false;
    std::optional<int> knots;
    std::string knots_range;
    double tol = 1e-8;
    std::string model = "II";
    std::string report;
};

int run_fit(const FitArgs& args)
{
    nnps::DataSet data;
    try {
        data = nnps::load_csv(args.input);
    } catch (const std::exception& err) {
        std::cerr << "fit: " << err.what() << "\n";
        return kExitData;
    }

    std::vector<double> lambdas;
    std::vector<int> knot_counts;
    nnps::SelectionGrid grid;
    try {
        if (args.lambda)
            lambdas.push_back(*args.lambda);
        else
            lambdas = nnps::SelectionGrid::default_grid().lambda_values;

        if (args.knots) {
            knot_counts.push_back(*args.knots);
        } else if (!args.knots_range.empty()) {
            const auto [lo, hi] = parse_range(args.knots_range);
            for (int k = static_cast<int>(lo); k <= static_cast<int>(hi); ++k)
                knot_counts.push_back(k);
        } else {
            knot_counts = nnps::SelectionGrid::default_grid().interior_knot_counts;
        }
        grid = nnps::SelectionGrid(lambdas, knot_counts);
    } catch (const std::exception& err) {
        std::cerr << "fit: " << err.what() << "\n";
        return kExitUsage;
    }

    nnps::FitOptions options;
    options.model = args.model == "I" ? nnps::FitModel::model_I : nnps::FitModel::model_II;
    options.solver.tol = args.tol;

    nnps::SelectionResult result;
    try {
        result = nnps::select_model(data.x, data.y, grid, options);
    } catch (const std::exception& err) {
        std::cerr << "fit: " << err.what() << "\n";
        return kExitSolver;
    }

    const double audit = nnps::min_on_grid(result.best.model, 10000);
    if (!(audit >= -1e-8)) {
        std::cerr << "fit: nonnegativity audit failed (grid minimum " << audit << ")\n";
        return kExitSolver;
    }

    try {
        nnps::ModelFile file;
        file.order = 4;
        file.n_interior = result.best.n_interior;
        file.lambda = result.best.lambda;
        file.model = result.best.model;
        file.input_path = args.input;
        file.lambda_grid = lambdas;
        file.knot_grid = knot_counts;
        file.has_selection = true;
        file.sel_asr = result.best.asr;
        file.sel_trace = result.best.trace_s;
        file.sel_gcv = result.best.gcv;
        file.sel_aic = result.best.aic;
        file.sel_status = nnps::to_string(result.best.solver_status);
        nnps::save_model(file, args.output);

        if (!args.report.empty()) {
            std::ofstream report(args.report, std::ios::binary);
            if (!report)
                throw std::runtime_error(args.report + ": cannot open for writing");
            nnps::write_report_csv(result.table, report);
        }
    } catch (const std::exception& err) {
        std::cerr << "fit: " << err.what() << "\n";
        return kExitData;
    }

    std::printf("selected n_interior=%d lambda=%g gcv=%.6g aic=%.6g\n", result.best.n_interior,
                result.best.lambda, result.best.gcv, result.best.aic);
    return 0;
}

struct EvalArgs {
    std::string model;
    int points = 200;
    std::optional<double> at;
    std::string output;
};

int run_eval(const EvalArgs& args)
{
    nnps::ModelFile file;
    try {
        file = nnps::load_model(args.model);
    } catch (const std::exception& err) {
        std::cerr << "eval: " << err.what() << "\n";
        return kExitData;
    }

    try {
        if (args.at) {
            std::printf("%.17g\n", nnps::eval_spline(file.model, *args.at));
            return 0;
        }
        if (args.points < 2) {
            std::cerr << "eval: need at least two points\n";
            return kExitUsage;
        }
        const double lo = file.model.knots.x_min();
        const double hi = file.model.knots.x_max();
        nnps::DataSet curve;
        curve.x.resize(args.points);
        curve.y.resize(args.points);
        for (int i = 0; i < args.points; ++i) {
            const double x = i == args.points - 1
                                 ? hi
                                 : std::min(hi, lo + (hi - lo) * i / double(args.points - 1));
            curve.x[i] = x;
            curve.y[i] = nnps::eval_spline(file.model, x);
        }
        if (args.output.empty())
            nnps::write_csv(curve, std::cout);
        else
            nnps::save_csv(curve, args.output);
    } catch (const std::exception& err) {
        std::cerr << "eval: " << err.what() << "\n";
        return kExitData;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"nonnegative P-spline fitting via second-order cone programming"};
    app.require_subcommand(1);

    GenArgs gen_args;
    CLI::App* gen = app.add_subcommand("gen", "generate synthetic data");
    gen->add_option("--family", gen_args.family,
                    "poisson_pmf | gamma_pdf | weibull_pdf | pareto_pdf")
        ->required();
    gen->add_option("--params", gen_args.params, "family parameters k=v,...");
    gen->add_option("--range", gen_args.range, "abscissa range a:b")->required();
    gen->add_option("--count", gen_args.count, "number of samples")
        ->required()
        ->check(CLI::NonNegativeNumber);
    gen->add_option("--noise", gen_args.noise, "Gaussian noise sigma")
        ->check(CLI::NonNegativeNumber);
    gen->add_option("--seed", gen_args.seed, "random seed");
    gen->add_option("--output", gen_args.output, "output CSV path")->required();

    FitArgs fit_args;
    CLI::App* fit = app.add_subcommand("fit", "fit a nonnegative P-spline");
    fit->add_option("--input", fit_args.input, "input CSV (header x,y)")->required();
    fit->add_option("--output", fit_args.output, "output model file")->required();
    CLI::Option* lambda_opt =
        fit->add_option("--lambda", fit_args.lambda, "fixed smoothing weight");
    fit->add_flag("--scan", fit_args.scan, "scan the default hyperparameter grids")
        ->excludes(lambda_opt);
    CLI::Option* knots_opt =
        fit->add_option("--knots", fit_args.knots, "fixed interior knot count");
    fit->add_option("--knots-range", fit_args.knots_range, "interior knot range a:b")
        ->excludes(knots_opt);
    fit->add_option("--tol", fit_args.tol, "solver tolerance")->check(CLI::PositiveNumber);
    fit->add_option("--model", fit_args.model, "SOCP formulation (I or II)")
        ->check(CLI::IsMember({"I", "II"}));
    fit->add_option("--report", fit_args.report, "write the full scan table as CSV");

    EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand("eval", "evaluate a fitted model");
    eval->add_option("--model", eval_args.model, "model file from fit")->required();
    eval->add_option("--points", eval_args.points, "grid size for curve export");
    eval->add_option("--at", eval_args.at, "evaluate at a single abscissa");
    eval->add_option("--output", eval_args.output, "output CSV (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& help) {
        return app.exit(help);
    } catch (const CLI::ParseError& err) {
        app.exit(err);
        return kExitUsage;
    }

    if (gen->parsed())
        return run_gen(gen_args);
    if (fit->parsed())
        return run_fit(fit_args);
    return run_eval(eval_args);
}
