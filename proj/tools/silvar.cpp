// Command line surface: fit, grid, predict, trend, synth, eval.
// Exit codes: 0 success, 2 bad input, 3 solver failure.
#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "silvar/io.hpp"
#include "silvar/models.hpp"
#include "silvar/synth.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

using namespace silvar;
using nlohmann::json;

namespace {

struct SolverFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Matrix matrix_from_csv(const std::string& path) {
    return io::read_csv(path).columns_as_rows.transpose();
}

void matrix_to_csv(const std::string& path, const Matrix& M, const std::string& prefix) {
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(M.cols()));
    for (Eigen::Index j = 0; j < M.cols(); ++j) names.push_back(prefix + std::to_string(j + 1));
    io::write_csv(path, names, Matrix(M.transpose()));
}

struct FitFlags {
    std::string mode = "multitask";
    std::string data_path;
    int order = 1;
    std::string h1 = "l1";
    std::string h2 = "nuclear";
    double lambda_s = 0.1;
    double lambda_l = 0.1;
    std::string link = "auto";
    double link_scale = 1.0;
    SolverConfig config;
    std::string out = "model.json";
    std::string report_path;
};

void add_fit_flags(CLI::App* cmd, FitFlags& f, bool with_lambdas) {
    cmd->add_option("--mode", f.mode, "multitask | ar | rpca")
        ->check(CLI::IsMember({"multitask", "ar", "rpca"}));
    cmd->add_option("--data", f.data_path, "training dataset CSV")->required();
    cmd->add_option("--order", f.order, "lag order (ar mode)");
    cmd->add_option("--h1", f.h1, "l1 | group | none")->check(CLI::IsMember({"l1", "group", "none"}));
    cmd->add_option("--h2", f.h2, "nuclear | ball | none")
        ->check(CLI::IsMember({"nuclear", "ball", "none"}));
    if (with_lambdas) {
        cmd->add_option("--lambda-s", f.lambda_s, "sparse penalty weight");
        cmd->add_option("--lambda-l", f.lambda_l, "latent penalty weight");
    }
    cmd->add_option("--link", f.link,
                    "auto = estimate the link; identity|softplus|logistic fix it")
        ->check(CLI::IsMember({"auto", "identity", "softplus", "logistic"}));
    cmd->add_option("--link-scale", f.link_scale, "scale c of the fixed link");
    cmd->add_option("--seed", f.config.seed, "rng seed");
    cmd->add_option("--tol", f.config.objective_tolerance, "relative objective tolerance");
    cmd->add_option("--max-iters", f.config.max_iters, "outer iteration cap");
    cmd->add_option("--lmr-max-iters", f.config.lmr_max_iters, "projection iteration cap");
    cmd->add_option("--out", f.out, "model output path");
    cmd->add_option("--report", f.report_path, "fit report output path");
}

RegularizerSpec regularizer_from_flags(const FitFlags& f) {
    RegularizerSpec reg;
    reg.h1_kind = f.h1 == "l1"      ? H1Kind::element_l1
                  : f.h1 == "group" ? H1Kind::group_l2_across_lags
                                    : H1Kind::none;
    reg.h2_kind = f.h2 == "nuclear" ? H2Kind::nuclear_norm
                  : f.h2 == "ball"  ? H2Kind::nuclear_ball
                                    : H2Kind::none;
    reg.lambda_s = f.lambda_s;
    reg.lambda_l = f.lambda_l;
    return reg;
}

solver::FixedLink fixed_link_from_flags(const FitFlags& f) {
    solver::FixedLink link;
    link.scale = f.link_scale;
    if (f.link == "identity") link.kind = solver::NamedLink::identity;
    if (f.link == "softplus") link.kind = solver::NamedLink::softplus;
    if (f.link == "logistic") link.kind = solver::NamedLink::scaled_logistic;
    return link;
}

// multitask: y*/x* header split; rpca: every column is a response, X = I
Dataset load_dataset(const FitFlags& f) {
    const io::CsvTable table = io::read_csv(f.data_path);
    if (f.mode == "rpca") {
        Dataset d;
        d.Y = table.columns_as_rows;
        d.X = Matrix::Identity(d.Y.cols(), d.Y.cols());
        return d;
    }
    return io::dataset_from_table(table);
}

Matrix load_series(const std::string& path) {
    const io::CsvTable table = io::read_csv(path);
    Matrix series(table.columns_as_rows.rows(), table.columns_as_rows.cols());
    Eigen::Index row = 0;
    for (std::size_t v = 0; v < table.names.size(); ++v) {
        if (table.names[v] == "time") continue;
        series.row(row++) = table.columns_as_rows.row(static_cast<Eigen::Index>(v));
    }
    series.conservativeResize(row, Eigen::NoChange);
    return series;
}

std::pair<SilvarModel, FitReport> run_fit(const FitFlags& f) {
    const RegularizerSpec reg = regularizer_from_flags(f);
    if (f.mode == "ar") {
        const Matrix series = load_series(f.data_path);
        if (series.cols() <= 2 * f.order) {
            throw std::invalid_argument(
                "ar fit needs strictly more than 2*order time steps (got " +
                std::to_string(series.cols()) + " steps for order " + std::to_string(f.order) +
                ")");
        }
        try {
            return models::fit_silvar_ar(series, f.order, reg, f.config);
        } catch (const std::runtime_error& e) {
            throw SolverFailure(e.what());
        }
    }
    const Dataset d = load_dataset(f);
    try {
        if (f.link == "auto") return models::fit_silvar(d, reg, f.config);
        return models::fit_glm_oracle(d, fixed_link_from_flags(f), reg, f.config);
    } catch (const std::runtime_error& e) {
        throw SolverFailure(e.what());
    }
}

int cmd_fit(const FitFlags& f) {
    const auto [model, report] = run_fit(f);
    io::save_model(model, f.out);
    if (!f.report_path.empty()) io::save_report(report, f.report_path);
    std::cout << "fit: " << (report.converged ? "converged" : "iteration cap reached") << " in "
              << report.iterations << " iterations, objective "
              << report.objective_trace.back() << "\n";
    return 0;
}

int cmd_grid(const FitFlags& f, const std::string& grid_range, const std::string& val_path,
             const std::string& truth_path, const std::string& surface_path, int jobs) {
    const auto colon = grid_range.find(':');
    if (colon == std::string::npos) {
        throw std::invalid_argument("--grid wants i_min:i_max (exponents of 10^(i/4))");
    }
    const int i_min = std::stoi(grid_range.substr(0, colon));
    const int i_max = std::stoi(grid_range.substr(colon + 1));
    const std::vector<double> lambdas = models::lambda_grid(i_min, i_max);

    models::GridOptions options;
    options.reg = regularizer_from_flags(f);
    options.config = f.config;
    options.jobs = jobs;
    if (f.link == "auto") {
        options.kind = models::FitKind::silvar;
    } else {
        options.kind = models::FitKind::glm_oracle;
        options.glm_link = fixed_link_from_flags(f);
    }
    if (options.reg.h2_kind == H2Kind::none) options.kind = models::FitKind::sparse_sim;

    Dataset train, val;
    FitFlags vf = f;
    if (f.mode == "ar") {
        options.mode = ModelMode::autoregressive;
        options.order = f.order;
        const models::ArDesign dtrain = models::build_ar_design(load_series(f.data_path), f.order);
        vf.data_path = val_path;
        const models::ArDesign dval = models::build_ar_design(load_series(val_path), f.order);
        train.Y = dtrain.Y;
        train.X = dtrain.X;
        val.Y = dval.Y;
        val.X = dval.X;
    } else {
        train = load_dataset(f);
        vf.data_path = val_path;
        val = load_dataset(vf);
    }

    Matrix truth;
    if (!truth_path.empty()) {
        truth = matrix_from_csv(truth_path);
        options.truth_A = &truth;
    }
    const std::vector<double> lambdas_l =
        options.kind == models::FitKind::sparse_sim ? std::vector<double>{0.0} : lambdas;

    models::GridResult result;
    try {
        result = models::grid_search(train, val, lambdas, lambdas_l, options);
    } catch (const std::runtime_error& e) {
        throw SolverFailure(e.what());
    }

    io::save_model(result.best_model, f.out);
    if (!surface_path.empty()) {
        std::ofstream out(surface_path);
        if (!out) throw std::runtime_error("cannot write " + surface_path);
        out << "lambda_s,lambda_l,metric,iterations,converged\n";
        json cell;
        for (const auto& c : result.cells) {
            cell = c.lambda_s;
            out << cell.dump() << ',';
            cell = c.lambda_l;
            out << cell.dump() << ',';
            cell = c.metric;
            out << cell.dump() << ',' << c.iterations << ',' << (c.converged ? 1 : 0) << '\n';
        }
    }
    const auto& best = result.cells[static_cast<std::size_t>(result.best_index)];
    std::cout << "grid: best lambda_s " << best.lambda_s << ", lambda_l " << best.lambda_l
              << ", metric " << best.metric << "\n";
    return 0;
}

int cmd_predict(const std::string& model_path, const std::string& data_path,
                const std::string& out) {
    const SilvarModel model = io::load_model(model_path);
    Matrix predictions;
    if (model.mode == ModelMode::autoregressive) {
        predictions = models::predict_ar_series(model, load_series(data_path));
    } else {
        const io::CsvTable table = io::read_csv(data_path);
        Dataset d;
        try {
            d = io::dataset_from_table(table);
        } catch (const std::runtime_error&) {
            d.X = table.columns_as_rows;  // regressors only
        }
        if (d.X.rows() != model.A.cols()) {
            throw std::invalid_argument("predict: dataset has " + std::to_string(d.X.rows()) +
                                        " regressors, model wants " +
                                        std::to_string(model.A.cols()));
        }
        predictions = models::predict(model, d.X);
    }
    matrix_to_csv(out, predictions.transpose(), "yhat");
    std::cout << "predict: wrote " << predictions.cols() << " predictions\n";
    return 0;
}

int cmd_trend(const std::string& model_path, const std::string& data_path, double ridge_lambda,
              const std::string& out) {
    const SilvarModel model = io::load_model(model_path);
    if (model.mode != ModelMode::autoregressive) {
        throw std::invalid_argument("trend extraction needs an autoregressive model");
    }
    const Matrix series = load_series(data_path);
    models::TrendEstimate trend;
    try {
        trend = models::fit_trend(series, model, ridge_lambda);
    } catch (const std::runtime_error& e) {
        throw SolverFailure(e.what());
    }
    matrix_to_csv(out, trend.L_prime.transpose(), "trend");
    std::cout << "trend: reliable columns " << trend.reliable_range.first << ".."
              << trend.reliable_range.second << (trend.converged ? "" : " (not converged)")
              << "\n";
    return 0;
}

int cmd_synth_multitask(int m, int p, double hidden, int n, const std::string& link, double c,
                        double noise, long seed, const std::string& out_data,
                        const std::string& out_truth) {
    synth::SynthSpec spec;
    spec.m = m;
    spec.p = p;
    spec.h = hidden;
    spec.n = n;
    spec.link_kind = link == "g2"         ? synth::LinkKind::g2_scaled_logistic
                     : link == "identity" ? synth::LinkKind::identity
                                          : synth::LinkKind::g1_softplus;
    spec.c = c;
    spec.noise_sigma = noise;
    spec.seed = seed;
    const synth::SynthTruth truth = synth::generate_multitask(spec);

    std::vector<std::string> names;
    Matrix table(truth.Y.rows() + truth.X.rows(), truth.Y.cols());
    table << truth.Y, truth.X;
    for (Eigen::Index i = 0; i < truth.Y.rows(); ++i) names.push_back("y" + std::to_string(i + 1));
    for (Eigen::Index i = 0; i < truth.X.rows(); ++i) names.push_back("x" + std::to_string(i + 1));
    io::write_csv(out_data, names, table);

    if (!out_truth.empty()) {
        json doc;
        doc["A_true"] = std::vector<double>(truth.A_true.data(),
                                            truth.A_true.data() + truth.A_true.size());
        doc["A_shape"] = {truth.A_true.rows(), truth.A_true.cols()};
        doc["B_shape"] = {truth.B_true.rows(), truth.B_true.cols()};
        std::ofstream out(out_truth);
        if (!out) throw std::runtime_error("cannot write " + out_truth);
        out << doc.dump();
    }
    std::cout << "synth: wrote " << truth.Y.cols() << " samples\n";
    return 0;
}

int cmd_synth_ar(int N, int K, int order, const std::string& trend, double amplitude,
                 double noise, long seed, const std::string& out_data,
                 const std::string& out_truth) {
    synth::ArSynthSpec spec;
    spec.N = N;
    spec.K = K;
    spec.order = order;
    spec.trend_kind = trend == "sinusoid" ? synth::TrendKind::sinusoid : synth::TrendKind::none;
    spec.trend_amplitude = amplitude;
    spec.noise_sigma = noise;
    spec.seed = seed;
    const synth::ArSynthTruth truth = synth::generate_ar_with_trend(spec);

    std::vector<std::string> names;
    for (Eigen::Index i = 0; i < truth.series.rows(); ++i) {
        names.push_back("s" + std::to_string(i + 1));
    }
    io::write_csv(out_data, names, truth.series);
    if (!out_truth.empty()) {
        json doc;
        doc["A_blocks"] = std::vector<double>(truth.A_blocks.data(),
                                              truth.A_blocks.data() + truth.A_blocks.size());
        doc["A_shape"] = {truth.A_blocks.rows(), truth.A_blocks.cols()};
        doc["trend"] =
            std::vector<double>(truth.trend.data(), truth.trend.data() + truth.trend.size());
        std::ofstream out(out_truth);
        if (!out) throw std::runtime_error("cannot write " + out_truth);
        out << doc.dump();
    }
    std::cout << "synth: wrote a " << N << " x " << K << " series\n";
    return 0;
}

int cmd_eval(const std::string& metric, const std::string& est_path,
             const std::string& truth_path, const std::string& pred_path,
             const std::string& actual_path) {
    double value = 0.0;
    if (metric == "l1") {
        Matrix est;
        if (est_path.size() > 5 && est_path.substr(est_path.size() - 5) == ".json") {
            est = io::load_model(est_path).A;
        } else {
            est = matrix_from_csv(est_path);
        }
        value = models::mean_abs_error(est, matrix_from_csv(truth_path));
    } else {
        value = models::rmse(matrix_from_csv(pred_path), matrix_from_csv(actual_path));
    }
    json printed = value;  // shortest round-trip decimal
    std::cout << printed.dump() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"single-index latent variable regression"};
    app.require_subcommand(1);

    FitFlags fit_flags;
    auto* fit = app.add_subcommand("fit", "fit one model");
    add_fit_flags(fit, fit_flags, true);

    FitFlags grid_flags;
    std::string grid_range = "-8:8";
    std::string val_path;
    std::string truth_path;
    std::string surface_path;
    int jobs = 0;
    auto* grid = app.add_subcommand("grid", "validation grid over the penalty weights");
    add_fit_flags(grid, grid_flags, false);
    grid->add_option("--grid", grid_range, "exponent range i_min:i_max, lambda = 10^(i/4)");
    grid->add_option("--val", val_path, "validation dataset CSV")->required();
    grid->add_option("--truth", truth_path, "true A CSV; switches the metric to l1 error");
    grid->add_option("--surface", surface_path, "error surface CSV output");
    grid->add_option("--jobs", jobs, "parallel workers (0 = hardware)");

    std::string model_path, data_path, out_path = "out.csv";
    auto* predict = app.add_subcommand("predict", "predictions for new data");
    predict->add_option("--model", model_path, "model JSON")->required();
    predict->add_option("--data", data_path, "input CSV")->required();
    predict->add_option("--out", out_path, "predictions CSV");

    std::string trend_model, trend_data, trend_out = "trend.csv";
    double ridge_lambda = 1.0;
    auto* trend = app.add_subcommand("trend", "latent trend extraction");
    trend->add_option("--model", trend_model, "autoregressive model JSON")->required();
    trend->add_option("--data", trend_data, "series CSV")->required();
    trend->add_option("--ridge-lambda", ridge_lambda, "ridge weight");
    trend->add_option("--out", trend_out, "trend CSV");

    auto* synth_cmd = app.add_subcommand("synth", "synthetic data generators");
    std::string kind = "multitask";
    int m = 25, p = 25, n = 100, N = 10, K = 365, order = 2;
    double hidden = 0.1, c_scale = 1.0, noise = 0.1, amplitude = 10.0;
    long seed = 0;
    std::string link = "g1", trend_kind = "sinusoid";
    std::string out_data = "data.csv", out_truth;
    synth_cmd->add_option("--kind", kind, "multitask | ar")
        ->check(CLI::IsMember({"multitask", "ar"}));
    synth_cmd->add_option("--m", m, "responses");
    synth_cmd->add_option("--p", p, "regressors");
    synth_cmd->add_option("--hidden", hidden, "hidden fraction h");
    synth_cmd->add_option("--n", n, "samples");
    synth_cmd->add_option("--link", link, "g1 | g2 | identity");
    synth_cmd->add_option("--c", c_scale, "link scale");
    synth_cmd->add_option("--noise", noise, "noise level");
    synth_cmd->add_option("--series-n", N, "series count (ar)");
    synth_cmd->add_option("--length", K, "series length (ar)");
    synth_cmd->add_option("--order", order, "lag order (ar)");
    synth_cmd->add_option("--trend", trend_kind, "sinusoid | none (ar)");
    synth_cmd->add_option("--amplitude", amplitude, "trend amplitude (ar)");
    synth_cmd->add_option("--seed", seed, "rng seed");
    synth_cmd->add_option("--out-data", out_data, "dataset CSV output");
    synth_cmd->add_option("--out-truth", out_truth, "ground truth JSON output");

    auto* eval = app.add_subcommand("eval", "error metrics");
    std::string metric = "rmse", est_path, eval_truth, pred_path, actual_path;
    eval->add_option("--metric", metric, "l1 | rmse")->check(CLI::IsMember({"l1", "rmse"}));
    eval->add_option("--est", est_path, "estimate (model JSON or matrix CSV), l1 metric");
    eval->add_option("--truth", eval_truth, "true matrix CSV, l1 metric");
    eval->add_option("--pred", pred_path, "prediction CSV, rmse metric");
    eval->add_option("--actual", actual_path, "actual CSV, rmse metric");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*fit) return cmd_fit(fit_flags);
        if (*grid) {
            return cmd_grid(grid_flags, grid_range, val_path, truth_path, surface_path, jobs);
        }
        if (*predict) return cmd_predict(model_path, data_path, out_path);
        if (*trend) return cmd_trend(trend_model, trend_data, ridge_lambda, trend_out);
        if (*synth_cmd) {
            if (kind == "ar") {
                return cmd_synth_ar(N, K, order, trend_kind, amplitude, noise, seed, out_data,
                                    out_truth);
            }
            return cmd_synth_multitask(m, p, hidden, n, link, c_scale, noise, seed, out_data,
                                       out_truth);
        }
        if (*eval) {
            if (metric == "l1" && (est_path.empty() || eval_truth.empty())) {
                throw std::invalid_argument("l1 metric wants --est and --truth");
            }
            if (metric == "rmse" && (pred_path.empty() || actual_path.empty())) {
                throw std::invalid_argument("rmse metric wants --pred and --actual");
            }
            return cmd_eval(metric, est_path, eval_truth, pred_path, actual_path);
        }
    } catch (const SolverFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
