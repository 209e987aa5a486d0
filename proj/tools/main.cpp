#include <CLI11.hpp>
#include <iostream>
#include <json.hpp>

#include "fdg/commands.hpp"
#include "fdg/errors.hpp"
#include "fdg/io.hpp"
#include "fdg/version.hpp"

using nlohmann::json;

namespace {

// Configuration comes from an optional JSON file; any flag given on the
// command line overrides the corresponding key.
struct Overrides {
    std::string config_path;
    std::vector<std::pair<std::string, json>> values;
};

json load_config(const Overrides& ov) {
    json config = json::object();
    if (!ov.config_path.empty()) {
        try {
            config = json::parse(fdg::io::read_text_file(ov.config_path));
        } catch (const json::exception& e) {
            throw fdg::ConfigError(std::string("config file: ") + e.what());
        }
        if (!config.is_object()) throw fdg::ConfigError("config file must hold a JSON object");
    }
    for (const auto& [key, value] : ov.values) config[key] = value;
    return config;
}

void add_common(CLI::App* cmd, Overrides& ov) {
    cmd->add_option("--config", ov.config_path, "JSON config file");
    auto track_str = [&ov](const std::string& key) {
        return [&ov, key](const std::string& v) { ov.values.emplace_back(key, v); };
    };
    auto track_num = [&ov](const std::string& key) {
        return [&ov, key](const std::string& v) { ov.values.emplace_back(key, std::stod(v)); };
    };
    auto track_int = [&ov](const std::string& key) {
        return [&ov, key](const std::string& v) { ov.values.emplace_back(key, std::stoll(v)); };
    };
    auto track_bool = [&ov](const std::string& key) {
        return [&ov, key](std::int64_t count) {
            if (count > 0) ov.values.emplace_back(key, true);
        };
    };

    cmd->add_option_function<std::string>("--out-dir", track_str("out_dir"), "output directory");
    cmd->add_option_function<std::string>("--seed", track_int("seed"), "master seed");

    const std::string name = cmd->get_name();
    if (name == "simulate" || name == "roc") {
        cmd->add_option_function<std::string>("--model", track_str("model"), "M1, M2 or M3");
        cmd->add_option_function<std::string>("--p", track_int("p"), "node count");
        cmd->add_option_function<std::string>("--m", track_int("m"), "generator basis size");
        cmd->add_option_function<std::string>("--n", track_int("n"), "samples per population");
        cmd->add_option_function<std::string>("--T", track_int("T"), "observations per curve");
        cmd->add_option_function<std::string>("--noise-sd", track_num("noise_sd"),
                                              "observation noise standard deviation");
        cmd->add_option_function<std::string>("--replicates", track_int("replicates"),
                                              "number of replicates");
    }
    if (name == "estimate" || name == "tune") {
        cmd->add_option_function<std::string>("--x-csv", track_str("x_csv"), "population X CSV");
        cmd->add_option_function<std::string>("--y-csv", track_str("y_csv"), "population Y CSV");
        cmd->add_option_function<std::string>("--domain-lo", track_num("domain_lo"),
                                              "domain lower endpoint");
        cmd->add_option_function<std::string>("--domain-hi", track_num("domain_hi"),
                                              "domain upper endpoint");
    }
    if (name == "estimate" || name == "roc" || name == "tune") {
        cmd->add_option_function<std::string>("--basis", track_str("basis"),
                                              "bspline or fourier");
        cmd->add_option_function<std::string>("--L", track_int("L"), "basis size");
        cmd->add_option_function<std::string>("--degree", track_int("degree"), "spline degree");
        cmd->add_option_function<std::string>("--M", track_int("M"), "score dimension");
        cmd->add_flag_function("--center", track_bool("center"),
                               "center covariances (data with unknown mean)");
    }
    if (name == "estimate") {
        cmd->add_option_function<std::string>("--method", track_str("method"),
                                              "fudge, gfgl, ffgl, ffgl2, fgl or multiple");
        cmd->add_option_function<std::string>("--lambda", track_num("lambda"), "penalty value");
        cmd->add_option_function<std::string>("--target-edges", track_int("target_edges"),
                                              "bisect lambda for this edge count");
        cmd->add_option_function<std::string>("--target-fraction", track_num("target_fraction"),
                                              "bisect lambda for this edge fraction");
        cmd->add_option_function<std::string>("--epsilon", track_num("epsilon"),
                                              "edge threshold");
        cmd->add_option_function<std::string>("--lambda1", track_num("lambda1"),
                                              "joint lasso sparsity penalty");
        cmd->add_option_function<std::string>("--lambda2", track_num("lambda2"),
                                              "joint lasso similarity penalty");
        cmd->add_option_function<std::string>("--num-times", track_int("num_times"),
                                              "time points for the multiple baseline");
    }
    if (name == "tune") {
        cmd->add_option_function<std::string>("--mode", track_str("mode"),
                                              "dims, lambda or both");
        cmd->add_option_function<std::string>("--folds", track_int("folds"), "CV folds");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Functional differential graph estimation"};
    app.set_version_flag("--version", std::string(fdg::kToolVersion));
    app.require_subcommand(1);

    Overrides ov_sim, ov_est, ov_roc, ov_tune;
    CLI::App* sim = app.add_subcommand("simulate", "generate synthetic two-population data");
    CLI::App* est = app.add_subcommand("estimate", "estimate a differential graph from CSVs");
    CLI::App* roc = app.add_subcommand("roc", "simulate, estimate and score ROC tables");
    CLI::App* tune = app.add_subcommand("tune", "cross-validate dimensions and penalty");
    add_common(sim, ov_sim);
    add_common(est, ov_est);
    add_common(roc, ov_roc);
    add_common(tune, ov_tune);

    CLI11_PARSE(app, argc, argv);

    try {
        json summary;
        if (sim->parsed()) summary = fdg::cli::run_simulate(load_config(ov_sim));
        if (est->parsed()) summary = fdg::cli::run_estimate(load_config(ov_est));
        if (roc->parsed()) summary = fdg::cli::run_roc(load_config(ov_roc));
        if (tune->parsed()) summary = fdg::cli::run_tune(load_config(ov_tune));
        std::cout << summary.dump(2) << std::endl;
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return fdg::cli::exit_code_for(e);
    }
}
