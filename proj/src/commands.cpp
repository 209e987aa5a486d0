#include "fdg/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include "fdg/io.hpp"
#include "fdg/jfgl.hpp"
#include "fdg/pipeline.hpp"
#include "fdg/rng.hpp"
#include "fdg/sim.hpp"
#include "fdg/tune.hpp"
#include "fdg/version.hpp"

namespace fdg::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kModelStream = 0xF0;
constexpr std::uint64_t kDataStream = 0xDA;

// Typed, whitelist-checked access to a command configuration.
class Cfg {
public:
    Cfg(json config, std::set<std::string> allowed, std::string command)
        : j_(std::move(config)), command_(std::move(command)) {
        if (!j_.is_object()) throw ConfigError(command_ + ": config must be a JSON object");
        for (const auto& [key, value] : j_.items())
            if (!allowed.count(key))
                throw ConfigError(command_ + ": unknown config key '" + key + "'");
    }

    bool has(const std::string& key) const { return j_.contains(key) && !j_[key].is_null(); }

    int geti(const std::string& key, int def) const { return get_num<int>(key, def); }
    double getd(const std::string& key, double def) const { return get_num<double>(key, def); }
    std::uint64_t getu(const std::string& key, std::uint64_t def) const {
        return get_num<std::uint64_t>(key, def);
    }

    bool getb(const std::string& key, bool def) const {
        if (!has(key)) return def;
        if (!j_[key].is_boolean()) throw ConfigError(command_ + ": '" + key + "' must be a bool");
        return j_[key].get<bool>();
    }

    std::string gets(const std::string& key, const std::string& def) const {
        if (!has(key)) return def;
        if (!j_[key].is_string()) throw ConfigError(command_ + ": '" + key + "' must be a string");
        return j_[key].get<std::string>();
    }

    std::string require_string(const std::string& key) const {
        if (!has(key)) throw ConfigError(command_ + ": missing required key '" + key + "'");
        return gets(key, "");
    }

    std::vector<double> number_list(const std::string& key) const {
        if (!has(key) || !j_[key].is_array())
            throw ConfigError(command_ + ": '" + key + "' must be an array of numbers");
        std::vector<double> out;
        for (const auto& v : j_[key]) {
            if (!v.is_number()) throw ConfigError(command_ + ": '" + key + "' must be numeric");
            out.push_back(v.get<double>());
        }
        return out;
    }

    std::vector<int> int_list(const std::string& key) const {
        std::vector<int> out;
        for (double v : number_list(key)) out.push_back(static_cast<int>(std::llround(v)));
        return out;
    }

    const json& raw() const { return j_; }
    const json& at(const std::string& key) const { return j_.at(key); }

private:
    template <typename T>
    T get_num(const std::string& key, T def) const {
        if (!has(key)) return def;
        if (!j_[key].is_number()) throw ConfigError(command_ + ": '" + key + "' must be a number");
        return j_[key].get<T>();
    }

    json j_;
    std::string command_;
};

SimModel parse_model(const std::string& name) {
    if (name == "M1") return SimModel::M1;
    if (name == "M2") return SimModel::M2;
    if (name == "M3") return SimModel::M3;
    throw ConfigError("unknown simulation model '" + name + "' (expect M1, M2 or M3)");
}

BasisKind parse_basis(const std::string& name) {
    if (name == "bspline") return BasisKind::OrthonormalBSpline;
    if (name == "fourier") return BasisKind::Fourier;
    throw ConfigError("unknown basis '" + name + "' (expect bspline or fourier)");
}

PrecisionPair generate_pair(SimModel model, int p, int m, std::uint64_t seed, int replicate) {
    std::uint64_t graph_seed = derive_seed(seed, {kModelStream, static_cast<std::uint64_t>(replicate)});
    switch (model) {
        case SimModel::M1: return gen_model1(p, m, graph_seed);
        case SimModel::M2: return gen_model2(p, m);
        case SimModel::M3: return gen_model3(p, m, graph_seed);
    }
    throw ConfigError("unknown model");
}

RawDataset generate_data(const Eigen::MatrixXd& omega, int m, int n, int T, double sd,
                         std::uint64_t seed, int replicate, int population) {
    std::uint64_t data_seed = derive_seed(seed, {kDataStream, static_cast<std::uint64_t>(replicate),
                                                 static_cast<std::uint64_t>(population)});
    return sample_functional_data(omega, m, n, T, sd, data_seed);
}

void write_manifest(const std::string& out_dir, const std::string& command, const json& resolved,
                    const json& extra) {
    json manifest;
    manifest["tool"] = kToolName;
    manifest["tool_version"] = kToolVersion;
    manifest["command"] = command;
    manifest["config"] = resolved;
    char hex[20];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(io::fnv1a(resolved.dump())));
    manifest["config_hash"] = hex;
    for (const auto& [key, value] : extra.items()) manifest[key] = value;
    io::write_text_file((fs::path(out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

std::vector<double> resolve_lambda_grid(const Cfg& cfg, const std::string& key,
                                        double default_max) {
    // Either an explicit array or {count, min, max} for a log-spaced grid.
    if (cfg.has(key) && cfg.at(key).is_array()) {
        auto grid = cfg.number_list(key);
        if (grid.empty()) throw ConfigError("lambda grid must be nonempty");
        return grid;
    }
    int count = 30;
    double gmin = -1.0, gmax = -1.0;
    if (cfg.has(key)) {
        const json& spec = cfg.at(key);
        if (!spec.is_object()) throw ConfigError("'" + key + "' must be an array or an object");
        for (const auto& [k, v] : spec.items()) {
            if (k != "count" && k != "min" && k != "max")
                throw ConfigError("unknown lambda grid key '" + k + "'");
            if (!v.is_number()) throw ConfigError("lambda grid '" + k + "' must be a number");
        }
        if (spec.contains("count")) count = spec["count"].get<int>();
        if (spec.contains("min")) gmin = spec["min"].get<double>();
        if (spec.contains("max")) gmax = spec["max"].get<double>();
    }
    if (count < 1) throw ConfigError("lambda grid count must be >= 1");
    if (gmax <= 0.0) gmax = default_max;
    if (gmin <= 0.0) gmin = 1e-3 * gmax;
    if (!(gmax > 0.0)) throw ConfigError("cannot infer a lambda grid; give explicit values");
    std::vector<double> grid(static_cast<size_t>(count));
    if (count == 1) {
        grid[0] = gmax;
        return grid;
    }
    const double lo = std::log(gmin), hi = std::log(gmax);
    for (int i = 0; i < count; ++i)
        grid[static_cast<size_t>(i)] = std::exp(lo + (hi - lo) * i / (count - 1));
    return grid;
}

// Largest penalty with a nonzero solution: max block norm of SY - SX.
double lambda_zero_threshold(const ScoreCovariance& sx, const ScoreCovariance& sy) {
    Eigen::MatrixXd diff = sy.S - sx.S;
    double mx = 0.0;
    for (int j = 0; j < sx.p; ++j)
        for (int l = 0; l < sx.p; ++l)
            mx = std::max(mx, diff.block(j * sx.M, l * sx.M, sx.M, sx.M).norm());
    return mx;
}

struct JfglRun {
    PrecisionEstimate theta_x;
    PrecisionEstimate theta_y;
};

JfglRun run_jfgl_method(const std::string& method, const AnalysisResult& analysis, int n_x,
                        int n_y, double lambda1, double lambda2, double rho, int max_iters,
                        double tol) {
    JfglProblem prob;
    prob.S_list = {analysis.sx.S, analysis.sy.S};
    // Group weights normalized to mean one: penalties then live on the
    // per-sample scale (lambda1 = 0.1 is a meaningful operating point), and
    // unequal sample sizes keep their relative likelihood weight.
    const double mean_n = 0.5 * (n_x + n_y);
    prob.n_list = {n_x / mean_n, n_y / mean_n};
    prob.lambda1 = lambda1;
    prob.lambda2 = lambda2;
    prob.rho = rho;
    prob.max_iters = max_iters;
    prob.tol = tol;
    if (method == "fgl") {
        // Scalar fused graphical lasso on the raw pM x pM matrices: the block
        // structure is erased by treating every entry as its own node.
        prob.p = analysis.sx.p * analysis.sx.M;
        prob.M = 1;
        prob.penalty = JfglPenalty::FFGL2;
    } else {
        prob.p = analysis.sx.p;
        prob.M = analysis.sx.M;
        if (method == "gfgl")
            prob.penalty = JfglPenalty::GFGL;
        else if (method == "ffgl")
            prob.penalty = JfglPenalty::FFGL;
        else if (method == "ffgl2")
            prob.penalty = JfglPenalty::FFGL2;
        else
            throw ConfigError("unknown jfgl method '" + method + "'");
    }
    auto estimates = solve_jfgl(prob);
    JfglRun run;
    run.theta_x = estimates[0];
    run.theta_y = estimates[1];
    // Report edges at the original node blocking regardless of how the
    // penalty treated blocks.
    run.theta_x.p = run.theta_y.p = analysis.sx.p;
    run.theta_x.M = run.theta_y.M = analysis.sx.M;
    return run;
}

const std::set<std::string> kSimulateKeys = {"model", "p", "m", "n", "T", "noise_sd",
                                             "seed",  "replicates", "out_dir"};

json resolved_simulate_config(const Cfg& cfg) {
    json r;
    r["model"] = cfg.gets("model", "M2");
    r["p"] = cfg.geti("p", 30);
    r["m"] = cfg.geti("m", 5);
    r["n"] = cfg.geti("n", 100);
    r["T"] = cfg.geti("T", 200);
    r["noise_sd"] = cfg.getd("noise_sd", 0.5);
    r["seed"] = cfg.getu("seed", 0);
    r["replicates"] = cfg.geti("replicates", 1);
    r["out_dir"] = cfg.require_string("out_dir");
    return r;
}

}  // namespace

json run_simulate(const json& config) {
    Cfg cfg(config, kSimulateKeys, "simulate");
    json r = resolved_simulate_config(cfg);
    const SimModel model = parse_model(r["model"]);
    const int p = r["p"], m = r["m"], n = r["n"], T = r["T"];
    const double sd = r["noise_sd"];
    const std::uint64_t seed = r["seed"];
    const int replicates = r["replicates"];
    const std::string out_dir = r["out_dir"];
    if (replicates < 1) throw ConfigError("simulate: replicates must be >= 1");

    json outputs = json::array();
    for (int rep = 1; rep <= replicates; ++rep) {
        PrecisionPair pair = generate_pair(model, p, m, seed, rep);
        RawDataset dx = generate_data(pair.omega_x, m, n, T, sd, seed, rep, 0);
        RawDataset dy = generate_data(pair.omega_y, m, n, T, sd, seed, rep, 1);

        std::string xf = (fs::path(out_dir) / ("x_r" + std::to_string(rep) + ".csv")).string();
        std::string yf = (fs::path(out_dir) / ("y_r" + std::to_string(rep) + ".csv")).string();
        io::write_raw_csv(dx, xf);
        io::write_raw_csv(dy, yf);
        outputs.push_back(xf);
        outputs.push_back(yf);

        // Model 2's graph is deterministic, so one truth file serves every
        // replicate; the seeded models get one per replicate.
        std::string tf = model == SimModel::M2
                             ? (fs::path(out_dir) / "truth.json").string()
                             : (fs::path(out_dir) / ("truth_r" + std::to_string(rep) + ".json")).string();
        if (model != SimModel::M2 || rep == 1) {
            io::write_edges_json(pair.true_edges, tf);
            outputs.push_back(tf);
        }
    }
    write_manifest(out_dir, "simulate", r, json{{"outputs", outputs}});

    json summary;
    summary["command"] = "simulate";
    summary["outputs"] = outputs;
    return summary;
}

namespace {

const std::set<std::string> kEstimateKeys = {
    "x_csv",   "y_csv",   "domain_lo", "domain_hi", "basis",      "L",
    "degree",  "M",       "center",    "method",    "lambda",     "target_edges",
    "target_fraction",    "epsilon",   "lambda1",   "lambda2",    "rho",
    "jfgl_eps", "num_times", "max_iters", "tol",     "out_dir"};

json resolved_estimate_config(const Cfg& cfg) {
    json r;
    r["x_csv"] = cfg.require_string("x_csv");
    r["y_csv"] = cfg.require_string("y_csv");
    r["domain_lo"] = cfg.getd("domain_lo", 0.0);
    r["domain_hi"] = cfg.getd("domain_hi", 1.0);
    r["basis"] = cfg.gets("basis", "bspline");
    r["L"] = cfg.geti("L", 15);
    r["degree"] = cfg.geti("degree", 3);
    r["M"] = cfg.geti("M", 5);
    r["center"] = cfg.getb("center", false);
    r["method"] = cfg.gets("method", "fudge");
    if (cfg.has("lambda")) r["lambda"] = cfg.getd("lambda", 0.0);
    if (cfg.has("target_edges")) r["target_edges"] = cfg.geti("target_edges", 0);
    if (cfg.has("target_fraction")) r["target_fraction"] = cfg.getd("target_fraction", 0.0);
    r["epsilon"] = cfg.getd("epsilon", 0.0);
    r["lambda1"] = cfg.getd("lambda1", 0.1);
    r["lambda2"] = cfg.getd("lambda2", 0.1);
    r["rho"] = cfg.getd("rho", 1.0);
    r["jfgl_eps"] = cfg.getd("jfgl_eps", 1e-6);
    r["num_times"] = cfg.geti("num_times", 15);
    r["max_iters"] = cfg.geti("max_iters", 2000);
    r["tol"] = cfg.getd("tol", 1e-8);
    r["out_dir"] = cfg.require_string("out_dir");
    return r;
}

}  // namespace

json run_estimate(const json& config) {
    Cfg cfg(config, kEstimateKeys, "estimate");
    json r = resolved_estimate_config(cfg);
    const std::string method = r["method"];
    const std::string out_dir = r["out_dir"];
    const Domain domain{r["domain_lo"], r["domain_hi"]};
    if (!(domain.hi > domain.lo)) throw ConfigError("estimate: domain_hi must exceed domain_lo");

    // Configuration errors must surface before any data is touched.
    static const std::set<std::string> kMethods = {"fudge", "gfgl",    "ffgl",
                                                   "ffgl2", "fgl", "multiple"};
    if (!kMethods.count(method)) throw ConfigError("estimate: unknown method '" + method + "'");
    parse_basis(r["basis"]);
    if (method == "multiple" && !r.contains("lambda"))
        throw ConfigError("estimate: method multiple requires lambda");
    if (method == "fudge" && !r.contains("lambda") && !r.contains("target_edges") &&
        !r.contains("target_fraction"))
        throw ConfigError("estimate: method fudge requires lambda or an edge target");
    if (r.contains("target_edges") && r.contains("target_fraction"))
        throw ConfigError("estimate: give target_edges or target_fraction, not both");
    if (method != "fudge" && (r.contains("target_edges") || r.contains("target_fraction")))
        throw ConfigError("estimate: edge targets are supported for method fudge only");

    RawDataset raw_x = io::read_raw_csv(r["x_csv"], domain);
    RawDataset raw_y = io::read_raw_csv(r["y_csv"], domain);
    if (raw_x.p != raw_y.p) throw DataError("populations have different node counts");

    FudgeConfig solver;
    solver.max_iters = r["max_iters"];
    solver.tol = r["tol"];
    solver.epsilon = r["epsilon"];

    json convergence;
    EdgeSet edges;
    Eigen::MatrixXd block_norms;
    bool have_norms = true;

    if (method == "multiple") {
        auto sets = multiple_baseline(raw_x, raw_y, r["num_times"], {r["lambda"].get<double>()},
                                      solver);
        edges = sets.front();
        have_norms = false;
        convergence["method"] = "multiple";
    } else {
        AnalysisConfig acfg;
        acfg.kind = parse_basis(r["basis"]);
        acfg.L = r["L"];
        acfg.degree = r["degree"];
        acfg.M = r["M"];
        acfg.center = r["center"];
        AnalysisResult analysis = analyze_scores(raw_x, raw_y, acfg);

        if (method == "fudge") {
            double lambda = 0.0;
            if (r.contains("target_edges") || r.contains("target_fraction")) {
                int p = analysis.sx.p;
                int target = r.contains("target_edges")
                                 ? r["target_edges"].get<int>()
                                 : static_cast<int>(std::llround(
                                       r["target_fraction"].get<double>() * p * (p - 1) / 2.0));
                if (target < 0) throw ConfigError("estimate: edge target must be nonnegative");

                // Bisect on log lambda until the edge count is within one of
                // the target. Counts need not be strictly monotone, so the
                // closest visited penalty is kept as a fallback.
                double hi = lambda_zero_threshold(analysis.sx, analysis.sy);
                if (!(hi > 0.0)) hi = 1.0;
                double lo = hi * 1e-6;
                auto count_at = [&](double lam) {
                    FudgeConfig c = solver;
                    c.lambda = lam;
                    return threshold_edges(solve_fudge(analysis.sx, analysis.sy, c),
                                           solver.epsilon)
                        .size();
                };
                lambda = hi;
                int best_gap = std::abs(count_at(hi) - target);
                if (target == 0) {
                    convergence["achieved_edges"] = 0;
                } else {
                    double llo = std::log(lo), lhi = std::log(hi);
                    for (int it = 0; it < 60 && best_gap > 1; ++it) {
                        double mid = std::exp(0.5 * (llo + lhi));
                        int c = count_at(mid);
                        if (std::abs(c - target) < best_gap) {
                            best_gap = std::abs(c - target);
                            lambda = mid;
                        }
                        if (c > target)
                            llo = std::log(mid);  // too many edges: raise penalty
                        else
                            lhi = std::log(mid);
                    }
                    convergence["achieved_edges"] = count_at(lambda);
                    convergence["target_within_one"] = best_gap <= 1;
                }
            } else {
                lambda = r["lambda"].get<double>();
            }

            FudgeConfig c = solver;
            c.lambda = lambda;
            DiffEstimate est = solve_fudge(analysis.sx, analysis.sy, c);
            edges = threshold_edges(est, solver.epsilon);
            block_norms = est.block_norms();
            convergence["lambda"] = lambda;
            convergence["converged"] = est.converged;
            convergence["iterations"] = est.iterations;
            convergence["objective"] = est.objective;
            convergence["kkt_residual"] = kkt_residual(est, analysis.sx, analysis.sy, lambda);
        } else {
            JfglRun run = run_jfgl_method(method, analysis, raw_x.n, raw_y.n, r["lambda1"],
                                          r["lambda2"], r["rho"], r["max_iters"], r["tol"]);
            edges = jfgl_diff_edges(run.theta_x, run.theta_y, r["jfgl_eps"]);
            Eigen::MatrixXd diff = run.theta_x.theta - run.theta_y.theta;
            block_norms = Eigen::MatrixXd::Zero(raw_x.p, raw_x.p);
            int M = analysis.sx.M;
            for (int j = 0; j < raw_x.p; ++j)
                for (int l = 0; l < raw_x.p; ++l)
                    block_norms(j, l) = diff.block(j * M, l * M, M, M).norm();
            convergence["converged"] = run.theta_x.converged;
            convergence["iterations"] = run.theta_x.iterations;
        }
    }

    std::string ef = (fs::path(out_dir) / "edges.json").string();
    io::write_edges_json(edges, ef);
    json outputs = json::array({ef});
    if (have_norms) {
        std::string bf = (fs::path(out_dir) / "block_norms.csv").string();
        io::write_block_norms_csv(block_norms, bf);
        outputs.push_back(bf);
    }
    write_manifest(out_dir, "estimate", r,
                   json{{"outputs", outputs}, {"convergence", convergence}});

    json summary;
    summary["command"] = "estimate";
    summary["edges"] = edges.size();
    summary["outputs"] = outputs;
    summary["convergence"] = convergence;
    return summary;
}

namespace {

const std::set<std::string> kRocKeys = {
    "model", "p",     "m",       "n",          "T",        "noise_sd", "seed",
    "replicates",     "methods", "lambda_grid", "lambda1", "jfgl_eps", "basis",
    "L",     "degree", "M",      "center",     "num_times", "max_iters", "tol",
    "out_dir"};

}  // namespace

json run_roc(const json& config) {
    Cfg cfg(config, kRocKeys, "roc");
    json r;
    r["model"] = cfg.gets("model", "M2");
    r["p"] = cfg.geti("p", 10);
    r["m"] = cfg.geti("m", 5);
    r["n"] = cfg.geti("n", 100);
    r["T"] = cfg.geti("T", 200);
    r["noise_sd"] = cfg.getd("noise_sd", 0.5);
    r["seed"] = cfg.getu("seed", 0);
    r["replicates"] = cfg.geti("replicates", 5);
    r["lambda1"] = cfg.getd("lambda1", 0.1);
    r["jfgl_eps"] = cfg.getd("jfgl_eps", 1e-6);
    r["basis"] = cfg.gets("basis", "bspline");
    r["L"] = cfg.geti("L", 15);
    r["degree"] = cfg.geti("degree", 3);
    r["M"] = cfg.geti("M", 5);
    r["center"] = cfg.getb("center", false);
    r["num_times"] = cfg.geti("num_times", 15);
    r["max_iters"] = cfg.geti("max_iters", 2000);
    r["tol"] = cfg.getd("tol", 1e-8);
    r["out_dir"] = cfg.require_string("out_dir");
    std::vector<std::string> methods = {"fudge", "multiple"};
    if (cfg.has("methods")) {
        methods.clear();
        for (const auto& v : cfg.at("methods")) methods.push_back(v.get<std::string>());
        if (methods.empty()) throw ConfigError("roc: methods must be nonempty");
    }
    static const std::set<std::string> kRocMethods = {"fudge", "multiple", "gfgl",
                                                      "ffgl",  "ffgl2",    "fgl"};
    for (const std::string& m : methods)
        if (!kRocMethods.count(m)) throw ConfigError("roc: unknown method '" + m + "'");
    parse_basis(r["basis"]);
    r["methods"] = methods;

    const SimModel model = parse_model(r["model"]);
    const int p = r["p"], m = r["m"], n = r["n"], T = r["T"];
    const double sd = r["noise_sd"];
    const std::uint64_t seed = r["seed"];
    const int replicates = r["replicates"];
    const std::string out_dir = r["out_dir"];
    if (replicates < 1) throw ConfigError("roc: replicates must be >= 1");

    AnalysisConfig acfg;
    acfg.kind = parse_basis(r["basis"]);
    acfg.L = r["L"];
    acfg.degree = r["degree"];
    acfg.M = r["M"];
    acfg.center = r["center"];

    FudgeConfig solver;
    solver.max_iters = r["max_iters"];
    solver.tol = r["tol"];

    std::vector<double> grid;  // fixed after the first replicate
    std::map<std::string, std::vector<io::RocRow>> rows;
    std::string auc_csv = "method,p,replicate,auc\n";

    for (int rep = 1; rep <= replicates; ++rep) {
        PrecisionPair pair = generate_pair(model, p, m, seed, rep);
        RawDataset dx = generate_data(pair.omega_x, m, n, T, sd, seed, rep, 0);
        RawDataset dy = generate_data(pair.omega_y, m, n, T, sd, seed, rep, 1);
        EdgeSet truth = pair.true_edges;

        AnalysisResult analysis = analyze_scores(dx, dy, acfg);
        if (grid.empty())
            grid = resolve_lambda_grid(cfg, "lambda_grid",
                                       lambda_zero_threshold(analysis.sx, analysis.sy));

        for (const std::string& method : methods) {
            RocCurve curve;
            if (method == "fudge") {
                curve = roc_from_lambda_sweep(
                    [&](double lam) {
                        FudgeConfig c = solver;
                        c.lambda = lam;
                        return threshold_edges(solve_fudge(analysis.sx, analysis.sy, c), 0.0);
                    },
                    grid, truth, p);
            } else if (method == "multiple") {
                auto sets = multiple_baseline(dx, dy, r["num_times"], grid, solver);
                size_t at = 0;
                curve = roc_from_lambda_sweep([&](double) { return sets[at++]; }, grid, truth, p);
            } else {
                curve = roc_from_lambda_sweep(
                    [&](double lam2) {
                        JfglRun run = run_jfgl_method(method, analysis, dx.n, dy.n, r["lambda1"],
                                                      lam2, 1.0, r["max_iters"], r["tol"]);
                        return jfgl_diff_edges(run.theta_x, run.theta_y, r["jfgl_eps"]);
                    },
                    grid, truth, p);
            }
            for (const RocPoint& pt : curve.points)
                rows[method].push_back({method, p, rep, pt.param, pt.fpr, pt.tpr});
            auc_csv += method + "," + std::to_string(p) + "," + std::to_string(rep) + "," +
                       io::format_double(auc(curve)) + "\n";
        }
    }

    json outputs = json::array();
    for (const std::string& method : methods) {
        std::string f = (fs::path(out_dir) / ("roc_" + method + ".csv")).string();
        io::write_roc_csv(rows[method], f);
        outputs.push_back(f);

        // Pointwise average over the common grid.
        std::vector<io::RocRow> avg;
        const size_t count = grid.size();
        for (size_t g = 0; g < count; ++g) {
            io::RocRow row{method, p, 0, grid[g], 0.0, 0.0};
            for (int rep = 0; rep < replicates; ++rep) {
                const io::RocRow& src = rows[method][static_cast<size_t>(rep) * count + g];
                row.fpr += src.fpr;
                row.tpr += src.tpr;
            }
            row.fpr /= replicates;
            row.tpr /= replicates;
            avg.push_back(row);
        }
        std::string fa = (fs::path(out_dir) / ("roc_" + method + "_avg.csv")).string();
        io::write_roc_csv(avg, fa);
        outputs.push_back(fa);
    }
    {
        std::string f = (fs::path(out_dir) / "auc.csv").string();
        io::write_text_file(f, auc_csv);
        outputs.push_back(f);
    }

    json grid_json = json::array();
    for (double g : grid) grid_json.push_back(g);
    r["lambda_grid"] = grid_json;
    write_manifest(out_dir, "roc", r, json{{"outputs", outputs}});

    json summary;
    summary["command"] = "roc";
    summary["outputs"] = outputs;
    return summary;
}

namespace {

const std::set<std::string> kTuneKeys = {"x_csv",  "y_csv", "domain_lo", "domain_hi", "basis",
                                         "degree", "center", "folds",    "seed",      "mode",
                                         "L_grid", "M_grid", "lambda_grid", "L",      "M",
                                         "max_iters", "tol", "out_dir"};

}  // namespace

json run_tune(const json& config) {
    Cfg cfg(config, kTuneKeys, "tune");
    json r;
    r["x_csv"] = cfg.require_string("x_csv");
    r["y_csv"] = cfg.require_string("y_csv");
    r["domain_lo"] = cfg.getd("domain_lo", 0.0);
    r["domain_hi"] = cfg.getd("domain_hi", 1.0);
    r["basis"] = cfg.gets("basis", "bspline");
    r["degree"] = cfg.geti("degree", 3);
    r["center"] = cfg.getb("center", false);
    r["folds"] = cfg.geti("folds", 5);
    r["seed"] = cfg.getu("seed", 0);
    r["mode"] = cfg.gets("mode", "both");
    r["max_iters"] = cfg.geti("max_iters", 2000);
    r["tol"] = cfg.getd("tol", 1e-8);
    r["out_dir"] = cfg.require_string("out_dir");

    const std::string mode = r["mode"];
    if (mode != "dims" && mode != "lambda" && mode != "both")
        throw ConfigError("tune: mode must be dims, lambda or both");
    const Domain domain{r["domain_lo"], r["domain_hi"]};
    RawDataset raw_x = io::read_raw_csv(r["x_csv"], domain);
    RawDataset raw_y = io::read_raw_csv(r["y_csv"], domain);

    json result;
    int chosen_L = cfg.geti("L", 0);
    int chosen_M = cfg.geti("M", 0);

    if (mode == "dims" || mode == "both") {
        std::vector<int> lg = cfg.int_list("L_grid");
        std::vector<int> mg = cfg.int_list("M_grid");
        r["L_grid"] = lg;
        r["M_grid"] = mg;
        DimsTuneResult dims = cv_select_dims(raw_x, raw_y, lg, mg, r["folds"], r["seed"],
                                             parse_basis(r["basis"]), r["degree"], r["center"]);
        chosen_L = dims.L;
        chosen_M = dims.M;
        result["L"] = dims.L;
        result["M"] = dims.M;
        json cands = json::array();
        for (const auto& c : dims.candidates)
            cands.push_back({{"L", c.L}, {"M", c.M}, {"score", c.score}});
        result["dims_candidates"] = cands;
    }

    if (mode == "lambda" || mode == "both") {
        if (chosen_L < 1 || chosen_M < 1)
            throw ConfigError("tune: lambda mode requires L and M (or mode both)");
        r["L"] = chosen_L;
        r["M"] = chosen_M;
        std::vector<double> grid = cfg.number_list("lambda_grid");
        json grid_json = json::array();
        for (double g : grid) grid_json.push_back(g);
        r["lambda_grid"] = grid_json;

        AnalysisConfig acfg;
        acfg.kind = parse_basis(r["basis"]);
        acfg.L = chosen_L;
        acfg.degree = r["degree"];
        acfg.M = chosen_M;
        acfg.center = r["center"];
        AnalysisResult analysis = analyze_scores(raw_x, raw_y, acfg);

        FudgeConfig solver;
        solver.max_iters = r["max_iters"];
        solver.tol = r["tol"];
        LambdaTuneResult lam = scv_select_lambda(analysis.scores_x, analysis.scores_y, grid,
                                                 r["folds"], r["seed"], solver, r["center"]);
        result["lambda"] = lam.lambda;
        result["lambda_cv_scores"] = lam.cv_scores;
    }

    const std::string out_dir = r["out_dir"];
    std::string tf = (fs::path(out_dir) / "tune.json").string();
    io::write_text_file(tf, result.dump(2) + "\n");
    write_manifest(out_dir, "tune", r, json{{"outputs", json::array({tf})}});

    json summary;
    summary["command"] = "tune";
    summary["result"] = result;
    summary["outputs"] = json::array({tf});
    return summary;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return 2;
    if (dynamic_cast<const DataError*>(&e)) return 3;
    if (dynamic_cast<const Error*>(&e)) return 4;  // numerical / library failures
    return 1;
}

}  // namespace fdg::cli
