#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "edgecov/core.hpp"
#include "edgecov/covariance.hpp"
#include "edgecov/evaluation.hpp"
#include "edgecov/io.hpp"
#include "edgecov/likelihood.hpp"
#include "edgecov/modelselect.hpp"
#include "edgecov/pipeline.hpp"
#include "edgecov/sampler.hpp"
#include "edgecov/simgen.hpp"

namespace fs = std::filesystem;

using edgecov::covariance::EntryMap;
using edgecov::covariance::Matrix;
using edgecov::covariance::Partition;
using edgecov::covariance::RhoParams;
using nlohmann::json;

namespace {

class WallTimer {
  public:
    WallTimer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

std::string resolve_out_dir(const std::string& flag, const std::string& fallback = "") {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("EDGECOV_OUT_DIR"); env != nullptr && *env != '\0')
        return env;
    if (!fallback.empty()) return fallback;
    throw std::runtime_error("no output directory given (pass --out or set EDGECOV_OUT_DIR)");
}

std::string ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
    return dir;
}

std::string join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

void write_manifest(const std::string& dir, const std::string& command, const json& config,
                    const json& inputs, const std::vector<std::string>& outputs, double wall_s) {
    const json m{{"command", command},
                 {"tool", "edgecov"},
                 {"version", edgecov::io::version()},
                 {"config", config},
                 {"inputs", inputs},
                 {"outputs", outputs},
                 {"wall_time_s", wall_s}};
    edgecov::io::save_json(join(dir, "manifest.json"), m);
}

std::string fmt17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// --- generate --------------------------------------------------------------

struct GenerateArgs {
    int nodes = 0;
    std::vector<int> groups;
    std::vector<double> rho;
    double rho0 = 1.5;
    double lambda = 0.01;
    int subjects = 632;
    std::uint64_t seed = 1;
    std::uint64_t shuffle_seed = 0;
    std::string arrangement = "contiguous";
    std::string map = "exponential";
    std::string out;
};

int run_generate(const GenerateArgs& a) {
    const WallTimer timer;
    const auto arrangement = edgecov::simgen::arrangement_from_string(a.arrangement);
    const auto map = edgecov::covariance::entry_map_from_string(a.map);
    const auto gt = edgecov::simgen::make_ground_truth(a.groups, a.rho, a.rho0, a.lambda,
                                                       arrangement, map, a.shuffle_seed);
    if (a.nodes > 0 && a.nodes != gt.v)
        throw std::runtime_error("--nodes is " + std::to_string(a.nodes) +
                                 " but the group sizes sum to " + std::to_string(gt.v));
    const auto data = edgecov::simgen::generate(gt, a.subjects, a.seed);

    const std::string out = ensure_dir(resolve_out_dir(a.out));
    edgecov::io::write_matrix_csv(join(out, "R.csv"), data.r, "e");
    edgecov::io::write_matrix_csv(join(out, "H.csv"), data.h, "e");
    edgecov::io::save_json(join(out, "truth.json"), edgecov::io::ground_truth_json(gt));

    const json config{{"nodes", gt.v},
                      {"groups", a.groups},
                      {"rho", a.rho},
                      {"rho0", a.rho0},
                      {"lambda", a.lambda},
                      {"subjects", a.subjects},
                      {"seed", a.seed},
                      {"shuffle_seed", a.shuffle_seed},
                      {"arrangement", a.arrangement},
                      {"map", a.map},
                      {"out", out}};
    write_manifest(out, "generate", config, json::object(),
                   {"R.csv", "H.csv", "truth.json"}, timer.seconds());
    std::printf("generate: v=%d e=%d subjects=%d arrangement=%s -> %s\n", gt.v, data.e(),
                data.s(), a.arrangement.c_str(), out.c_str());
    return 0;
}

// --- shared input loading for infer / scan-k -------------------------------

struct LoadedInput {
    edgecov::likelihood::EdgeData data;
    std::optional<Matrix> node_corr; // present when features were ingested
    json info;
};

LoadedInput load_input(const std::string& input_r, const std::string& input_features) {
    if (input_r.empty() == input_features.empty())
        throw std::runtime_error("pass exactly one of --input-r and --input-features");
    if (!input_r.empty()) {
        Matrix r = edgecov::io::read_matrix_csv(input_r);
        const int e = static_cast<int>(r.cols());
        const int v = edgecov::core::nodes_from_edges(e);
        if (v < 0)
            throw std::runtime_error("edge matrix has " + std::to_string(e) +
                                     " columns, which is not v*(v-1)/2 for any node count");
        const json info{{"input_r", input_r},
                        {"subjects", static_cast<int>(r.rows())},
                        {"edges", e},
                        {"nodes", v}};
        return {edgecov::likelihood::EdgeData::from_r(std::move(r)), std::nullopt, info};
    }
    const auto ft = edgecov::io::read_feature_table(input_features);
    const Matrix x = edgecov::pipeline::standardize(ft.x);
    auto data = edgecov::pipeline::edge_features(x);
    Matrix corr = edgecov::pipeline::node_moments(x);
    if (ft.rejected_rows > 0)
        std::printf("note: rejected %d malformed rows from %s\n", ft.rejected_rows,
                    input_features.c_str());
    const json info{{"input_features", input_features},
                    {"subjects", static_cast<int>(x.rows())},
                    {"nodes", static_cast<int>(x.cols())},
                    {"edges", data.e()},
                    {"rejected_rows", ft.rejected_rows}};
    return {std::move(data), std::move(corr), info};
}

// --- infer ------------------------------------------------------------------

struct InferArgs {
    std::string input_r;
    std::string input_features;
    int k = 0;
    int iters = 2500;
    int burn_in = 500;
    double lambda = 0.01;
    std::string map = "exponential";
    double prior_mean = 0.25;
    double prior_sd = 1.0;
    double step_sd = 0.01;
    double rho_init_min = 0.0;
    double rho_init_max = 0.5;
    double fix_rho0 = 0.0;
    bool fix_rho0_set = false;
    std::uint64_t seed = 1;
    std::uint64_t stream = 0;
    std::string init = "auto";
    int kmeans_restarts = 50;
    bool debug_checks = false;
    std::string out;
};

edgecov::sampler::MHConfig make_mh_config(const InferArgs& a) {
    edgecov::sampler::MHConfig cfg;
    cfg.k = a.k;
    cfg.iters = a.iters;
    cfg.burn_in = a.burn_in;
    cfg.lambda = a.lambda;
    cfg.map = edgecov::covariance::entry_map_from_string(a.map);
    cfg.prior_mean = a.prior_mean;
    cfg.prior_sd = a.prior_sd;
    cfg.step_sd = a.step_sd;
    cfg.rho_init_min = a.rho_init_min;
    cfg.rho_init_max = a.rho_init_max;
    if (a.fix_rho0_set) cfg.fixed_rho0 = a.fix_rho0;
    cfg.seed = a.seed;
    cfg.stream = a.stream;
    cfg.record_pointwise = true;
    cfg.debug_checks = a.debug_checks;
    return cfg;
}

json infer_config_json(const InferArgs& a) {
    return json{{"input_r", a.input_r},
                {"input_features", a.input_features},
                {"k", a.k},
                {"iters", a.iters},
                {"burn_in", a.burn_in},
                {"lambda", a.lambda},
                {"map", a.map},
                {"prior_mean", a.prior_mean},
                {"prior_sd", a.prior_sd},
                {"step_sd", a.step_sd},
                {"rho_init_min", a.rho_init_min},
                {"rho_init_max", a.rho_init_max},
                {"fix_rho0", a.fix_rho0_set ? json(a.fix_rho0) : json(nullptr)},
                {"seed", a.seed},
                {"stream", a.stream},
                {"init", a.init},
                {"kmeans_restarts", a.kmeans_restarts},
                {"debug_checks", a.debug_checks}};
}

json waic_json(const edgecov::modelselect::WaicResult& w) {
    return json{{"waic", w.waic},
                {"lppd", w.lppd},
                {"penalty", w.penalty},
                {"log_neg_defined", w.log_neg_defined},
                {"log_neg_waic", w.log_neg_waic}};
}

json convergence_json(const edgecov::modelselect::ConvergenceReport& c) {
    return json{{"converged", c.converged},
                {"split_z", c.split_z},
                {"zero_acceptance_block", c.zero_acceptance_block},
                {"waic_usable", c.waic_usable},
                {"reason", c.reason}};
}

json summary_json(const edgecov::sampler::PosteriorSummary& s, int v, int e, int subjects,
                  int k, double lambda, const std::string& map) {
    return json{{"v", v},
                {"e", e},
                {"subjects", subjects},
                {"k", k},
                {"k_hat", s.k_hat},
                {"lambda", lambda},
                {"map", map},
                {"map_iteration", s.map_iteration},
                {"map_loglik", s.map_loglik},
                {"map_partition", edgecov::io::partition_json(s.map_partition)},
                {"map_rho", edgecov::io::rho_json(s.map_rho)},
                {"rho_hat", edgecov::io::rho_json(s.rho_hat)},
                {"vanished", s.vanished},
                {"label_accept_rate", s.label_accept_rate},
                {"rho_accept_rate", s.rho_accept_rate},
                {"rho_attempts", s.rho_attempts}};
}

void write_trace_csvs(const std::string& out, const edgecov::sampler::ChainTrace& trace) {
    std::string ll = "iter,loglik\n";
    for (int t = 0; t < trace.iters; ++t)
        ll += std::to_string(t) + "," + fmt17(trace.loglik[t]) + "\n";
    edgecov::io::write_text_atomic(join(out, "trace_loglik.csv"), ll);

    std::string rr = "iter";
    for (int c = 0; c <= trace.k; ++c) rr += ",rho" + std::to_string(c);
    rr += "\n";
    for (int t = 0; t < trace.iters; ++t) {
        rr += std::to_string(t);
        for (int c = 0; c <= trace.k; ++c) rr += "," + fmt17(trace.rho[t][c]);
        rr += "\n";
    }
    edgecov::io::write_text_atomic(join(out, "trace_rho.csv"), rr);
}

int run_infer(const InferArgs& a) {
    const WallTimer timer;
    auto in = load_input(a.input_r, a.input_features);
    auto cfg = make_mh_config(a);

    const bool want_kmeans = a.init == "kmeans" || (a.init == "auto" && in.node_corr.has_value());
    json init_info{{"mode", want_kmeans ? "kmeans" : "random"}};
    if (want_kmeans) {
        if (!in.node_corr)
            throw std::runtime_error("--init kmeans needs --input-features (no node table to cluster)");
        const auto guess = edgecov::pipeline::kmeans_init(*in.node_corr, a.k, a.kmeans_restarts,
                                                          a.seed, cfg.map);
        cfg.init_partition = guess.partition;
        cfg.init_rho = guess.rho;
        init_info["labels"] = guess.partition.labels;
        init_info["rho"] = guess.rho.values;
        init_info["objective"] = guess.objective;
    }

    const auto result = edgecov::sampler::run_chain(in.data, cfg);
    const auto w = edgecov::modelselect::waic(result.trace.pointwise);
    const auto conv = edgecov::modelselect::assess_convergence(result.trace, &w);

    const std::string out = ensure_dir(resolve_out_dir(a.out));
    const auto& s = result.summary;
    json res = summary_json(s, result.trace.v, in.data.e(), in.data.s(), a.k, a.lambda, a.map);
    res["waic"] = waic_json(w);
    res["convergence"] = convergence_json(conv);
    res["init"] = init_info;
    res["config"] = infer_config_json(a);
    edgecov::io::save_json(join(out, "result.json"), res);

    const json est{{"v", result.trace.v},
                   {"k", a.k},
                   {"k_hat", s.k_hat},
                   {"partition", edgecov::io::partition_json(s.map_partition)},
                   {"rho", edgecov::io::rho_json(s.rho_hat)},
                   {"lambda", a.lambda},
                   {"map", a.map}};
    edgecov::io::save_json(join(out, "estimate.json"), est);
    write_trace_csvs(out, result.trace);

    write_manifest(out, "infer", infer_config_json(a), in.info,
                   {"result.json", "estimate.json", "trace_loglik.csv", "trace_rho.csv"},
                   timer.seconds());
    std::printf("infer: k=%d k_hat=%d map_loglik=%.6f waic=%.6f converged=%s -> %s\n", a.k,
                s.k_hat, s.map_loglik, w.waic, conv.converged ? "yes" : "no", out.c_str());
    if (!conv.converged) std::printf("infer: not converged: %s\n", conv.reason.c_str());
    return 0;
}

// --- scan-k -----------------------------------------------------------------

struct ScanArgs {
    InferArgs base; // k ignored; init is always random for the scan
    int k_min = 0;
    int k_max = 0;
    int threads = 1;
};

int run_scan(const ScanArgs& a) {
    const WallTimer timer;
    if (a.k_min < 1 || a.k_max < a.k_min)
        throw std::runtime_error("need 1 <= --k-min <= --k-max");
    auto in = load_input(a.base.input_r, a.base.input_features);
    auto cfg = make_mh_config(a.base);
    cfg.k = a.k_min;

    std::vector<int> ks;
    for (int k = a.k_min; k <= a.k_max; ++k) ks.push_back(k);
    const auto scan = edgecov::modelselect::k_scan(in.data, cfg, ks, a.threads);

    json rows = json::array();
    for (const auto& row : scan.rows) {
        json r{{"k", row.k},
               {"runnable", row.runnable},
               {"feasible_strict", row.feasible_strict},
               {"converged", row.converged},
               {"k_hat", row.k_hat},
               {"note", row.note}};
        if (row.runnable) {
            r["waic"] = waic_json(row.waic);
            r["convergence"] = convergence_json(row.convergence);
            r["rho_hat"] = edgecov::io::rho_json(row.summary.rho_hat);
            r["map_partition"] = edgecov::io::partition_json(row.summary.map_partition);
        }
        rows.push_back(std::move(r));
        if (row.runnable)
            std::printf("scan-k: k=%d k_hat=%d converged=%s waic=%.6f%s%s\n", row.k, row.k_hat,
                        row.converged ? "yes" : "no", row.waic.waic,
                        row.converged ? "" : " reason=", row.converged ? "" : row.convergence.reason.c_str());
        else
            std::printf("scan-k: k=%d skipped (%s)\n", row.k, row.note.c_str());
    }

    const std::string out = ensure_dir(resolve_out_dir(a.base.out));
    json config = infer_config_json(a.base);
    config.erase("k");
    config.erase("init");
    config.erase("kmeans_restarts");
    config["k_min"] = a.k_min;
    config["k_max"] = a.k_max;
    config["threads"] = a.threads;
    json res{{"rows", rows}};
    if (scan.recommended_k)
        res["recommended_k"] = *scan.recommended_k;
    else
        res["recommended_k"] = nullptr;
    edgecov::io::save_json(join(out, "scan.json"), res);

    std::string table = "K,WAIC,log_neg_waic,K_hat,converged\n";
    for (const auto& row : scan.rows) {
        table += std::to_string(row.k) + ",";
        if (row.runnable) {
            table += fmt17(row.waic.waic) + ",";
            table += (row.waic.log_neg_defined ? fmt17(row.waic.log_neg_waic) : "") + ",";
            table += std::to_string(row.k_hat) + ",";
        } else {
            table += ",,,";
        }
        table += (row.runnable && row.converged ? "1" : "0");
        table += "\n";
    }
    edgecov::io::write_text_atomic(join(out, "scan.csv"), table);
    write_manifest(out, "scan-k", config, in.info, {"scan.json", "scan.csv"}, timer.seconds());
    if (scan.recommended_k)
        std::printf("scan-k: recommended k=%d -> %s\n", *scan.recommended_k, out.c_str());
    else
        std::printf("scan-k: no converged candidate -> %s\n", out.c_str());
    return 0;
}

// --- evaluate ----------------------------------------------------------------

struct Structure {
    Partition partition;
    RhoParams rho;
    EntryMap map = EntryMap::exponential;
};

// Accepts both truth.json and estimate.json: each carries partition, rho, map.
Structure load_structure(const std::string& path) {
    const json j = edgecov::io::load_json(path);
    try {
        return {edgecov::io::partition_from_json(j.at("partition")),
                edgecov::io::rho_from_json(j.at("rho")),
                edgecov::covariance::entry_map_from_string(j.at("map").get<std::string>())};
    } catch (const json::exception& e) {
        throw std::runtime_error(path + ": missing or malformed field: " + e.what());
    }
}

struct EvaluateArgs {
    std::string truth;
    std::string estimate;
    double tol = 1e-6;
    std::string out;
};

int run_evaluate(const EvaluateArgs& a) {
    const WallTimer timer;
    const auto truth = load_structure(a.truth);
    const auto est = load_structure(a.estimate);
    if (truth.partition.labels.size() != est.partition.labels.size())
        throw std::runtime_error("truth and estimate disagree on the node count (" +
                                 std::to_string(truth.partition.labels.size()) + " vs " +
                                 std::to_string(est.partition.labels.size()) + ")");
    const auto m = edgecov::evaluation::compute_metrics(truth.partition, truth.rho, truth.map,
                                                        est.partition, est.rho, est.map, a.tol);
    const json mj{{"normalized_l1", m.normalized_l1},
                  {"frobenius", m.frobenius},
                  {"misclassification", m.misclassification},
                  {"sensitivity", m.sensitivity},
                  {"specificity", m.specificity},
                  {"rho_aligned", m.rho_aligned}};
    std::printf("%s\n", mj.dump().c_str());

    const std::string out = ensure_dir(resolve_out_dir(a.out));
    edgecov::io::save_json(join(out, "metrics.json"), mj);
    const json config{{"truth", a.truth}, {"estimate", a.estimate}, {"tol", a.tol}};
    write_manifest(out, "evaluate", config, json{{"truth", a.truth}, {"estimate", a.estimate}},
                   {"metrics.json"}, timer.seconds());
    return 0;
}

// --- report -------------------------------------------------------------------

struct ReportArgs {
    std::string result;
    std::string truth;
    std::string out;
};

int run_report(const ReportArgs& a) {
    const WallTimer timer;
    const auto est = load_structure(join(a.result, "estimate.json"));
    const int v = static_cast<int>(est.partition.labels.size());
    const Matrix lambda_hat =
        edgecov::covariance::build_dense(est.partition, est.rho, 0.0, v, est.map);

    const std::string out = ensure_dir(resolve_out_dir(a.out, join(a.result, "report")));
    std::vector<std::string> outputs;
    edgecov::io::write_matrix_csv(join(out, "lambda_hat.csv"), lambda_hat, "e");
    edgecov::io::write_heatmap_ppm(join(out, "lambda_hat.ppm"), lambda_hat);
    outputs.insert(outputs.end(), {"lambda_hat.csv", "lambda_hat.ppm"});

    if (!a.truth.empty()) {
        const auto truth = load_structure(a.truth);
        if (static_cast<int>(truth.partition.labels.size()) != v)
            throw std::runtime_error("truth node count disagrees with the estimate");
        const Matrix lambda_true =
            edgecov::covariance::build_dense(truth.partition, truth.rho, 0.0, v, truth.map);
        const Matrix diff = lambda_true - lambda_hat;
        edgecov::io::write_matrix_csv(join(out, "lambda_true.csv"), lambda_true, "e");
        edgecov::io::write_heatmap_ppm(join(out, "lambda_true.ppm"), lambda_true);
        edgecov::io::write_matrix_csv(join(out, "lambda_diff.csv"), diff, "e");
        edgecov::io::write_diff_heatmap_ppm(join(out, "lambda_diff.ppm"), diff);
        outputs.insert(outputs.end(), {"lambda_true.csv", "lambda_true.ppm", "lambda_diff.csv",
                                       "lambda_diff.ppm"});
    }

    const Matrix trace = edgecov::io::read_matrix_csv(join(a.result, "trace_loglik.csv"));
    if (trace.cols() != 2)
        throw std::runtime_error("trace_loglik.csv should have iter and loglik columns");
    std::vector<double> series(trace.rows());
    for (int t = 0; t < trace.rows(); ++t) series[t] = trace(t, 1);
    edgecov::io::write_trace_ppm(join(out, "trace_loglik.ppm"), series);
    outputs.push_back("trace_loglik.ppm");

    const json config{{"result", a.result}, {"truth", a.truth}, {"out", out}};
    write_manifest(out, "report", config, json{{"result", a.result}, {"truth", a.truth}},
                   outputs, timer.seconds());
    std::printf("report: %zu files -> %s\n", outputs.size() + 1, out.c_str());
    return 0;
}

void add_infer_options(CLI::App* cmd, InferArgs& a, bool with_k) {
    cmd->add_option("--input-r", a.input_r, "CSV of subject rows over edge features (S x E)");
    cmd->add_option("--input-features", a.input_features,
                    "CSV of raw subject measurements (S x V); standardized, then expanded to edge products");
    if (with_k)
        cmd->add_option("--k", a.k, "number of class slots")->required()->check(CLI::PositiveNumber);
    cmd->add_option("--iters", a.iters, "MH iterations")->check(CLI::PositiveNumber);
    cmd->add_option("--burn-in", a.burn_in, "iterations discarded before summaries")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--lambda", a.lambda, "ridge added to the structured covariance")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--map", a.map, "entry map for rho (exponential: value = exp(-rho))")
        ->check(CLI::IsMember({"exponential", "identity"}));
    cmd->add_option("--prior-mean", a.prior_mean, "Gaussian prior mean for each rho");
    cmd->add_option("--prior-sd", a.prior_sd, "Gaussian prior sd for each rho")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--step-sd", a.step_sd, "random-walk step sd for rho moves")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--rho-init-min", a.rho_init_min, "lower end of the rho initialization draw");
    cmd->add_option("--rho-init-max", a.rho_init_max, "upper end of the rho initialization draw");
    cmd->add_option("--fix-rho0", a.fix_rho0,
                    "pin the cross-class coordinate to this value instead of sampling it")
        ->each([&a](const std::string&) { a.fix_rho0_set = true; });
    cmd->add_option("--seed", a.seed, "RNG seed");
    cmd->add_option("--stream", a.stream, "RNG stream id mixed into the seed");
    if (with_k) {
        cmd->add_option("--init", a.init,
                        "starting point: kmeans warm start (features only), random, or auto")
            ->check(CLI::IsMember({"auto", "random", "kmeans"}));
        cmd->add_option("--kmeans-restarts", a.kmeans_restarts, "k-means restarts for the warm start")
            ->check(CLI::PositiveNumber);
    }
    cmd->add_flag("--debug-checks", a.debug_checks,
                  "recompute the cached log likelihood every 100 iterations");
    cmd->add_option("--out", a.out, "output directory (default: EDGECOV_OUT_DIR)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Subnetwork inference on edge covariance structure"};
    app.require_subcommand(1);
    app.failure_message([](const CLI::App*, const CLI::Error& e) {
        return std::string("error: ") + e.what() + "\n";
    });

    GenerateArgs g;
    auto* gen = app.add_subcommand("generate", "Draw synthetic subjects from a planted structure");
    gen->add_option("--nodes", g.nodes, "node count (checked against --groups when given)");
    gen->add_option("--groups", g.groups, "class sizes, comma separated (3,3,4)")
        ->required()
        ->delimiter(',');
    gen->add_option("--rho", g.rho, "within-class rho per class, comma separated")
        ->required()
        ->delimiter(',');
    gen->add_option("--rho0", g.rho0, "background rho");
    gen->add_option("--lambda", g.lambda, "ridge added to the structured covariance")
        ->check(CLI::NonNegativeNumber);
    gen->add_option("--subjects", g.subjects, "subject rows to draw")->check(CLI::PositiveNumber);
    gen->add_option("--seed", g.seed, "RNG seed");
    gen->add_option("--arrangement", g.arrangement, "node layout of the classes")
        ->check(CLI::IsMember({"contiguous", "scattered", "shuffled"}));
    gen->add_option("--shuffle-seed", g.shuffle_seed, "permutation seed for --arrangement shuffled");
    gen->add_option("--map", g.map, "entry map for rho")
        ->check(CLI::IsMember({"exponential", "identity"}));
    gen->add_option("--out", g.out, "output directory (default: EDGECOV_OUT_DIR)");

    InferArgs inf_args;
    auto* inf = app.add_subcommand("infer", "Fit the partition and rho by Metropolis-Hastings");
    add_infer_options(inf, inf_args, true);

    ScanArgs scan_args;
    auto* scan = app.add_subcommand("scan-k", "Fit a range of class counts and compare by WAIC");
    add_infer_options(scan, scan_args.base, false);
    scan->add_option("--k-min", scan_args.k_min, "smallest class count")->required();
    scan->add_option("--k-max", scan_args.k_max, "largest class count")->required();
    scan->add_option("--threads", scan_args.threads, "worker pool size")->check(CLI::PositiveNumber);

    EvaluateArgs eval_args;
    auto* eval = app.add_subcommand("evaluate", "Score an estimate against a ground truth");
    eval->add_option("--truth", eval_args.truth, "truth.json from generate")->required();
    eval->add_option("--estimate", eval_args.estimate, "estimate.json from infer")->required();
    eval->add_option("--tol", eval_args.tol, "support threshold against the background value");
    eval->add_option("--out", eval_args.out, "output directory (default: EDGECOV_OUT_DIR)");

    ReportArgs rep_args;
    auto* rep = app.add_subcommand("report", "Emit heatmaps and a trace plot from a result directory");
    rep->add_option("--result", rep_args.result, "infer output directory")->required();
    rep->add_option("--truth", rep_args.truth, "truth.json for comparison heatmaps");
    rep->add_option("--out", rep_args.out, "output directory (default: <result>/report)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (gen->parsed()) return run_generate(g);
        if (inf->parsed()) return run_infer(inf_args);
        if (scan->parsed()) return run_scan(scan_args);
        if (eval->parsed()) return run_evaluate(eval_args);
        if (rep->parsed()) return run_report(rep_args);
        throw std::runtime_error("no subcommand given");
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
