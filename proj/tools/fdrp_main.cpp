// Command-line front end: simulate / smooth / cluster / select-d / evaluate / bench.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "fdrp/csv.hpp"
#include "fdrp/metrics.hpp"
#include "fdrp/pipeline.hpp"
#include "fdrp/report.hpp"
#include "fdrp/simulate.hpp"
#include "fdrp/smoothing.hpp"

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        out.push_back(s.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

// "2,3,4" or "2:9" (inclusive range).
std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    if (s.find(':') != std::string::npos) {
        const auto parts = split(s, ':');
        if (parts.size() != 2) throw CLI::ValidationError("expected lo:hi in '" + s + "'");
        const int lo = std::stoi(parts[0]);
        const int hi = std::stoi(parts[1]);
        if (hi < lo) throw CLI::ValidationError("empty range '" + s + "'");
        for (int v = lo; v <= hi; ++v) out.push_back(v);
        return out;
    }
    for (const auto& tok : split(s, ',')) out.push_back(std::stoi(tok));
    if (out.empty()) throw CLI::ValidationError("empty list '" + s + "'");
    return out;
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    for (const auto& tok : split(s, ',')) out.push_back(std::stod(tok));
    if (out.empty()) throw CLI::ValidationError("empty list '" + s + "'");
    return out;
}

struct PipelineFlags {
    std::string config;
    int num_projections = 0;
    int num_retained = 0;
    int d = 0;
    double a = 0.0;
    int heuristic_g = 0;
    int g_fixed = 0;
    std::string g_range;
    std::string matrix;
    std::string criterion;
    std::uint64_t seed = 0;
    int threads = 0;
    int restarts = 0;
};

void add_pipeline_flags(CLI::App* sub, PipelineFlags& f) {
    sub->add_option("--config", f.config, "JSON config file; explicit flags override it");
    sub->add_option("--B", f.num_projections, "number of random projections (default 1000)");
    sub->add_option("--Bstar", f.num_retained, "projections kept for the ensemble (default 100)");
    sub->add_option("--d", f.d, "projection dimension (default: ceil(a ln G) + 1)");
    sub->add_option("--a", f.a, "scale in the dimension heuristic (default 5)");
    sub->add_option("--G-heuristic", f.heuristic_g,
                    "G used by the dimension heuristic (default: largest candidate)");
    sub->add_option("--g-fixed", f.g_fixed, "fix the number of mixture components");
    sub->add_option("--G-range", f.g_range, "component counts to scan, e.g. 2:9 or 2,4,6");
    sub->add_option("--matrix", f.matrix, "projection matrix family (default haar)")
        ->check(CLI::IsMember({"gaussian", "haar"}));
    sub->add_option("--criterion", f.criterion, "projection ranking criterion (default kl)")
        ->check(CLI::IsMember({"kl", "wasserstein", "entropy"}));
    sub->add_option("--seed", f.seed, "master seed (default 0)");
    sub->add_option("--threads", f.threads, "worker threads for the projection loop (default 1)");
    sub->add_option("--restarts", f.restarts,
                    "accepted for config compatibility; the EM start is deterministic, so "
                    "every (G, model) pair is fitted once");
}

fdrp::PipelineConfig build_config(const CLI::App* sub, const PipelineFlags& f) {
    fdrp::PipelineConfig cfg =
        f.config.empty() ? fdrp::PipelineConfig{} : fdrp::load_config_file(f.config);
    if (sub->count("--B")) cfg.num_projections = f.num_projections;
    if (sub->count("--Bstar")) cfg.num_retained = f.num_retained;
    if (sub->count("--d")) cfg.d = f.d;
    if (sub->count("--a")) cfg.a = f.a;
    if (sub->count("--G-heuristic")) cfg.heuristic_g = f.heuristic_g;
    if (sub->count("--matrix")) cfg.matrix_kind = fdrp::parse_projection_kind(f.matrix);
    if (sub->count("--criterion")) cfg.criterion = fdrp::parse_rank_criterion(f.criterion);
    if (sub->count("--seed")) cfg.seed = f.seed;
    if (sub->count("--threads")) cfg.threads = f.threads;
    if (sub->count("--restarts")) cfg.restarts = f.restarts;
    if (sub->count("--g-fixed"))
        cfg.g_range = {f.g_fixed};
    else if (sub->count("--G-range"))
        cfg.g_range = parse_int_list(f.g_range);
    return cfg;
}

struct SmoothingFlags {
    std::string k_list = "100";
    std::string lambda_list = "1";
    int order = 4;
};

void add_smoothing_flags(CLI::App* sub, SmoothingFlags& f) {
    sub->add_option("--K", f.k_list,
                    "basis size; a comma list triggers GCV selection (default 100)");
    sub->add_option("--lambda", f.lambda_list,
                    "roughness penalty; a comma list triggers GCV selection (default 1)");
    sub->add_option("--order", f.order, "spline order (default 4 = cubic)")
        ->check(CLI::Range(3, 10));
}

// Resolves (K, lambda), running GCV selection when either flag is a list.
fdrp::BasisSpec resolve_basis(const fdrp::CurveSet& curves, const SmoothingFlags& f,
                              bool quiet = false) {
    const std::vector<int> ks = parse_int_list(f.k_list);
    const std::vector<double> lambdas = parse_double_list(f.lambda_list);
    if (ks.size() == 1 && lambdas.size() == 1)
        return fdrp::BasisSpec{ks[0], f.order, lambdas[0], {}};
    const fdrp::SmoothingSelection sel = fdrp::select_smoothing(curves, ks, lambdas, f.order);
    if (!quiet)
        std::cout << "gcv selected K=" << sel.num_basis << " lambda=" << sel.lambda
                  << " (score " << sel.score << ")\n";
    return fdrp::BasisSpec{sel.num_basis, f.order, sel.lambda, {}};
}

std::string replicate_name(int r, const char* suffix) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "rep%03d_%s.csv", r, suffix);
    return buf;
}

int run_simulate(int scenario, int replicates, std::uint64_t seed, const std::string& out_dir,
                 bool gaussian_mixing) {
    std::filesystem::create_directories(out_dir);
    for (int r = 0; r < replicates; ++r) {
        fdrp::ScenarioSpec spec =
            fdrp::ScenarioSpec::defaults(scenario, fdrp::derive_seed(seed, {static_cast<std::uint64_t>(r)}));
        spec.gaussian_mixing = gaussian_mixing;
        const fdrp::SimulatedDataset data = fdrp::gen_scenario(spec);
        fdrp::write_curves_csv(out_dir + "/" + replicate_name(r, "curves"), data.curves);
        fdrp::write_labels_csv(out_dir + "/" + replicate_name(r, "labels"), data.labels.labels);
    }
    std::cout << "wrote " << replicates << " replicate(s) of scenario " << scenario << " to "
              << out_dir << "\n";
    return 0;
}

int run_smooth(const std::string& in_path, const std::string& out_path, const SmoothingFlags& sf) {
    const fdrp::CurveSet curves = fdrp::read_curves_csv(in_path);
    const fdrp::BasisSpec spec = resolve_basis(curves, sf);
    const fdrp::CoefficientMatrix coef = fdrp::smooth_dataset(curves, spec);
    fdrp::write_matrix_csv(out_path, coef.coef);
    std::cout << "smoothed " << curves.num_curves() << " curve(s) into " << spec.num_basis
              << " coefficients each -> " << out_path << "\n";
    return 0;
}

Eigen::MatrixXd load_coefficients(const std::string& curves_path, const std::string& coef_path,
                                  const SmoothingFlags& sf) {
    if (!coef_path.empty()) return fdrp::read_matrix_csv(coef_path);
    const fdrp::CurveSet curves = fdrp::read_curves_csv(curves_path);
    const fdrp::BasisSpec spec = resolve_basis(curves, sf);
    return fdrp::smooth_dataset(curves, spec).coef;
}

void print_pipeline_summary(const fdrp::PipelineResult& res) {
    std::cout << "clusters: " << res.labels.k_effective << "\n"
              << "projections: " << res.count(fdrp::ProjectionStatus::Retained) << " retained, "
              << res.count(fdrp::ProjectionStatus::Discarded) << " discarded, "
              << res.count(fdrp::ProjectionStatus::Unfit) << " unfit\n"
              << "d: " << res.selected_d << "\n";
    if (std::isfinite(res.ensemble_entropy_value))
        std::cout << "ensemble entropy: " << res.ensemble_entropy_value << "\n";
}

int run_cluster(const std::string& in_path, const std::string& coef_path,
                const std::string& out_dir, const SmoothingFlags& sf,
                const fdrp::PipelineConfig& cfg) {
    const Eigen::MatrixXd coef = load_coefficients(in_path, coef_path, sf);
    const fdrp::PipelineResult res = fdrp::run_pipeline(coef, cfg);
    fdrp::write_report(res, cfg, out_dir);
    print_pipeline_summary(res);
    std::cout << "outputs in " << out_dir << "\n";
    return 0;
}

int run_select_d(const std::string& in_path, const std::string& coef_path,
                 const std::string& out_dir, const SmoothingFlags& sf,
                 const fdrp::PipelineConfig& cfg, const std::string& candidates) {
    const Eigen::MatrixXd coef = load_coefficients(in_path, coef_path, sf);
    const std::vector<int> cands = parse_int_list(candidates);
    const fdrp::DimensionSelection sel = fdrp::select_d(coef, cfg, cands);

    fdrp::PipelineConfig chosen = cfg;
    chosen.d = sel.selected_d;
    fdrp::write_report(sel.result, chosen, out_dir);

    nlohmann::json j;
    j["selected_d"] = sel.selected_d;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& [d, entropy] : sel.entropies) {
        nlohmann::json row;
        row["d"] = d;
        if (std::isfinite(entropy))
            row["ensemble_entropy"] = entropy;
        else
            row["ensemble_entropy"] = nullptr;
        rows.push_back(std::move(row));
    }
    j["candidates"] = std::move(rows);
    std::ofstream f(out_dir + "/selection.json");
    if (!f) throw std::runtime_error("cannot write " + out_dir + "/selection.json");
    f << j.dump(2) << "\n";

    std::cout << "selected d: " << sel.selected_d << "\n";
    print_pipeline_summary(sel.result);
    std::cout << "outputs in " << out_dir << "\n";
    return 0;
}

int run_evaluate(const std::string& found_path, const std::string& truth_path,
                 const std::string& out_path) {
    const std::vector<int> found = fdrp::read_labels_csv(found_path);
    const std::vector<int> truth = fdrp::read_labels_csv(truth_path);
    const double ari = fdrp::adjusted_rand_index(found, truth);
    const Eigen::MatrixXi table = fdrp::confusion_matrix(found, truth);

    std::cout << "ARI: " << ari << "\n";
    if (!out_path.empty()) {
        nlohmann::json j;
        j["ari"] = ari;
        j["n"] = static_cast<int>(found.size());
        nlohmann::json rows = nlohmann::json::array();
        for (int i = 0; i < table.rows(); ++i) {
            std::vector<int> row(table.cols());
            for (int c = 0; c < table.cols(); ++c) row[c] = table(i, c);
            rows.push_back(row);
        }
        j["confusion"] = std::move(rows);
        std::ofstream f(out_path);
        if (!f) throw std::runtime_error("cannot write " + out_path);
        f << j.dump(2) << "\n";
        std::cout << "report -> " << out_path << "\n";
    }
    return 0;
}

int run_bench(int scenario, int replicates, std::uint64_t seed, const std::string& out_path,
              const SmoothingFlags& sf, bool smoothing_given, bool gaussian_mixing,
              fdrp::PipelineConfig cfg) {
    std::vector<double> aris;
    std::vector<int> selected;
    nlohmann::json reps = nlohmann::json::array();
    for (int r = 0; r < replicates; ++r) {
        const std::uint64_t rep_seed = fdrp::derive_seed(seed, {static_cast<std::uint64_t>(r)});
        fdrp::ScenarioSpec spec = fdrp::ScenarioSpec::defaults(scenario, fdrp::derive_seed(rep_seed, {0}));
        spec.gaussian_mixing = gaussian_mixing;
        const fdrp::SimulatedDataset data = fdrp::gen_scenario(spec);

        fdrp::BasisSpec basis;
        if (smoothing_given) {
            basis = resolve_basis(data.curves, sf, true);
        } else {
            int k = 0;
            double lambda = 0.0;
            fdrp::scenario_smoothing(scenario, k, lambda);
            basis = fdrp::BasisSpec{k, 4, lambda, {}};
        }
        const fdrp::CoefficientMatrix coef = fdrp::smooth_dataset(data.curves, basis);

        cfg.seed = fdrp::derive_seed(rep_seed, {1});
        const fdrp::PipelineResult res = fdrp::run_pipeline(coef.coef, cfg);
        const double ari = fdrp::adjusted_rand_index(res.labels.labels, data.labels.labels);
        aris.push_back(ari);
        selected.push_back(res.labels.k_effective);
        std::cout << "replicate " << r << ": G=" << res.labels.k_effective << " ARI=" << ari
                  << " (" << res.wall_seconds << " s)\n";
        reps.push_back({{"replicate", r},
                        {"ari", ari},
                        {"selected_G", res.labels.k_effective},
                        {"wall_seconds", res.wall_seconds}});
    }

    std::vector<double> sorted = aris;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    const double median_ari = (sorted.size() % 2 == 1)
                                  ? sorted[mid]
                                  : 0.5 * (sorted[mid - 1] + sorted[mid]);
    const auto hist = fdrp::cluster_count_table(selected);

    std::cout << "cluster counts:";
    for (const auto& [g, count] : hist) std::cout << " G=" << g << " x" << count;
    std::cout << "\nmedian ARI: " << median_ari << "\n";

    if (!out_path.empty()) {
        nlohmann::json j;
        j["scenario"] = scenario;
        j["replicates"] = replicates;
        j["seed"] = seed;
        j["config"] = fdrp::config_to_json(cfg);
        j["per_replicate"] = std::move(reps);
        nlohmann::json hist_json = nlohmann::json::object();
        for (const auto& [g, count] : hist) hist_json[std::to_string(g)] = count;
        j["cluster_counts"] = std::move(hist_json);
        j["median_ari"] = median_ari;
        std::ofstream f(out_path);
        if (!f) throw std::runtime_error("cannot write " + out_path);
        f << j.dump(2) << "\n";
        std::cout << "report -> " << out_path << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"functional-data clustering via random projection ensembles"};
    app.require_subcommand(1);
    int exit_code = 0;

    // simulate
    auto* sim = app.add_subcommand("simulate", "generate benchmark scenario datasets");
    int sim_scenario = 1, sim_replicates = 1;
    std::uint64_t sim_seed = 0;
    std::string sim_out;
    bool sim_gaussian = false;
    sim->add_option("--scenario", sim_scenario, "scenario id")->required()->check(CLI::Range(1, 3));
    sim->add_option("--replicates", sim_replicates, "number of datasets (default 1)")
        ->check(CLI::PositiveNumber);
    sim->add_option("--seed", sim_seed, "master seed (default 0)");
    sim->add_option("--out", sim_out, "output directory")->required();
    sim->add_flag("--gaussian-mixing", sim_gaussian,
                  "scenario 1: Gaussian mixing coefficients instead of uniform");
    sim->callback([&]() {
        exit_code = run_simulate(sim_scenario, sim_replicates, sim_seed, sim_out, sim_gaussian);
    });

    // smooth
    auto* smo = app.add_subcommand("smooth", "curves CSV -> basis coefficients CSV");
    std::string smo_in, smo_out;
    SmoothingFlags smo_flags;
    smo->add_option("--in", smo_in, "input curve CSV")->required()->check(CLI::ExistingFile);
    smo->add_option("--out", smo_out, "output coefficient CSV")->required();
    add_smoothing_flags(smo, smo_flags);
    smo->callback([&]() { exit_code = run_smooth(smo_in, smo_out, smo_flags); });

    // cluster
    auto* clu = app.add_subcommand("cluster", "cluster curves or coefficients");
    std::string clu_in, clu_coef, clu_out;
    SmoothingFlags clu_smooth;
    PipelineFlags clu_pipe;
    auto* clu_in_opt = clu->add_option("--in", clu_in, "curve CSV input")->check(CLI::ExistingFile);
    auto* clu_coef_opt =
        clu->add_option("--coef", clu_coef, "coefficient CSV input")->check(CLI::ExistingFile);
    clu_in_opt->excludes(clu_coef_opt);
    clu->add_option("--out", clu_out, "output directory")->required();
    add_smoothing_flags(clu, clu_smooth);
    add_pipeline_flags(clu, clu_pipe);
    clu->callback([&]() {
        if (clu_in.empty() && clu_coef.empty())
            throw CLI::ValidationError("cluster", "provide --in or --coef");
        exit_code = run_cluster(clu_in, clu_coef, clu_out, clu_smooth, build_config(clu, clu_pipe));
    });

    // select-d
    auto* sel = app.add_subcommand("select-d", "pick the projection dimension by ensemble entropy");
    std::string sel_in, sel_coef, sel_out, sel_cands;
    SmoothingFlags sel_smooth;
    PipelineFlags sel_pipe;
    auto* sel_in_opt = sel->add_option("--in", sel_in, "curve CSV input")->check(CLI::ExistingFile);
    auto* sel_coef_opt =
        sel->add_option("--coef", sel_coef, "coefficient CSV input")->check(CLI::ExistingFile);
    sel_in_opt->excludes(sel_coef_opt);
    sel->add_option("--out", sel_out, "output directory")->required();
    sel->add_option("--candidates", sel_cands, "candidate dimensions, e.g. 3,5,10")->required();
    add_smoothing_flags(sel, sel_smooth);
    add_pipeline_flags(sel, sel_pipe);
    sel->callback([&]() {
        if (sel_in.empty() && sel_coef.empty())
            throw CLI::ValidationError("select-d", "provide --in or --coef");
        exit_code = run_select_d(sel_in, sel_coef, sel_out, sel_smooth,
                                 build_config(sel, sel_pipe), sel_cands);
    });

    // evaluate
    auto* eva = app.add_subcommand("evaluate", "compare a found partition against the truth");
    std::string eva_found, eva_truth, eva_out;
    eva->add_option("--found", eva_found, "found labels CSV")->required()->check(CLI::ExistingFile);
    eva->add_option("--truth", eva_truth, "true labels CSV")->required()->check(CLI::ExistingFile);
    eva->add_option("--out", eva_out, "JSON report path");
    eva->callback([&]() { exit_code = run_evaluate(eva_found, eva_truth, eva_out); });

    // bench
    auto* ben = app.add_subcommand("bench", "replicated scenario benchmark with ARI summary");
    int ben_scenario = 1, ben_replicates = 10;
    std::uint64_t ben_seed = 0;
    std::string ben_out;
    bool ben_gaussian = false;
    SmoothingFlags ben_smooth;
    PipelineFlags ben_pipe;
    ben->add_option("--scenario", ben_scenario, "scenario id")->required()->check(CLI::Range(1, 3));
    ben->add_option("--replicates", ben_replicates, "number of replicates (default 10)")
        ->check(CLI::PositiveNumber);
    ben->add_option("--bench-seed", ben_seed, "seed for replicate generation (default 0)");
    ben->add_option("--out", ben_out, "JSON summary path");
    ben->add_flag("--gaussian-mixing", ben_gaussian,
                  "scenario 1: Gaussian mixing coefficients instead of uniform");
    add_smoothing_flags(ben, ben_smooth);
    add_pipeline_flags(ben, ben_pipe);
    ben->callback([&]() {
        const bool smoothing_given = ben->count("--K") || ben->count("--lambda");
        exit_code = run_bench(ben_scenario, ben_replicates, ben_seed, ben_out, ben_smooth,
                              smoothing_given, ben_gaussian, build_config(ben, ben_pipe));
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return exit_code;
}
