#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fdrp/csv.hpp"
#include "fdrp/pipeline.hpp"

namespace fdrp {

inline nlohmann::json config_to_json(const PipelineConfig& cfg) {
    nlohmann::json j;
    j["B"] = cfg.num_projections;
    j["B_star"] = cfg.num_retained;
    j["d"] = cfg.d;
    j["a"] = cfg.a;
    j["heuristic_G"] = cfg.heuristic_g;
    j["matrix"] = to_string(cfg.matrix_kind);
    j["criterion"] = to_string(cfg.criterion);
    j["G_range"] = cfg.g_range;
    std::vector<std::string> models;
    models.reserve(cfg.models.size());
    for (CovarianceModel m : cfg.models) models.emplace_back(to_string(m));
    j["models"] = models;
    j["seed"] = cfg.seed;
    j["threads"] = cfg.threads;
    j["restarts"] = cfg.restarts;
    j["em_tol"] = cfg.em_tol;
    j["em_max_iter"] = cfg.em_max_iter;
    j["consensus_tol"] = cfg.consensus.tol;
    j["consensus_max_iter"] = cfg.consensus.max_iter;
    return j;
}

// Fills a config from JSON; absent keys keep their defaults.
inline PipelineConfig config_from_json(const nlohmann::json& j) {
    PipelineConfig cfg;
    if (j.contains("B")) cfg.num_projections = j.at("B").get<int>();
    if (j.contains("B_star")) cfg.num_retained = j.at("B_star").get<int>();
    if (j.contains("d")) cfg.d = j.at("d").get<int>();
    if (j.contains("a")) cfg.a = j.at("a").get<double>();
    if (j.contains("heuristic_G")) cfg.heuristic_g = j.at("heuristic_G").get<int>();
    if (j.contains("matrix")) cfg.matrix_kind = parse_projection_kind(j.at("matrix").get<std::string>());
    if (j.contains("criterion")) cfg.criterion = parse_rank_criterion(j.at("criterion").get<std::string>());
    if (j.contains("G_range")) cfg.g_range = j.at("G_range").get<std::vector<int>>();
    if (j.contains("models")) {
        cfg.models.clear();
        for (const auto& name : j.at("models"))
            cfg.models.push_back(parse_covariance_model(name.get<std::string>()));
    }
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
    if (j.contains("restarts")) cfg.restarts = j.at("restarts").get<int>();
    if (j.contains("em_tol")) cfg.em_tol = j.at("em_tol").get<double>();
    if (j.contains("em_max_iter")) cfg.em_max_iter = j.at("em_max_iter").get<int>();
    if (j.contains("consensus_tol")) cfg.consensus.tol = j.at("consensus_tol").get<double>();
    if (j.contains("consensus_max_iter")) cfg.consensus.max_iter = j.at("consensus_max_iter").get<int>();
    return cfg;
}

inline PipelineConfig load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read config file " + path);
    nlohmann::json j;
    f >> j;
    // A full report is also a valid config source: use its embedded echo.
    if (j.contains("config")) return config_from_json(j.at("config"));
    return config_from_json(j);
}

inline nlohmann::json result_to_json(const PipelineResult& res, const PipelineConfig& cfg) {
    nlohmann::json j;
    j["config"] = config_to_json(cfg);
    j["selected_d"] = res.selected_d;
    j["num_clusters"] = res.labels.k_effective;
    if (std::isfinite(res.ensemble_entropy_value))
        j["ensemble_entropy"] = res.ensemble_entropy_value;
    else
        j["ensemble_entropy"] = nullptr;
    j["consensus"] = {{"objective_trace", res.consensus_trace},
                      {"iterations", res.consensus_iters},
                      {"converged", res.consensus_converged}};
    j["counts"] = {{"retained", res.count(ProjectionStatus::Retained)},
                   {"discarded", res.count(ProjectionStatus::Discarded)},
                   {"unfit", res.count(ProjectionStatus::Unfit)}};
    j["wall_seconds"] = res.wall_seconds;
    nlohmann::json projections = nlohmann::json::array();
    for (const auto& rec : res.per_projection) {
        nlohmann::json p;
        p["b"] = rec.index;
        p["status"] = to_string(rec.status);
        if (rec.num_components > 0) {
            p["G"] = rec.num_components;
            p["model"] = to_string(rec.model);
            p["bic"] = rec.bic;
        }
        if (std::isfinite(rec.score)) p["score"] = rec.score;
        if (rec.rank >= 0) p["rank"] = rec.rank;
        if (!rec.note.empty()) p["note"] = rec.note;
        projections.push_back(std::move(p));
    }
    j["projections"] = std::move(projections);
    return j;
}

// labels.csv (one 1-based label per line), membership.csv, report.json.
inline void write_report(const PipelineResult& res, const PipelineConfig& cfg,
                         const std::string& dir) {
    std::filesystem::create_directories(dir);
    write_labels_csv(dir + "/labels.csv", res.labels.labels);
    write_matrix_csv(dir + "/membership.csv", res.membership);
    std::ofstream f(dir + "/report.json");
    if (!f) throw std::runtime_error("cannot write " + dir + "/report.json");
    f << result_to_json(res, cfg).dump(2) << "\n";
}

}  // namespace fdrp
