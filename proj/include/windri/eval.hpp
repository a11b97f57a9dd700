#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "windri/data_model.hpp"
#include "windri/models.hpp"

namespace windri::eval {

// Fold id per entry index; folds partition the entries with sizes within 1.
struct FoldPlan {
    std::size_t k = 0;
    std::vector<std::size_t> assignment;
    std::uint64_t seed = 0;

    std::vector<std::size_t> fold_sizes() const;
};

// Seeded shuffle, then round-robin assignment. Deterministic per seed.
FoldPlan kfold_split(std::size_t n, std::size_t k, std::uint64_t seed);

struct Metrics {
    double mae = 0.0;
    double rmse = 0.0;
    double r2 = 0.0;
    bool r2_defined = true;  // false when the target variance is zero
};

Metrics compute_metrics(std::span<const double> y, std::span<const double> yhat);

struct FoldMetrics {
    std::size_t fold = 0;
    Metrics transformed;
    Metrics original;
};

struct SeedResult {
    std::uint64_t seed = 0;
    std::vector<FoldMetrics> folds;
};

struct Aggregate {
    double mae_mean = 0.0, mae_std = 0.0;
    double rmse_mean = 0.0, rmse_std = 0.0;
    double r2_mean = 0.0, r2_std = 0.0;
    bool r2_defined = true;
};

enum class Scale { kTransformed, kOriginal };

struct ExperimentConfig {
    std::string model = "m1";
    std::array<std::size_t, 4> bins{8, 8, 8, 8};
    std::array<std::size_t, 4> embed_dims{5, 5, 5, 5};
    std::vector<std::size_t> hidden_dims{5};
    std::size_t pair_width = 5;
    std::size_t folds = 5;
    std::vector<std::uint64_t> seeds{38, 40, 42, 44, 46};
    models::Hyperparams hp;  // hp.seed is overridden by each run seed
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<SeedResult> per_seed;

    // Per-seed value = mean over folds; aggregate = mean +- population std
    // across seeds.
    Aggregate aggregate(Scale scale) const;
    nlohmann::ordered_json report_json(Scale scale) const;  // one report per scale
    nlohmann::ordered_json to_json() const;                 // both reports
};

// Per seed: k-fold split, discretizer and target transform fitted on the
// training folds only, model trained on k-1 folds and evaluated on the
// held-out fold, in both the transformed and the original target scale.
ExperimentResult run_experiment(const Dataset& ds, const ExperimentConfig& cfg);

struct GridAxis {
    std::string key;  // lr | epochs | batch | rank | hidden | pair_width | bins
    std::vector<double> values;
};

struct GridRow {
    std::map<std::string, double> combo;
    double rmse_mean = 0.0;  // transformed scale, mean over seeds
};

struct GridSearchResult {
    std::vector<GridRow> table;
    std::size_t best_index = 0;

    const GridRow& best() const { return table[best_index]; }
    nlohmann::ordered_json to_json() const;
};

// Exhaustive Cartesian product over the axes; best = lowest mean held-out
// RMSE in the transformed scale.
GridSearchResult grid_search(const Dataset& ds, const ExperimentConfig& base,
                             const std::vector<GridAxis>& grid);

ExperimentConfig apply_grid_combo(const ExperimentConfig& base,
                                  const std::map<std::string, double>& combo);

}  // namespace windri::eval
