#include "windri/eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "windri/rng.hpp"

namespace windri::eval {

namespace {

std::pair<double, double> mean_pop_std(std::span<const double> xs) {
    if (xs.empty()) return {0.0, 0.0};
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(xs.size());
    return {mean, std::sqrt(var)};
}

nlohmann::ordered_json json_number(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

}  // namespace

std::vector<std::size_t> FoldPlan::fold_sizes() const {
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t f : assignment) ++sizes[f];
    return sizes;
}

FoldPlan kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("kfold_split: need at least 2 folds");
    if (n < k)
        throw std::invalid_argument("kfold_split: " + std::to_string(n) + " entries cannot fill " +
                                    std::to_string(k) + " folds");
    rng::Engine rng(seed);
    const std::vector<std::size_t> shuffled = rng::permutation(n, rng);
    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.assignment.resize(n);
    for (std::size_t i = 0; i < n; ++i) plan.assignment[shuffled[i]] = i % k;
    return plan;
}

Metrics compute_metrics(std::span<const double> y, std::span<const double> yhat) {
    if (y.size() != yhat.size())
        throw std::invalid_argument("compute_metrics: length mismatch " + std::to_string(y.size()) +
                                    " vs " + std::to_string(yhat.size()));
    if (y.empty()) throw std::invalid_argument("compute_metrics: empty input");

    const double n = static_cast<double>(y.size());
    double abs_sum = 0.0, sq_sum = 0.0, y_mean = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = y[i] - yhat[i];
        abs_sum += std::fabs(d);
        sq_sum += d * d;
        y_mean += y[i];
    }
    y_mean /= n;
    double ss_tot = 0.0;
    for (double v : y) ss_tot += (v - y_mean) * (v - y_mean);

    Metrics m;
    m.mae = abs_sum / n;
    m.rmse = std::sqrt(sq_sum / n);
    if (ss_tot == 0.0) {
        m.r2_defined = false;
        m.r2 = 0.0;
    } else {
        m.r2 = 1.0 - sq_sum / ss_tot;
    }
    return m;
}

namespace {

struct SeedSummary {
    double mae = 0.0;
    double rmse = 0.0;
    double r2 = 0.0;
    bool r2_defined = false;
};

SeedSummary summarize_seed(const SeedResult& sr, Scale scale) {
    SeedSummary s;
    std::vector<double> mae, rmse, r2;
    for (const FoldMetrics& fm : sr.folds) {
        const Metrics& m = scale == Scale::kTransformed ? fm.transformed : fm.original;
        mae.push_back(m.mae);
        rmse.push_back(m.rmse);
        if (m.r2_defined) r2.push_back(m.r2);
    }
    s.mae = mean_pop_std(mae).first;
    s.rmse = mean_pop_std(rmse).first;
    if (!r2.empty()) {
        s.r2 = mean_pop_std(r2).first;
        s.r2_defined = true;
    }
    return s;
}

}  // namespace

Aggregate ExperimentResult::aggregate(Scale scale) const {
    std::vector<double> mae, rmse, r2;
    for (const SeedResult& sr : per_seed) {
        const SeedSummary s = summarize_seed(sr, scale);
        mae.push_back(s.mae);
        rmse.push_back(s.rmse);
        if (s.r2_defined) r2.push_back(s.r2);
    }
    Aggregate a;
    std::tie(a.mae_mean, a.mae_std) = mean_pop_std(mae);
    std::tie(a.rmse_mean, a.rmse_std) = mean_pop_std(rmse);
    if (r2.empty()) {
        a.r2_defined = false;
    } else {
        std::tie(a.r2_mean, a.r2_std) = mean_pop_std(r2);
    }
    return a;
}

nlohmann::ordered_json ExperimentResult::report_json(Scale scale) const {
    nlohmann::ordered_json j;
    j["model"] = config.model;
    j["scale"] = scale == Scale::kTransformed ? "transformed" : "original";
    nlohmann::ordered_json seeds = nlohmann::ordered_json::array();
    for (const SeedResult& sr : per_seed) {
        nlohmann::ordered_json js;
        js["seed"] = sr.seed;
        nlohmann::ordered_json folds = nlohmann::ordered_json::array();
        for (const FoldMetrics& fm : sr.folds) {
            const Metrics& m = scale == Scale::kTransformed ? fm.transformed : fm.original;
            folds.push_back({{"fold", fm.fold},
                             {"mae", json_number(m.mae)},
                             {"rmse", json_number(m.rmse)},
                             {"r2", m.r2_defined ? json_number(m.r2) : nlohmann::ordered_json(nullptr)}});
        }
        js["per_fold"] = std::move(folds);
        seeds.push_back(std::move(js));
    }
    j["per_seed"] = std::move(seeds);
    const Aggregate a = aggregate(scale);
    j["aggregate"] = {{"mae_mean", json_number(a.mae_mean)},
                      {"mae_std", json_number(a.mae_std)},
                      {"rmse_mean", json_number(a.rmse_mean)},
                      {"rmse_std", json_number(a.rmse_std)},
                      {"r2_mean", a.r2_defined ? json_number(a.r2_mean) : nlohmann::ordered_json(nullptr)},
                      {"r2_std", a.r2_defined ? json_number(a.r2_std) : nlohmann::ordered_json(nullptr)}};
    return j;
}

nlohmann::ordered_json ExperimentResult::to_json() const {
    return nlohmann::ordered_json::array({report_json(Scale::kTransformed), report_json(Scale::kOriginal)});
}

ExperimentResult run_experiment(const Dataset& ds, const ExperimentConfig& cfg) {
    if (cfg.seeds.empty()) throw std::invalid_argument("run_experiment: seed list is empty");
    const std::size_t n = ds.records.size();
    for (std::size_t i = 0; i < n; ++i)
        if (!ds.records[i].ri)
            throw std::invalid_argument("run_experiment: record " + std::to_string(i) + " has no ri value");

    ExperimentResult result;
    result.config = cfg;
    for (const std::uint64_t seed : cfg.seeds) {
        const FoldPlan plan = kfold_split(n, cfg.folds, seed);
        SeedResult sr;
        sr.seed = seed;
        for (std::size_t f = 0; f < cfg.folds; ++f) {
            Dataset train_ds;
            std::vector<const WindObservation*> test_recs;
            for (std::size_t i = 0; i < n; ++i) {
                if (plan.assignment[i] == f)
                    test_recs.push_back(&ds.records[i]);
                else
                    train_ds.records.push_back(ds.records[i]);
            }

            // No leakage: all preprocessing parameters come from the training
            // folds alone.
            const FeatureColumns cols = columns(train_ds);
            const Discretizer disc =
                Discretizer::fit(cols.h, cols.u, cols.v, cols.w, cols.ri, cfg.bins);
            const SparseTensor4 tensor = build_sparse_tensor(train_ds, disc);

            models::ModelConfig mc;
            mc.mode_sizes = cfg.bins;
            mc.embed_dims = cfg.embed_dims;
            mc.hidden_dims = cfg.hidden_dims;
            mc.pair_width = cfg.pair_width;
            std::unique_ptr<models::Model> model = models::make_model(cfg.model, mc, seed);
            models::Hyperparams hp = cfg.hp;
            hp.seed = seed;
            models::train(*model, tensor, hp);

            std::vector<double> y_t, yhat_t, y_o, yhat_o;
            y_t.reserve(test_recs.size());
            for (const WindObservation* rec : test_recs) {
                const Index4 idx = disc.discretize(rec->h, rec->u, rec->v, rec->w);
                const double raw = model->predict_one(idx);
                y_t.push_back(disc.target().forward(*rec->ri));
                yhat_t.push_back(raw);
                y_o.push_back(*rec->ri);
                yhat_o.push_back(disc.target().inverse(raw));
            }
            FoldMetrics fm;
            fm.fold = f;
            fm.transformed = compute_metrics(y_t, yhat_t);
            fm.original = compute_metrics(y_o, yhat_o);
            sr.folds.push_back(fm);
        }
        result.per_seed.push_back(std::move(sr));
    }
    return result;
}

namespace {

std::size_t to_count(const std::string& key, double v) {
    if (v < 1.0 || v != std::floor(v))
        throw std::invalid_argument("grid_search: axis '" + key + "' needs positive integers, got " +
                                    format_double(v));
    return static_cast<std::size_t>(v);
}

}  // namespace

ExperimentConfig apply_grid_combo(const ExperimentConfig& base,
                                  const std::map<std::string, double>& combo) {
    ExperimentConfig cfg = base;
    for (const auto& [key, v] : combo) {
        if (key == "lr") {
            cfg.hp.lr = v;
        } else if (key == "epochs") {
            cfg.hp.epochs = to_count(key, v);
        } else if (key == "batch") {
            cfg.hp.batch_size = to_count(key, v);
        } else if (key == "rank") {
            cfg.embed_dims.fill(to_count(key, v));
        } else if (key == "hidden") {
            cfg.hidden_dims = {to_count(key, v)};
        } else if (key == "pair_width") {
            cfg.pair_width = to_count(key, v);
        } else if (key == "bins") {
            cfg.bins.fill(to_count(key, v));
        } else {
            throw std::invalid_argument("grid_search: unknown axis '" + key + "'");
        }
    }
    return cfg;
}

GridSearchResult grid_search(const Dataset& ds, const ExperimentConfig& base,
                             const std::vector<GridAxis>& grid) {
    if (grid.empty()) throw std::invalid_argument("grid_search: empty grid");
    for (const GridAxis& axis : grid)
        if (axis.values.empty())
            throw std::invalid_argument("grid_search: axis '" + axis.key + "' has no values");

    // Row-major walk of the Cartesian product, last axis fastest.
    const auto advance = [&](std::vector<std::size_t>& cursor) {
        for (std::size_t a = grid.size(); a-- > 0;) {
            if (++cursor[a] < grid[a].values.size()) return true;
            cursor[a] = 0;
        }
        return false;
    };

    GridSearchResult result;
    std::vector<std::size_t> cursor(grid.size(), 0);
    do {
        std::map<std::string, double> combo;
        for (std::size_t a = 0; a < grid.size(); ++a) combo[grid[a].key] = grid[a].values[cursor[a]];

        const ExperimentConfig cfg = apply_grid_combo(base, combo);
        const ExperimentResult run = run_experiment(ds, cfg);
        GridRow row;
        row.combo = std::move(combo);
        row.rmse_mean = run.aggregate(Scale::kTransformed).rmse_mean;
        result.table.push_back(std::move(row));
    } while (advance(cursor));

    result.best_index = 0;
    for (std::size_t i = 1; i < result.table.size(); ++i)
        if (result.table[i].rmse_mean < result.table[result.best_index].rmse_mean) result.best_index = i;
    return result;
}

nlohmann::ordered_json GridSearchResult::to_json() const {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const GridRow& row : table) {
        nlohmann::ordered_json combo;
        for (const auto& [k, v] : row.combo) combo[k] = v;
        rows.push_back({{"combo", std::move(combo)}, {"rmse_mean", json_number(row.rmse_mean)}});
    }
    nlohmann::ordered_json best_combo;
    for (const auto& [k, v] : best().combo) best_combo[k] = v;
    return {{"table", std::move(rows)},
            {"best", {{"combo", std::move(best_combo)}, {"rmse_mean", json_number(best().rmse_mean)}}}};
}

}  // namespace windri::eval
