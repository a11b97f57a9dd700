#include "windri/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace windri {

namespace {

void require_finite(std::span<const double> values, const char* who) {
    for (double v : values)
        if (!std::isfinite(v)) throw std::invalid_argument(std::string(who) + ": non-finite value in input");
}

}  // namespace

Standardizer Standardizer::fit(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("Standardizer::fit: empty input");
    require_finite(values, "Standardizer::fit");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size());  // population variance
    Standardizer s;
    s.mu_ = mean;
    s.sigma_ = std::sqrt(var);
    return s;
}

nlohmann::ordered_json Standardizer::to_json() const {
    return {{"mu", mu_}, {"sigma", sigma_}};
}

Standardizer Standardizer::from_json(const nlohmann::json& j) {
    Standardizer s;
    s.mu_ = j.at("mu").get<double>();
    s.sigma_ = j.at("sigma").get<double>();
    return s;
}

double quantile_sorted(std::span<const double> sorted_values, double p) {
    if (sorted_values.empty()) throw std::invalid_argument("quantile_sorted: empty input");
    if (p <= 0.0) return sorted_values.front();
    if (p >= 1.0) return sorted_values.back();
    const double pos = p * static_cast<double>(sorted_values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (frac == 0.0 || lo + 1 == sorted_values.size()) return sorted_values[lo];
    return sorted_values[lo] + frac * (sorted_values[lo + 1] - sorted_values[lo]);
}

BinEdges BinEdges::fit(std::span<const double> values, std::size_t bins) {
    if (bins < 2) throw std::invalid_argument("BinEdges::fit: bin count must be at least 2");
    if (values.size() < bins)
        throw std::invalid_argument("BinEdges::fit: need at least " + std::to_string(bins) +
                                    " samples, got " + std::to_string(values.size()));
    require_finite(values, "BinEdges::fit");

    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());

    BinEdges b;
    b.bin_count_ = bins;
    b.edges_.reserve(bins - 1);
    for (std::size_t k = 1; k < bins; ++k) {
        const double e = quantile_sorted(sorted, static_cast<double>(k) / static_cast<double>(bins));
        // Ties collapse: drop duplicates, and drop edges at or below the sample
        // minimum so the bottom label is never empty on the fitting sample.
        if (e <= sorted.front()) continue;
        if (!b.edges_.empty() && e == b.edges_.back()) continue;
        b.edges_.push_back(e);
    }
    return b;
}

std::size_t BinEdges::index_of(double x) const {
    // Number of edges <= x, which realizes: 0 below the first edge, i on
    // [edge_i, edge_{i+1}), effective_bins-1 at or above the last edge.
    return static_cast<std::size_t>(
        std::upper_bound(edges_.begin(), edges_.end(), x) - edges_.begin());
}

nlohmann::ordered_json BinEdges::to_json() const {
    return {{"bins", bin_count_}, {"edges", edges_}};
}

BinEdges BinEdges::from_json(const nlohmann::json& j) {
    BinEdges b;
    b.bin_count_ = j.at("bins").get<std::size_t>();
    b.edges_ = j.at("edges").get<std::vector<double>>();
    return b;
}

double TargetTransform::signed_log(double y) {
    return std::copysign(std::log1p(std::fabs(y)), y);
}

double TargetTransform::signed_exp(double t) {
    return std::copysign(std::expm1(std::fabs(t)), t);
}

TargetTransform TargetTransform::fit(std::span<const double> targets) {
    if (targets.empty()) throw std::invalid_argument("TargetTransform::fit: empty input");
    require_finite(targets, "TargetTransform::fit");

    std::vector<double> t(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) t[i] = signed_log(targets[i]);

    const Standardizer s = Standardizer::fit(t);
    TargetTransform tf;
    tf.mu_ = s.mu();
    tf.sigma_ = s.sigma();
    tf.min_z_ = s.apply(t.front());
    tf.max_z_ = tf.min_z_;
    for (double v : t) {
        const double z = s.apply(v);
        tf.min_z_ = std::min(tf.min_z_, z);
        tf.max_z_ = std::max(tf.max_z_, z);
    }
    return tf;
}

double TargetTransform::forward(double y) const {
    if (degenerate()) return 0.5;
    const double t = signed_log(y);
    const double z = sigma_ == 0.0 ? 0.0 : (t - mu_) / sigma_;
    return (z - min_z_) / (max_z_ - min_z_);
}

double TargetTransform::inverse(double s) const {
    const double z = degenerate() ? min_z_ : min_z_ + s * (max_z_ - min_z_);
    const double t = mu_ + sigma_ * z;
    return signed_exp(t);
}

nlohmann::ordered_json TargetTransform::to_json() const {
    return {{"mu", mu_}, {"sigma", sigma_}, {"min_z", min_z_}, {"max_z", max_z_}};
}

TargetTransform TargetTransform::from_json(const nlohmann::json& j) {
    TargetTransform tf;
    tf.mu_ = j.at("mu").get<double>();
    tf.sigma_ = j.at("sigma").get<double>();
    tf.min_z_ = j.at("min_z").get<double>();
    tf.max_z_ = j.at("max_z").get<double>();
    return tf;
}

Discretizer Discretizer::fit(std::span<const double> h,
                             std::span<const double> u,
                             std::span<const double> v,
                             std::span<const double> w,
                             std::span<const double> targets,
                             const std::array<std::size_t, 4>& bins) {
    const std::array<std::span<const double>, 4> cols = {h, u, v, w};
    Discretizer d;
    d.bins_ = bins;
    for (std::size_t m = 0; m < 4; ++m) {
        d.modes_[m].standardizer = Standardizer::fit(cols[m]);
        std::vector<double> std_values(cols[m].size());
        for (std::size_t i = 0; i < cols[m].size(); ++i)
            std_values[i] = d.modes_[m].standardizer.apply(cols[m][i]);
        d.modes_[m].edges = BinEdges::fit(std_values, bins[m]);
    }
    d.target_ = TargetTransform::fit(targets);
    return d;
}

std::size_t Discretizer::discretize_mode(std::size_t mode, double x) const {
    return modes_[mode].edges.index_of(modes_[mode].standardizer.apply(x));
}

std::array<std::size_t, 4> Discretizer::discretize(double h, double u, double v, double w) const {
    return {discretize_mode(0, h), discretize_mode(1, u), discretize_mode(2, v), discretize_mode(3, w)};
}

std::array<std::size_t, 4> Discretizer::effective_bins() const {
    return {modes_[0].edges.effective_bins(), modes_[1].edges.effective_bins(),
            modes_[2].edges.effective_bins(), modes_[3].edges.effective_bins()};
}

bool Discretizer::collapsed() const {
    for (const Mode& m : modes_)
        if (m.edges.collapsed()) return true;
    return false;
}

nlohmann::ordered_json Discretizer::to_json() const {
    nlohmann::ordered_json j;
    j["bins"] = bins_;
    for (std::size_t m = 0; m < 4; ++m) {
        nlohmann::ordered_json jm;
        jm["standardizer"] = modes_[m].standardizer.to_json();
        jm["edges"] = modes_[m].edges.to_json();
        j["modes"][kModeNames[m]] = std::move(jm);
    }
    j["target"] = target_.to_json();
    return j;
}

Discretizer Discretizer::from_json(const nlohmann::json& j) {
    Discretizer d;
    d.bins_ = j.at("bins").get<std::array<std::size_t, 4>>();
    for (std::size_t m = 0; m < 4; ++m) {
        const nlohmann::json& jm = j.at("modes").at(kModeNames[m]);
        d.modes_[m].standardizer = Standardizer::from_json(jm.at("standardizer"));
        d.modes_[m].edges = BinEdges::from_json(jm.at("edges"));
    }
    d.target_ = TargetTransform::from_json(j.at("target"));
    return d;
}

}  // namespace windri
