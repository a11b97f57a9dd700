#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace windri {

// Zero-mean unit-variance scaling fitted on one feature column.
class Standardizer {
public:
    static Standardizer fit(std::span<const double> values);

    double mu() const { return mu_; }
    double sigma() const { return sigma_; }

    // (x - mu) / sigma; a constant feature (sigma == 0) maps to 0.
    double apply(double x) const { return sigma_ == 0.0 ? 0.0 : (x - mu_) / sigma_; }

    nlohmann::ordered_json to_json() const;
    static Standardizer from_json(const nlohmann::json& j);

private:
    double mu_ = 0.0;
    double sigma_ = 0.0;
};

// Equal-frequency bin boundaries: interior edges at quantiles k/K. Edges that
// tie with each other or fall at the sample minimum are collapsed, so the
// effective bin count can be smaller than the configured one; labels stay
// dense in [0, effective_bins).
class BinEdges {
public:
    static BinEdges fit(std::span<const double> values, std::size_t bins);

    std::size_t bin_count() const { return bin_count_; }
    std::size_t effective_bins() const { return edges_.size() + 1; }
    bool collapsed() const { return effective_bins() < bin_count_; }
    const std::vector<double>& edges() const { return edges_; }

    // 0 below the first edge, i on [edge_i, edge_{i+1}), top bin at or above
    // the last edge. Inputs outside the fitted range clamp to the extremes.
    std::size_t index_of(double x) const;

    nlohmann::ordered_json to_json() const;
    static BinEdges from_json(const nlohmann::json& j);

private:
    std::vector<double> edges_;
    std::size_t bin_count_ = 0;
};

// Linear-interpolation quantile of a sorted sample, p in [0, 1].
double quantile_sorted(std::span<const double> sorted_values, double p);

// Maps Richardson targets onto [0,1]: signed log, standardize, then min-max.
// The signed log sign(y)*ln(1+|y|) keeps negative targets (unstable
// stratification) in the domain; min-max puts targets in reach of a sigmoid
// output head.
class TargetTransform {
public:
    static TargetTransform fit(std::span<const double> targets);

    double forward(double y) const;
    double inverse(double s) const;

    bool degenerate() const { return max_z_ == min_z_; }
    double mu() const { return mu_; }
    double sigma() const { return sigma_; }
    double min_z() const { return min_z_; }
    double max_z() const { return max_z_; }

    static double signed_log(double y);
    static double signed_exp(double t);  // exact inverse of signed_log

    nlohmann::ordered_json to_json() const;
    static TargetTransform from_json(const nlohmann::json& j);

private:
    double mu_ = 0.0;
    double sigma_ = 0.0;
    double min_z_ = 0.0;
    double max_z_ = 0.0;
};

// Fitted per-mode preprocessing for the (h,u,v,w) feature vector plus the
// target transform, bundled so one artifact carries everything a later CLI
// invocation needs. Mode order is fixed as (h,u,v,w).
class Discretizer {
public:
    struct Mode {
        Standardizer standardizer;
        BinEdges edges;
    };

    static Discretizer fit(std::span<const double> h,
                           std::span<const double> u,
                           std::span<const double> v,
                           std::span<const double> w,
                           std::span<const double> targets,
                           const std::array<std::size_t, 4>& bins);

    std::array<std::size_t, 4> discretize(double h, double u, double v, double w) const;
    std::size_t discretize_mode(std::size_t mode, double x) const;

    const std::array<std::size_t, 4>& mode_sizes() const { return bins_; }
    std::array<std::size_t, 4> effective_bins() const;
    bool collapsed() const;
    const Mode& mode(std::size_t m) const { return modes_[m]; }
    const TargetTransform& target() const { return target_; }

    nlohmann::ordered_json to_json() const;
    static Discretizer from_json(const nlohmann::json& j);

    static constexpr std::array<const char*, 4> kModeNames = {"h", "u", "v", "w"};

private:
    std::array<Mode, 4> modes_;
    std::array<std::size_t, 4> bins_{};
    TargetTransform target_;
};

}  // namespace windri
