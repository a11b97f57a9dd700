#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "windri/autodiff.hpp"
#include "windri/data_model.hpp"

namespace windri::models {

struct Param {
    std::string name;
    ad::Shape shape;
    std::vector<double> value;

    std::size_t size() const { return value.size(); }
};

struct ModelConfig {
    std::array<std::size_t, 4> mode_sizes{};       // embedding rows per mode (h,u,v,w)
    std::array<std::size_t, 4> embed_dims{5, 5, 5, 5};
    std::vector<std::size_t> hidden_dims{5};       // m2/m5 hidden stack widths
    std::size_t pair_width = 5;                    // m4 per-pair projection width

    nlohmann::ordered_json to_json() const;
    static ModelConfig from_json(const nlohmann::json& j);
};

class Model;

// Per-batch graph state: each parameter is registered as one tape leaf the
// first time it is touched, so gradients from every sample in the batch
// accumulate into the same leaf.
class GraphContext {
public:
    explicit GraphContext(ad::Tape& tape, Model& model) : tape_(tape), model_(model) {}

    ad::NodeId bind(std::size_t param_index);
    ad::Tape& tape() { return tape_; }
    const std::vector<std::pair<std::size_t, ad::NodeId>>& bindings() const { return bindings_; }

private:
    ad::Tape& tape_;
    Model& model_;
    std::vector<std::pair<std::size_t, ad::NodeId>> bindings_;
};

class Model {
public:
    virtual ~Model() = default;
    Model(const Model&) = delete;
    Model& operator=(const Model&) = delete;

    virtual std::string_view tag() const = 0;
    // True for sigmoid output heads (m1, m5), whose targets must lie in [0,1].
    virtual bool bounded_output() const = 0;
    virtual ad::NodeId forward(GraphContext& g, const Index4& idx) = 0;

    const ModelConfig& config() const { return config_; }
    std::size_t param_count() const { return params_.size(); }
    Param& param(std::size_t i) { return params_[i]; }
    const Param& param(std::size_t i) const { return params_[i]; }
    std::size_t total_parameters() const;

    // Forward pass on a throwaway tape.
    double predict_one(const Index4& idx);

    nlohmann::ordered_json to_json() const;

protected:
    explicit Model(ModelConfig config) : config_(std::move(config)) {}
    std::size_t add_param(std::string name, ad::Shape shape);
    void init_params(std::uint64_t seed);

    ModelConfig config_;
    std::vector<Param> params_;
};

// tag is one of m1..m5; parameters are drawn uniformly from [-0.1, 0.1] with
// the given seed.
std::unique_ptr<Model> make_model(std::string_view tag, const ModelConfig& config, std::uint64_t seed);

std::unique_ptr<Model> model_from_json(const nlohmann::json& j);

// Naive element-wise Tucker reconstruction: the quadruple sum over the core
// with one factor weight per mode. Serves as the independent oracle for the
// m1 pre-sigmoid value with core = reshape of the flattened weight vector.
// Deliberately loop-based and free of the tape machinery.
double tucker_reference(std::span<const double> core, const std::array<std::size_t, 4>& dims,
                        std::span<const double> a, std::span<const double> b,
                        std::span<const double> c, std::span<const double> d);

// Pre-sigmoid value of an m1 model at idx (bias included), for oracle checks.
double m1_presigmoid(Model& m1, const Index4& idx);

struct Hyperparams {
    double lr = 1e-3;
    std::size_t epochs = 200;
    std::size_t batch_size = 32;
    std::uint64_t seed = 42;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct TrainResult {
    std::vector<double> loss_trace;  // per-epoch training MSE
};

// Minimizes MSE over shuffled mini-batches with Adam. Deterministic given the
// seed; a non-finite loss aborts with a diagnostic.
TrainResult train(Model& model, const SparseTensor4& data, const Hyperparams& hp);

struct Predictions {
    std::vector<double> raw;       // model output per entry
    std::vector<double> original;  // inverse-transformed, when a transform is given
};

Predictions predict(Model& model, const SparseTensor4& data, const TargetTransform* transform = nullptr);

}  // namespace windri::models
