#include "windri/models.hpp"

#include <cmath>
#include <stdexcept>

#include "windri/rng.hpp"

namespace windri::models {

namespace {

constexpr double kInitRange = 0.1;
constexpr std::array<std::pair<std::size_t, std::size_t>, 6> kPairs = {
    std::pair{0, 1}, std::pair{0, 2}, std::pair{0, 3},
    std::pair{1, 2}, std::pair{1, 3}, std::pair{2, 3}};
constexpr std::array<std::array<std::size_t, 3>, 4> kTriples = {
    std::array<std::size_t, 3>{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};

void check_config(const ModelConfig& c, bool uniform_embed) {
    for (std::size_t m = 0; m < 4; ++m) {
        if (c.mode_sizes[m] == 0) throw std::invalid_argument("model config: mode size must be positive");
        if (c.embed_dims[m] == 0) throw std::invalid_argument("model config: embedding dim must be positive");
    }
    if (uniform_embed) {
        for (std::size_t m = 1; m < 4; ++m)
            if (c.embed_dims[m] != c.embed_dims[0])
                throw std::invalid_argument("model config: baselines need one embedding dim across modes");
    }
}

}  // namespace

nlohmann::ordered_json ModelConfig::to_json() const {
    return {{"mode_sizes", mode_sizes},
            {"embed_dims", embed_dims},
            {"hidden_dims", hidden_dims},
            {"pair_width", pair_width}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
    ModelConfig c;
    c.mode_sizes = j.at("mode_sizes").get<std::array<std::size_t, 4>>();
    c.embed_dims = j.at("embed_dims").get<std::array<std::size_t, 4>>();
    c.hidden_dims = j.at("hidden_dims").get<std::vector<std::size_t>>();
    c.pair_width = j.at("pair_width").get<std::size_t>();
    return c;
}

ad::NodeId GraphContext::bind(std::size_t param_index) {
    for (const auto& [idx, id] : bindings_)
        if (idx == param_index) return id;
    Param& p = model_.param(param_index);
    const ad::NodeId id = tape_.leaf(p.shape, p.value);
    bindings_.emplace_back(param_index, id);
    return id;
}

std::size_t Model::add_param(std::string name, ad::Shape shape) {
    Param p;
    p.name = std::move(name);
    p.shape = std::move(shape);
    p.value.assign(ad::shape_size(p.shape), 0.0);
    params_.push_back(std::move(p));
    return params_.size() - 1;
}

void Model::init_params(std::uint64_t seed) {
    rng::Engine rng(seed);
    for (Param& p : params_)
        for (double& v : p.value) v = rng::uniform(rng, -kInitRange, kInitRange);
}

std::size_t Model::total_parameters() const {
    std::size_t n = 0;
    for (const Param& p : params_) n += p.size();
    return n;
}

double Model::predict_one(const Index4& idx) {
    ad::Tape tape;
    GraphContext g(tape, *this);
    const ad::NodeId out = forward(g, idx);
    return tape.scalar_value(out);
}

nlohmann::ordered_json Model::to_json() const {
    nlohmann::ordered_json j;
    j["model"] = std::string(tag());
    j["config"] = config_.to_json();
    nlohmann::ordered_json params = nlohmann::ordered_json::array();
    for (const Param& p : params_)
        params.push_back({{"name", p.name}, {"shape", p.shape}, {"values", p.value}});
    j["params"] = std::move(params);
    return j;
}

namespace {

// Shared layout: one embedding table per mode, registered first.
class EmbeddingModel : public Model {
protected:
    explicit EmbeddingModel(ModelConfig config) : Model(std::move(config)) {
        static constexpr std::array<const char*, 4> names = {"emb_h", "emb_u", "emb_v", "emb_w"};
        for (std::size_t m = 0; m < 4; ++m)
            emb_[m] = add_param(names[m], {config_.mode_sizes[m], config_.embed_dims[m]});
    }

    std::array<ad::NodeId, 4> lookup(GraphContext& g, const Index4& idx) {
        std::array<ad::NodeId, 4> e{};
        for (std::size_t m = 0; m < 4; ++m) e[m] = g.tape().row_select(g.bind(emb_[m]), idx[m]);
        return e;
    }

    std::array<std::size_t, 4> emb_{};
};

class TuckerModel final : public EmbeddingModel {
public:
    TuckerModel(ModelConfig config, std::uint64_t seed) : EmbeddingModel(std::move(config)) {
        check_config(config_, /*uniform_embed=*/false);
        std::size_t core_len = 1;
        for (std::size_t q : config_.embed_dims) core_len *= q;
        core_ = add_param("core", {core_len});
        bias_ = add_param("bias", {});
        init_params(seed);
    }

    std::string_view tag() const override { return "m1"; }
    bool bounded_output() const override { return true; }

    ad::NodeId forward(GraphContext& g, const Index4& idx) override {
        const auto e = lookup(g, idx);
        ad::Tape& t = g.tape();
        const ad::NodeId interactions = t.outer({e[0], e[1], e[2], e[3]});
        const ad::NodeId score = t.dot(t.flatten(interactions), g.bind(core_));
        return t.sigmoid(t.add(score, g.bind(bias_)));
    }

    std::size_t core_index() const { return core_; }
    std::size_t bias_index() const { return bias_; }

private:
    std::size_t core_ = 0;
    std::size_t bias_ = 0;
};

// m3: affine map of the concatenated embeddings, no nonlinearity.
class LinearModel final : public EmbeddingModel {
public:
    LinearModel(ModelConfig config, std::uint64_t seed) : EmbeddingModel(std::move(config)) {
        check_config(config_, /*uniform_embed=*/true);
        const std::size_t in = 4 * config_.embed_dims[0];
        w_out_ = add_param("out_w", {1, in});
        b_out_ = add_param("out_b", {1});
        init_params(seed);
    }

    std::string_view tag() const override { return "m3"; }
    bool bounded_output() const override { return false; }

    ad::NodeId forward(GraphContext& g, const Index4& idx) override {
        const auto e = lookup(g, idx);
        ad::Tape& t = g.tape();
        const ad::NodeId x = t.concat({e[0], e[1], e[2], e[3]});
        return t.add(t.matvec(g.bind(w_out_), x), g.bind(b_out_));
    }

private:
    std::size_t w_out_ = 0;
    std::size_t b_out_ = 0;
};

// m2: concatenated embeddings through an affine+relu stack, linear head.
class MlpModel final : public EmbeddingModel {
public:
    MlpModel(ModelConfig config, std::uint64_t seed) : EmbeddingModel(std::move(config)) {
        check_config(config_, /*uniform_embed=*/true);
        if (config_.hidden_dims.empty())
            throw std::invalid_argument("model config: m2 needs at least one hidden layer");
        std::size_t prev = 4 * config_.embed_dims[0];
        for (std::size_t l = 0; l < config_.hidden_dims.size(); ++l) {
            const std::size_t width = config_.hidden_dims[l];
            if (width == 0) throw std::invalid_argument("model config: hidden width must be positive");
            hidden_w_.push_back(add_param("hidden" + std::to_string(l) + "_w", {width, prev}));
            hidden_b_.push_back(add_param("hidden" + std::to_string(l) + "_b", {width}));
            prev = width;
        }
        w_out_ = add_param("out_w", {1, prev});
        b_out_ = add_param("out_b", {1});
        init_params(seed);
    }

    std::string_view tag() const override { return "m2"; }
    bool bounded_output() const override { return false; }

    ad::NodeId forward(GraphContext& g, const Index4& idx) override {
        const auto e = lookup(g, idx);
        ad::Tape& t = g.tape();
        ad::NodeId x = t.concat({e[0], e[1], e[2], e[3]});
        for (std::size_t l = 0; l < hidden_w_.size(); ++l)
            x = t.relu(t.add(t.matvec(g.bind(hidden_w_[l]), x), g.bind(hidden_b_[l])));
        return t.add(t.matvec(g.bind(w_out_), x), g.bind(b_out_));
    }

private:
    std::vector<std::size_t> hidden_w_, hidden_b_;
    std::size_t w_out_ = 0;
    std::size_t b_out_ = 0;
};

// m4: the six pairwise elementwise products, each through its own affine
// layer, concatenated with the raw embeddings; linear head.
class PairwiseModel final : public EmbeddingModel {
public:
    PairwiseModel(ModelConfig config, std::uint64_t seed) : EmbeddingModel(std::move(config)) {
        check_config(config_, /*uniform_embed=*/true);
        if (config_.pair_width == 0) throw std::invalid_argument("model config: pair width must be positive");
        const std::size_t dim = config_.embed_dims[0];
        for (std::size_t p = 0; p < kPairs.size(); ++p) {
            pair_w_.push_back(add_param("pair" + std::to_string(p) + "_w", {config_.pair_width, dim}));
            pair_b_.push_back(add_param("pair" + std::to_string(p) + "_b", {config_.pair_width}));
        }
        const std::size_t in = 4 * dim + kPairs.size() * config_.pair_width;
        w_out_ = add_param("out_w", {1, in});
        b_out_ = add_param("out_b", {1});
        init_params(seed);
    }

    std::string_view tag() const override { return "m4"; }
    bool bounded_output() const override { return false; }

    ad::NodeId forward(GraphContext& g, const Index4& idx) override {
        const auto e = lookup(g, idx);
        ad::Tape& t = g.tape();
        std::vector<ad::NodeId> features(e.begin(), e.end());
        for (std::size_t p = 0; p < kPairs.size(); ++p) {
            const ad::NodeId prod = t.mul(e[kPairs[p].first], e[kPairs[p].second]);
            features.push_back(t.add(t.matvec(g.bind(pair_w_[p]), prod), g.bind(pair_b_[p])));
        }
        return t.add(t.matvec(g.bind(w_out_), t.concat(features)), g.bind(b_out_));
    }

private:
    std::vector<std::size_t> pair_w_, pair_b_;
    std::size_t w_out_ = 0;
    std::size_t b_out_ = 0;
};

// m5: explicit pairwise and triple-wise products fused with an mlp branch,
// sigmoid head.
class FfnModel final : public EmbeddingModel {
public:
    FfnModel(ModelConfig config, std::uint64_t seed) : EmbeddingModel(std::move(config)) {
        check_config(config_, /*uniform_embed=*/true);
        if (config_.hidden_dims.empty())
            throw std::invalid_argument("model config: m5 needs at least one hidden layer");
        const std::size_t dim = config_.embed_dims[0];
        std::size_t prev = 4 * dim;
        for (std::size_t l = 0; l < config_.hidden_dims.size(); ++l) {
            const std::size_t width = config_.hidden_dims[l];
            if (width == 0) throw std::invalid_argument("model config: hidden width must be positive");
            hidden_w_.push_back(add_param("hidden" + std::to_string(l) + "_w", {width, prev}));
            hidden_b_.push_back(add_param("hidden" + std::to_string(l) + "_b", {width}));
            prev = width;
        }
        const std::size_t in = (kPairs.size() + kTriples.size()) * dim + prev;
        w_out_ = add_param("out_w", {1, in});
        b_out_ = add_param("out_b", {1});
        init_params(seed);
    }

    std::string_view tag() const override { return "m5"; }
    bool bounded_output() const override { return true; }

    ad::NodeId forward(GraphContext& g, const Index4& idx) override {
        const auto e = lookup(g, idx);
        ad::Tape& t = g.tape();
        std::vector<ad::NodeId> features;
        for (const auto& [i, j] : kPairs) features.push_back(t.mul(e[i], e[j]));
        for (const auto& tr : kTriples) features.push_back(t.mul(t.mul(e[tr[0]], e[tr[1]]), e[tr[2]]));
        ad::NodeId x = t.concat({e[0], e[1], e[2], e[3]});
        for (std::size_t l = 0; l < hidden_w_.size(); ++l)
            x = t.relu(t.add(t.matvec(g.bind(hidden_w_[l]), x), g.bind(hidden_b_[l])));
        features.push_back(x);
        const ad::NodeId out = t.add(t.matvec(g.bind(w_out_), t.concat(features)), g.bind(b_out_));
        return t.sigmoid(out);
    }

private:
    std::vector<std::size_t> hidden_w_, hidden_b_;
    std::size_t w_out_ = 0;
    std::size_t b_out_ = 0;
};

}  // namespace

std::unique_ptr<Model> make_model(std::string_view tag, const ModelConfig& config, std::uint64_t seed) {
    if (tag == "m1") return std::make_unique<TuckerModel>(config, seed);
    if (tag == "m2") return std::make_unique<MlpModel>(config, seed);
    if (tag == "m3") return std::make_unique<LinearModel>(config, seed);
    if (tag == "m4") return std::make_unique<PairwiseModel>(config, seed);
    if (tag == "m5") return std::make_unique<FfnModel>(config, seed);
    throw std::invalid_argument("make_model: unknown model tag '" + std::string(tag) + "'");
}

std::unique_ptr<Model> model_from_json(const nlohmann::json& j) {
    const std::string tag = j.at("model").get<std::string>();
    const ModelConfig config = ModelConfig::from_json(j.at("config"));
    std::unique_ptr<Model> m = make_model(tag, config, 0);
    const nlohmann::json& params = j.at("params");
    if (params.size() != m->param_count())
        throw std::runtime_error("model_from_json: parameter count mismatch");
    for (std::size_t i = 0; i < m->param_count(); ++i) {
        Param& p = m->param(i);
        const nlohmann::json& jp = params.at(i);
        if (jp.at("name").get<std::string>() != p.name)
            throw std::runtime_error("model_from_json: unexpected parameter '" +
                                     jp.at("name").get<std::string>() + "'");
        std::vector<double> values = jp.at("values").get<std::vector<double>>();
        if (values.size() != p.size()) throw std::runtime_error("model_from_json: size mismatch for " + p.name);
        p.value = std::move(values);
    }
    return m;
}

double tucker_reference(std::span<const double> core, const std::array<std::size_t, 4>& dims,
                        std::span<const double> a, std::span<const double> b,
                        std::span<const double> c, std::span<const double> d) {
    std::size_t expect = 1;
    for (std::size_t q : dims) expect *= q;
    if (core.size() != expect || a.size() != dims[0] || b.size() != dims[1] || c.size() != dims[2] ||
        d.size() != dims[3])
        throw std::invalid_argument("tucker_reference: core or factor size does not match dims");

    double acc = 0.0;
    for (std::size_t p = 0; p < dims[0]; ++p)
        for (std::size_t q = 0; q < dims[1]; ++q)
            for (std::size_t r = 0; r < dims[2]; ++r)
                for (std::size_t s = 0; s < dims[3]; ++s)
                    acc += core[((p * dims[1] + q) * dims[2] + r) * dims[3] + s] * a[p] * b[q] * c[r] * d[s];
    return acc;
}

double m1_presigmoid(Model& m1, const Index4& idx) {
    if (m1.tag() != "m1") throw std::invalid_argument("m1_presigmoid: not an m1 model");
    ad::Tape tape;
    GraphContext g(tape, m1);
    const ad::NodeId out = m1.forward(g, idx);
    // the activation input is the parent of the final sigmoid node
    return tape.value(tape.node(out).parents[0])[0];
}

TrainResult train(Model& model, const SparseTensor4& data, const Hyperparams& hp) {
    const std::size_t n = data.entries.size();
    if (n == 0) throw std::invalid_argument("train: tensor has no entries");
    if (hp.batch_size == 0) throw std::invalid_argument("train: batch size must be positive");
    if (model.bounded_output()) {
        for (const auto& e : data.entries)
            if (!(e.value >= 0.0 && e.value <= 1.0))
                throw std::invalid_argument("train: target " + format_double(e.value) +
                                            " outside [0,1] for a sigmoid-headed model");
    }

    // Adam state, one slot per parameter tensor.
    std::vector<std::vector<double>> m(model.param_count()), v(model.param_count());
    for (std::size_t i = 0; i < model.param_count(); ++i) {
        m[i].assign(model.param(i).size(), 0.0);
        v[i].assign(model.param(i).size(), 0.0);
    }
    std::size_t step = 0;

    rng::Engine shuffle_rng(hp.seed * 0x9E3779B97F4A7C15ULL + 1);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    TrainResult result;
    result.loss_trace.reserve(hp.epochs);
    for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
        rng::shuffle(order, shuffle_rng);
        double sse = 0.0;
        for (std::size_t start = 0; start < n; start += hp.batch_size) {
            const std::size_t stop = std::min(n, start + hp.batch_size);
            ad::Tape tape;
            GraphContext g(tape, model);
            std::vector<ad::NodeId> preds;
            std::vector<double> targets;
            preds.reserve(stop - start);
            targets.reserve(stop - start);
            for (std::size_t i = start; i < stop; ++i) {
                const auto& entry = data.entries[order[i]];
                preds.push_back(model.forward(g, entry.idx));
                targets.push_back(entry.value);
            }
            const ad::NodeId pred_vec = tape.concat(preds);
            const ad::NodeId target_vec = tape.leaf({targets.size()}, targets);
            const ad::NodeId loss = tape.mse_loss(pred_vec, target_vec);
            const double loss_value = tape.scalar_value(loss);
            if (!std::isfinite(loss_value))
                throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch) +
                                         ", batch " + std::to_string(start / hp.batch_size) +
                                         " (model " + std::string(model.tag()) + ")");
            tape.backward(loss);

            ++step;
            const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(step));
            for (const auto& [pi, node_id] : g.bindings()) {
                Param& p = model.param(pi);
                const std::vector<double>& grad = tape.grad(node_id);
                for (std::size_t k = 0; k < p.size(); ++k) {
                    m[pi][k] = hp.beta1 * m[pi][k] + (1.0 - hp.beta1) * grad[k];
                    v[pi][k] = hp.beta2 * v[pi][k] + (1.0 - hp.beta2) * grad[k] * grad[k];
                    const double mhat = m[pi][k] / bc1;
                    const double vhat = v[pi][k] / bc2;
                    p.value[k] -= hp.lr * mhat / (std::sqrt(vhat) + hp.eps);
                }
            }
            sse += loss_value * static_cast<double>(stop - start);
        }
        result.loss_trace.push_back(sse / static_cast<double>(n));
    }
    return result;
}

Predictions predict(Model& model, const SparseTensor4& data, const TargetTransform* transform) {
    Predictions out;
    out.raw.reserve(data.entries.size());
    out.original.reserve(data.entries.size());
    for (const auto& e : data.entries) {
        const double raw = model.predict_one(e.idx);
        out.raw.push_back(raw);
        out.original.push_back(transform ? transform->inverse(raw) : raw);
    }
    return out;
}

}  // namespace windri::models
