#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "windri/data_model.hpp"

namespace windri::synth {

// Generator settings for a ground-truth Tucker tensor sampled at sparse cells.
struct SynthSpec {
    std::array<std::size_t, 4> mode_sizes{8, 8, 8, 8};
    std::array<std::size_t, 4> ranks{3, 3, 3, 3};
    double noise_std = 0.01;
    std::size_t samples = 2000;
    std::uint64_t seed = 42;
};

struct GroundTruth {
    std::array<std::size_t, 4> mode_sizes{};
    std::array<std::size_t, 4> ranks{};
    std::vector<double> core;                      // rank product, row-major
    std::array<std::vector<double>, 4> factors;    // mode_size x rank each

    // Noise-free cell value: sigmoid of the core-contracted factor rows.
    double value(const Index4& idx) const;

    nlohmann::ordered_json to_json() const;
    static GroundTruth from_json(const nlohmann::json& j);
};

struct SynthData {
    SparseTensor4 tensor;
    GroundTruth truth;
};

// Draws a random core and factor matrices, samples distinct index tuples
// uniformly, and emits sigmoid(tucker value) + Gaussian noise clipped to
// [0,1]. Bitwise deterministic for a given seed.
SynthData generate(const SynthSpec& spec);

// Renders the tensor through the standard CSV schema with an identity
// discretizer: h,u,v,w carry the integer indices, ri the cell value.
Dataset to_dataset(const SparseTensor4& tensor);

}  // namespace windri::synth
