#include "windri/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "windri/models.hpp"
#include "windri/rng.hpp"

namespace windri::synth {

namespace {

constexpr std::size_t kDenseSampleLimit = 1u << 22;

std::size_t cell_count(const std::array<std::size_t, 4>& sizes) {
    std::size_t n = 1;
    for (std::size_t s : sizes) n *= s;
    return n;
}

Index4 decode(std::size_t linear, const std::array<std::size_t, 4>& sizes) {
    Index4 idx{};
    for (std::size_t m = 4; m-- > 0;) {
        idx[m] = linear % sizes[m];
        linear /= sizes[m];
    }
    return idx;
}

}  // namespace

double GroundTruth::value(const Index4& idx) const {
    std::array<std::vector<double>, 4> rows;
    for (std::size_t m = 0; m < 4; ++m) {
        const std::size_t r = ranks[m];
        rows[m].assign(factors[m].begin() + static_cast<std::ptrdiff_t>(idx[m] * r),
                       factors[m].begin() + static_cast<std::ptrdiff_t>((idx[m] + 1) * r));
    }
    const double score = models::tucker_reference(core, ranks, rows[0], rows[1], rows[2], rows[3]);
    return 1.0 / (1.0 + std::exp(-score));
}

nlohmann::ordered_json GroundTruth::to_json() const {
    nlohmann::ordered_json j;
    j["mode_sizes"] = mode_sizes;
    j["ranks"] = ranks;
    j["core"] = core;
    j["factors"] = {{"h", factors[0]}, {"u", factors[1]}, {"v", factors[2]}, {"w", factors[3]}};
    return j;
}

GroundTruth GroundTruth::from_json(const nlohmann::json& j) {
    GroundTruth g;
    g.mode_sizes = j.at("mode_sizes").get<std::array<std::size_t, 4>>();
    g.ranks = j.at("ranks").get<std::array<std::size_t, 4>>();
    g.core = j.at("core").get<std::vector<double>>();
    static constexpr std::array<const char*, 4> names = {"h", "u", "v", "w"};
    for (std::size_t m = 0; m < 4; ++m)
        g.factors[m] = j.at("factors").at(names[m]).get<std::vector<double>>();
    return g;
}

SynthData generate(const SynthSpec& spec) {
    for (std::size_t m = 0; m < 4; ++m) {
        if (spec.mode_sizes[m] == 0 || spec.ranks[m] == 0)
            throw std::invalid_argument("synth: mode sizes and ranks must be positive");
        if (spec.ranks[m] > spec.mode_sizes[m])
            throw std::invalid_argument("synth: rank exceeds mode size on mode " + std::to_string(m));
    }
    const std::size_t cells = cell_count(spec.mode_sizes);
    if (spec.samples == 0) throw std::invalid_argument("synth: sample count must be positive");
    if (spec.samples > cells)
        throw std::invalid_argument("synth: sample count " + std::to_string(spec.samples) +
                                    " exceeds cell count " + std::to_string(cells));

    rng::Engine rng(spec.seed);
    SynthData out;
    out.truth.mode_sizes = spec.mode_sizes;
    out.truth.ranks = spec.ranks;

    std::size_t core_len = 1;
    for (std::size_t r : spec.ranks) core_len *= r;
    out.truth.core.resize(core_len);
    for (double& g : out.truth.core) g = rng::uniform(rng, -1.0, 1.0);
    for (std::size_t m = 0; m < 4; ++m) {
        out.truth.factors[m].resize(spec.mode_sizes[m] * spec.ranks[m]);
        for (double& f : out.truth.factors[m]) f = rng::uniform(rng, -1.0, 1.0);
    }

    // Distinct cells, uniform over the tensor.
    std::vector<std::size_t> picked;
    picked.reserve(spec.samples);
    if (cells <= kDenseSampleLimit) {
        std::vector<std::size_t> all(cells);
        for (std::size_t i = 0; i < cells; ++i) all[i] = i;
        for (std::size_t i = 0; i < spec.samples; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng::below(rng, cells - i));
            std::swap(all[i], all[j]);
            picked.push_back(all[i]);
        }
    } else {
        std::unordered_set<std::size_t> seen;
        while (picked.size() < spec.samples) {
            const std::size_t linear = static_cast<std::size_t>(rng::below(rng, cells));
            if (seen.insert(linear).second) picked.push_back(linear);
        }
    }

    out.tensor.mode_sizes = spec.mode_sizes;
    out.tensor.entries.reserve(spec.samples);
    for (const std::size_t linear : picked) {
        SparseTensor4::Entry e;
        e.idx = decode(linear, spec.mode_sizes);
        double y = out.truth.value(e.idx);
        if (spec.noise_std > 0.0) y += spec.noise_std * rng::gaussian(rng);
        e.value = std::clamp(y, 0.0, 1.0);
        out.tensor.entries.push_back(e);
    }
    return out;
}

Dataset to_dataset(const SparseTensor4& tensor) {
    Dataset ds;
    ds.provenance.push_back("synthetic");
    ds.records.reserve(tensor.entries.size());
    for (const auto& e : tensor.entries) {
        WindObservation obs;
        obs.station_id = "synthetic";
        obs.timestamp = 0.0;
        obs.h = static_cast<double>(e.idx[0]);
        obs.u = static_cast<double>(e.idx[1]);
        obs.v = static_cast<double>(e.idx[2]);
        obs.w = static_cast<double>(e.idx[3]);
        obs.ri = e.value;
        ds.records.push_back(std::move(obs));
    }
    return ds;
}

}  // namespace windri::synth
