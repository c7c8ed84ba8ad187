#include "lutbnn/compiled.hpp"

#include <algorithm>

namespace lutbnn {

namespace {

std::int32_t masked_sum(const std::int16_t* mask, const std::int16_t* lanes, std::size_t n) {
    std::int32_t acc = 0;
    for (std::size_t i = 0; i < n; ++i) acc += static_cast<std::int32_t>(mask[i]) * lanes[i];
    return acc;
}

std::uint8_t bin(std::int64_t sum, const ActivationThresholds& th) {
    return static_cast<std::uint8_t>((sum >= th.t1) + (sum >= th.t2) + (sum >= th.t3));
}

}  // namespace

CompiledNetwork::CompiledNetwork(const Genome& genome)
    : input_len_(genome.shape().input_len()), max_width_(input_len_) {
    const NetworkShape& shape = genome.shape();
    for (std::size_t l = 0; l < shape.layer_count(); ++l) {
        Layer layer;
        layer.fan_in = shape.layer_inputs(l);
        layer.fan_out = shape.layer_outputs(l);
        layer.first = l == 0;
        layer.masks.assign(layer.fan_out * 3 * layer.fan_in, 0);
        for (std::size_t d = 0; d < layer.fan_out; ++d) {
            const auto row = genome.row(l, d);
            std::int64_t nonzero = 0;
            std::int16_t* mask = layer.masks.data() + d * 3 * layer.fan_in;
            for (std::size_t s = 0; s < row.size(); ++s) {
                if (row[s].blocked()) continue;
                ++nonzero;
                mask[(row[s].value() - 1) * layer.fan_in + s] = 1;
            }
            layer.thresholds.push_back(thresholds_for(nonzero, layer.first ? kMaxInput : 3));
            layer.silent.push_back(nonzero == 0);
        }
        max_width_ = std::max(max_width_, layer.fan_out);
        layers_.push_back(std::move(layer));
    }
}

void CompiledNetwork::evaluate(std::span<const std::uint8_t> input, std::span<std::uint8_t> out) const {
    if (input.size() != input_len_ || out.size() != output_len())
        throw std::invalid_argument("CompiledNetwork: size mismatch");

    std::vector<std::int16_t> lanes(3 * max_width_);
    std::vector<std::uint8_t> values(input.begin(), input.end());
    std::vector<std::uint8_t> next(max_width_);
    for (const Layer& layer : layers_) {
        const std::size_t n = layer.fan_in;
        for (std::size_t s = 0; s < n; ++s) {
            const int x = values[s];
            if (layer.first) {
                lanes[s] = static_cast<std::int16_t>(x);
                lanes[n + s] = static_cast<std::int16_t>(std::min(x << kIncrShift, kMaxInput));
                lanes[2 * n + s] = static_cast<std::int16_t>(kMaxInput - x);
            } else {
                lanes[s] = kCamTable[1][x];
                lanes[n + s] = kCamTable[2][x];
                lanes[2 * n + s] = kCamTable[3][x];
            }
        }
        for (std::size_t d = 0; d < layer.fan_out; ++d) {
            if (layer.silent[d]) {
                next[d] = 0;
                continue;
            }
            const std::int32_t sum = masked_sum(layer.masks.data() + d * 3 * n, lanes.data(), 3 * n);
            next[d] = bin(sum, layer.thresholds[d]);
        }
        values.assign(next.begin(), next.begin() + static_cast<std::ptrdiff_t>(layer.fan_out));
    }
    std::copy(values.begin(), values.end(), out.begin());
}

std::vector<NeuronValue> CompiledNetwork::evaluate(std::span<const InputSample> input) const {
    std::vector<std::uint8_t> raw(input.size());
    std::transform(input.begin(), input.end(), raw.begin(), [](InputSample x) { return x.value(); });
    std::vector<std::uint8_t> out(output_len());
    evaluate(raw, out);
    std::vector<NeuronValue> result;
    result.reserve(out.size());
    for (auto v : out) result.emplace_back(v);
    return result;
}

}  // namespace lutbnn
