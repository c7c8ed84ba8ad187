#pragma once
// Fast evaluator used by training. Produces the same outputs as lutbnn::forward.

#include <cstdint>
#include <span>
#include <vector>

#include "lutbnn/core.hpp"

namespace lutbnn {

/// A genome lowered to per-neuron selection masks. Each layer expands its
/// inputs into [Pass(x) | Incr(x) | Neg(x)] and every neuron sums the lanes
/// selected by its weight codes, which is a dot product with a 0/1 mask.
class CompiledNetwork {
public:
    explicit CompiledNetwork(const Genome& genome);

    std::size_t input_len() const noexcept { return input_len_; }
    std::size_t output_len() const noexcept { return layers_.back().fan_out; }

    /// Writes output_len() raw neuron values (0..3) into `out`.
    void evaluate(std::span<const std::uint8_t> input, std::span<std::uint8_t> out) const;
    std::vector<NeuronValue> evaluate(std::span<const InputSample> input) const;

private:
    struct Layer {
        std::size_t fan_in = 0;
        std::size_t fan_out = 0;
        bool first = false;
        std::vector<std::int16_t> masks;  // fan_out x (3 * fan_in)
        std::vector<ActivationThresholds> thresholds;
        std::vector<std::uint8_t> silent;
    };
    std::size_t input_len_;
    std::size_t max_width_;
    std::vector<Layer> layers_;
};

}  // namespace lutbnn
