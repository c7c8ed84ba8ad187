#pragma once
/**
 * @file core.hpp
 * @brief 2-bit LUT network: value types and bit-exact reference inference.
 *
 * Every operation here maps onto a LUT, an adder, or a comparator. Hidden
 * neurons and weights are 2-bit; the first layer consumes 7-bit samples and
 * applies one of four fixed integer operations selected by its weight code.
 */

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lutbnn {

/// 2-bit weight symbol. Code 0 blocks the connection in every layer.
class WeightCode {
public:
    constexpr WeightCode() = default;
    constexpr explicit WeightCode(int code) : code_(checked(code)) {}

    constexpr std::uint8_t value() const noexcept { return code_; }
    constexpr bool blocked() const noexcept { return code_ == 0; }

    friend constexpr bool operator==(WeightCode, WeightCode) = default;

    static constexpr WeightCode block() { return WeightCode(0); }
    static constexpr WeightCode pass() { return WeightCode(1); }
    static constexpr WeightCode incr() { return WeightCode(2); }
    static constexpr WeightCode neg() { return WeightCode(3); }

private:
    static constexpr std::uint8_t checked(int code) {
        if (code < 0 || code > 3) throw std::out_of_range("weight code must be in 0..3");
        return static_cast<std::uint8_t>(code);
    }
    std::uint8_t code_ = 0;
};

/// 2-bit neuron activation value.
class NeuronValue {
public:
    constexpr NeuronValue() = default;
    constexpr explicit NeuronValue(int v) : value_(checked(v)) {}

    constexpr std::uint8_t value() const noexcept { return value_; }
    /// One-hot convention: 2 and 3 are "on".
    constexpr bool on() const noexcept { return value_ >= 2; }

    friend constexpr bool operator==(NeuronValue, NeuronValue) = default;

private:
    static constexpr std::uint8_t checked(int v) {
        if (v < 0 || v > 3) throw std::out_of_range("neuron value must be in 0..3");
        return static_cast<std::uint8_t>(v);
    }
    std::uint8_t value_ = 0;
};

inline constexpr int kMaxInput = 127;
inline constexpr int kMaxRaw = 4095;
inline constexpr int kInputBits = 7;
inline constexpr int kNeuronBits = 2;

/// Quantized 7-bit first-layer input.
class InputSample {
public:
    constexpr InputSample() = default;
    constexpr explicit InputSample(int v) : value_(checked(v)) {}
    constexpr std::uint8_t value() const noexcept { return value_; }
    friend constexpr bool operator==(InputSample, InputSample) = default;

private:
    static constexpr std::uint8_t checked(int v) {
        if (v < 0 || v > kMaxInput) throw std::out_of_range("input sample must be in 0..127");
        return static_cast<std::uint8_t>(v);
    }
    std::uint8_t value_ = 0;
};

/// 12-bit ADC sample.
class RawSample {
public:
    constexpr RawSample() = default;
    constexpr explicit RawSample(int v) : value_(checked(v)) {}
    constexpr std::uint16_t value() const noexcept { return value_; }
    friend constexpr bool operator==(RawSample, RawSample) = default;

private:
    static constexpr std::uint16_t checked(int v) {
        if (v < 0 || v > kMaxRaw) throw std::out_of_range("raw sample must be in 0..4095");
        return static_cast<std::uint16_t>(v);
    }
    std::uint16_t value_ = 0;
};

/// Layer widths. Hidden widths must be powers of two.
class NetworkShape {
public:
    NetworkShape(std::size_t input_len, std::vector<std::size_t> hidden, std::size_t output_len);

    std::size_t input_len() const noexcept { return input_len_; }
    const std::vector<std::size_t>& hidden() const noexcept { return hidden_; }
    std::size_t output_len() const noexcept { return output_len_; }

    /// Number of weight layers (hidden.size() + 1).
    std::size_t layer_count() const noexcept { return hidden_.size() + 1; }
    /// Fan-in / fan-out of weight layer `layer`.
    std::size_t layer_inputs(std::size_t layer) const;
    std::size_t layer_outputs(std::size_t layer) const;
    /// Offset of the first weight of `layer` in the flat genome.
    std::size_t layer_offset(std::size_t layer) const;
    std::size_t total_weights() const noexcept { return total_; }

    /// "128-32-32-2"
    std::string to_string() const;
    static NetworkShape parse(std::string_view text);

    friend bool operator==(const NetworkShape&, const NetworkShape&) = default;

private:
    std::size_t input_len_;
    std::vector<std::size_t> hidden_;
    std::size_t output_len_;
    std::size_t total_ = 0;
};

/// Flat weight vector of a network. Layout (layout version 1): layer-major,
/// then destination neuron, then source neuron; weight (l, d, s) lives at
/// layer_offset(l) + d * layer_inputs(l) + s.
class Genome {
public:
    static constexpr int kLayoutVersion = 1;

    explicit Genome(NetworkShape shape);  // all-Block
    Genome(NetworkShape shape, std::vector<WeightCode> weights);

    const NetworkShape& shape() const noexcept { return shape_; }
    std::span<const WeightCode> weights() const noexcept { return weights_; }
    std::span<WeightCode> weights() noexcept { return weights_; }

    WeightCode at(std::size_t layer, std::size_t dest, std::size_t src) const;
    void set(std::size_t layer, std::size_t dest, std::size_t src, WeightCode w);
    /// Incoming weights of one destination neuron.
    std::span<const WeightCode> row(std::size_t layer, std::size_t dest) const;

    /// Weights as a string of digits '0'..'3'.
    std::string digits() const;
    static Genome from_digits(NetworkShape shape, std::string_view digits);

    friend bool operator==(const Genome&, const Genome&) = default;

private:
    NetworkShape shape_;
    std::vector<WeightCode> weights_;
};

struct ActivationThresholds {
    std::int64_t t1 = 0;
    std::int64_t t2 = 0;
    std::int64_t t3 = 0;
    friend bool operator==(const ActivationThresholds&, const ActivationThresholds&) = default;
};

enum class ClassLabel { Good, Ugly, Either };

std::string_view to_string(ClassLabel label);

/// Top 7 bits of a 12-bit sample.
constexpr InputSample quantize_12_to_7(RawSample raw) { return InputSample(raw.value() >> 5); }

/// 4x4 CAM multiplication table, indexed [weight][value].
inline constexpr std::array<std::array<std::uint8_t, 4>, 4> kCamTable{{
    {0, 0, 0, 0},
    {0, 1, 2, 3},
    {1, 2, 3, 3},
    {3, 2, 1, 0},
}};

constexpr NeuronValue cam_multiply(WeightCode w, NeuronValue x) {
    return NeuronValue(kCamTable[w.value()][x.value()]);
}

/// Incr doubles the sample.
inline constexpr int kIncrShift = 1;

/// Block / Pass / Incr / Neg on a 7-bit sample. Result stays in 0..127.
constexpr int first_layer_op(WeightCode w, InputSample x) {
    const int v = x.value();
    switch (w.value()) {
    case 0: return 0;
    case 1: return v;
    case 2: return (v << kIncrShift) < kMaxInput ? (v << kIncrShift) : kMaxInput;
    default: return kMaxInput & ~v;
    }
}

struct TreeSum {
    std::int64_t sum = 0;
    int depth = 0;
};

/// Balanced pairwise reduction. Throws on an empty list.
TreeSum tree_sum(std::span<const std::int64_t> values);

/// ceil(log2(n)) for n >= 1, 0 for n <= 1.
int tree_depth(std::size_t n) noexcept;

/// Quartiles of [0, nonzero_count * input_max], rounded up.
ActivationThresholds thresholds_for(std::int64_t nonzero_count, std::int64_t input_max);

/// Lower-inclusive four-bin activation.
NeuronValue activate(std::int64_t sum, const ActivationThresholds& th);

/// Activation of a neuron with `nonzero` live inputs; fully pruned neurons are silent.
NeuronValue activate_neuron(std::int64_t sum, std::int64_t nonzero, const ActivationThresholds& th);

struct LayerTrace {
    std::vector<std::int64_t> sums;
    std::vector<ActivationThresholds> thresholds;
    std::vector<NeuronValue> values;
    friend bool operator==(const LayerTrace&, const LayerTrace&) = default;
};

/// Reference forward pass. Fills `trace` (one entry per weight layer) when given.
std::vector<NeuronValue> forward(const Genome& genome, std::span<const InputSample> input,
                                 std::vector<LayerTrace>* trace = nullptr);

std::vector<InputSample> quantize_frame(std::span<const RawSample> raw);

/// Index 0 = Good, index 1 = Ugly.
ClassLabel classify(std::span<const NeuronValue> output);

std::size_t nonzero_weight_count(const Genome& genome);
std::size_t nonzero_fan_in(const Genome& genome, std::size_t layer, std::size_t dest);

}  // namespace lutbnn
