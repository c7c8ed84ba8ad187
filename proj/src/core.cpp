#include "lutbnn/core.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <numeric>

namespace lutbnn {

NetworkShape::NetworkShape(std::size_t input_len, std::vector<std::size_t> hidden, std::size_t output_len)
    : input_len_(input_len), hidden_(std::move(hidden)), output_len_(output_len) {
    if (input_len_ < 1) throw std::invalid_argument("shape: input_len must be >= 1");
    if (output_len_ < 1) throw std::invalid_argument("shape: output_len must be >= 1");
    for (std::size_t w : hidden_) {
        if (!std::has_single_bit(w))
            throw std::invalid_argument("shape: hidden width " + std::to_string(w) + " is not a power of two");
    }
    for (std::size_t l = 0; l < layer_count(); ++l) total_ += layer_inputs(l) * layer_outputs(l);
}

std::size_t NetworkShape::layer_inputs(std::size_t layer) const {
    if (layer >= layer_count()) throw std::out_of_range("shape: layer index");
    return layer == 0 ? input_len_ : hidden_[layer - 1];
}

std::size_t NetworkShape::layer_outputs(std::size_t layer) const {
    if (layer >= layer_count()) throw std::out_of_range("shape: layer index");
    return layer == hidden_.size() ? output_len_ : hidden_[layer];
}

std::size_t NetworkShape::layer_offset(std::size_t layer) const {
    std::size_t offset = 0;
    for (std::size_t l = 0; l < layer; ++l) offset += layer_inputs(l) * layer_outputs(l);
    return offset;
}

std::string NetworkShape::to_string() const {
    std::string out = std::to_string(input_len_);
    for (std::size_t w : hidden_) out += "-" + std::to_string(w);
    out += "-" + std::to_string(output_len_);
    return out;
}

NetworkShape NetworkShape::parse(std::string_view text) {
    std::vector<std::size_t> widths;
    while (!text.empty()) {
        const auto dash = text.find('-');
        const auto token = text.substr(0, dash);
        std::size_t value = 0;
        auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
        if (ec != std::errc{} || ptr != token.data() + token.size() || token.empty())
            throw std::invalid_argument("shape: cannot parse '" + std::string(token) + "'");
        widths.push_back(value);
        if (dash == std::string_view::npos) break;
        text.remove_prefix(dash + 1);
    }
    if (widths.size() < 2) throw std::invalid_argument("shape: need at least input and output widths");
    std::vector<std::size_t> hidden(widths.begin() + 1, widths.end() - 1);
    return NetworkShape(widths.front(), std::move(hidden), widths.back());
}

Genome::Genome(NetworkShape shape) : shape_(std::move(shape)), weights_(shape_.total_weights()) {}

Genome::Genome(NetworkShape shape, std::vector<WeightCode> weights)
    : shape_(std::move(shape)), weights_(std::move(weights)) {
    if (weights_.size() != shape_.total_weights())
        throw std::invalid_argument("genome: expected " + std::to_string(shape_.total_weights()) +
                                    " weights, got " + std::to_string(weights_.size()));
}

WeightCode Genome::at(std::size_t layer, std::size_t dest, std::size_t src) const {
    return row(layer, dest)[src];
}

void Genome::set(std::size_t layer, std::size_t dest, std::size_t src, WeightCode w) {
    const std::size_t fan_in = shape_.layer_inputs(layer);
    if (dest >= shape_.layer_outputs(layer) || src >= fan_in) throw std::out_of_range("genome: weight index");
    weights_[shape_.layer_offset(layer) + dest * fan_in + src] = w;
}

std::span<const WeightCode> Genome::row(std::size_t layer, std::size_t dest) const {
    const std::size_t fan_in = shape_.layer_inputs(layer);
    if (dest >= shape_.layer_outputs(layer)) throw std::out_of_range("genome: neuron index");
    return std::span<const WeightCode>(weights_).subspan(shape_.layer_offset(layer) + dest * fan_in, fan_in);
}

std::string Genome::digits() const {
    std::string out(weights_.size(), '0');
    for (std::size_t i = 0; i < weights_.size(); ++i) out[i] = static_cast<char>('0' + weights_[i].value());
    return out;
}

Genome Genome::from_digits(NetworkShape shape, std::string_view digits) {
    std::vector<WeightCode> weights;
    weights.reserve(digits.size());
    for (char c : digits) {
        if (c < '0' || c > '3') throw std::invalid_argument(std::string("genome: invalid weight digit '") + c + "'");
        weights.emplace_back(c - '0');
    }
    return Genome(std::move(shape), std::move(weights));
}

std::string_view to_string(ClassLabel label) {
    switch (label) {
    case ClassLabel::Good: return "Good";
    case ClassLabel::Ugly: return "Ugly";
    case ClassLabel::Either: return "Either";
    }
    return "?";
}

int tree_depth(std::size_t n) noexcept {
    return n <= 1 ? 0 : static_cast<int>(std::bit_width(n - 1));
}

TreeSum tree_sum(std::span<const std::int64_t> values) {
    if (values.empty()) throw std::invalid_argument("tree_sum: empty operand list");
    std::vector<std::int64_t> level(values.begin(), values.end());
    int depth = 0;
    while (level.size() > 1) {
        std::vector<std::int64_t> next((level.size() + 1) / 2);
        for (std::size_t i = 0; i + 1 < level.size(); i += 2) next[i / 2] = level[i] + level[i + 1];
        if (level.size() % 2 == 1) next.back() = level.back();
        level = std::move(next);
        ++depth;
    }
    return {level.front(), depth};
}

ActivationThresholds thresholds_for(std::int64_t nonzero_count, std::int64_t input_max) {
    if (nonzero_count < 0 || input_max < 0) throw std::invalid_argument("thresholds_for: negative argument");
    const std::int64_t span = nonzero_count * input_max;
    auto ceil_div = [](std::int64_t num, std::int64_t den) { return (num + den - 1) / den; };
    return {ceil_div(span, 4), ceil_div(span, 2), ceil_div(3 * span, 4)};
}

NeuronValue activate(std::int64_t sum, const ActivationThresholds& th) {
    if (sum >= th.t3) return NeuronValue(3);
    if (sum >= th.t2) return NeuronValue(2);
    if (sum >= th.t1) return NeuronValue(1);
    return NeuronValue(0);
}

NeuronValue activate_neuron(std::int64_t sum, std::int64_t nonzero, const ActivationThresholds& th) {
    return nonzero == 0 ? NeuronValue(0) : activate(sum, th);
}

std::vector<NeuronValue> forward(const Genome& genome, std::span<const InputSample> input,
                                 std::vector<LayerTrace>* trace) {
    const NetworkShape& shape = genome.shape();
    if (input.size() != shape.input_len())
        throw std::invalid_argument("forward: expected " + std::to_string(shape.input_len()) + " inputs, got " +
                                    std::to_string(input.size()));
    if (trace) trace->clear();

    std::vector<NeuronValue> values;
    std::vector<std::int64_t> terms;
    for (std::size_t layer = 0; layer < shape.layer_count(); ++layer) {
        const std::size_t fan_out = shape.layer_outputs(layer);
        const std::int64_t input_max = layer == 0 ? kMaxInput : 3;
        LayerTrace lt;
        std::vector<NeuronValue> next(fan_out);
        for (std::size_t d = 0; d < fan_out; ++d) {
            const auto weights = genome.row(layer, d);
            terms.clear();
            std::int64_t nonzero = 0;
            for (std::size_t s = 0; s < weights.size(); ++s) {
                if (weights[s].blocked()) {
                    terms.push_back(0);
                    continue;
                }
                ++nonzero;
                terms.push_back(layer == 0 ? first_layer_op(weights[s], input[s])
                                           : cam_multiply(weights[s], values[s]).value());
            }
            const std::int64_t sum = tree_sum(terms).sum;
            const ActivationThresholds th = thresholds_for(nonzero, input_max);
            next[d] = activate_neuron(sum, nonzero, th);
            if (trace) {
                lt.sums.push_back(sum);
                lt.thresholds.push_back(th);
            }
        }
        values = std::move(next);
        if (trace) {
            lt.values = values;
            trace->push_back(std::move(lt));
        }
    }
    return values;
}

std::vector<InputSample> quantize_frame(std::span<const RawSample> raw) {
    std::vector<InputSample> out;
    out.reserve(raw.size());
    for (RawSample r : raw) out.push_back(quantize_12_to_7(r));
    return out;
}

ClassLabel classify(std::span<const NeuronValue> output) {
    if (output.size() != 2)
        throw std::invalid_argument("classify: expected 2 output neurons, got " + std::to_string(output.size()));
    const bool good = output[0].on();
    const bool ugly = output[1].on();
    if (good && !ugly) return ClassLabel::Good;
    if (ugly && !good) return ClassLabel::Ugly;
    return ClassLabel::Either;
}

std::size_t nonzero_weight_count(const Genome& genome) {
    const auto w = genome.weights();
    return static_cast<std::size_t>(std::count_if(w.begin(), w.end(), [](WeightCode c) { return !c.blocked(); }));
}

std::size_t nonzero_fan_in(const Genome& genome, std::size_t layer, std::size_t dest) {
    const auto w = genome.row(layer, dest);
    return static_cast<std::size_t>(std::count_if(w.begin(), w.end(), [](WeightCode c) { return !c.blocked(); }));
}

}  // namespace lutbnn
