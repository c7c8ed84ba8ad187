#pragma once
/**
 * @file hdl.hpp
 * @brief Combinatorial VHDL emission and the netlist mirror that evaluates it.
 *
 * A genome is first lowered to a NetlistMirror: a DAG of first-layer
 * operation / CAM nodes, balanced two-input adders and threshold compares,
 * with blocked weights removed. The entity text is printed from that DAG, so
 * evaluating the mirror is evaluating the emitted design.
 */

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lutbnn/core.hpp"

namespace lutbnn {

inline constexpr std::string_view kEmitterVersion = "1.0";

enum class NodeKind : std::uint8_t {
    Input,      // 7-bit sample
    FirstOp,    // Block/Pass/Incr/Neg on an input
    Cam,        // 4x4 CAM lookup on a neuron value
    Add,        // two-input adder
    Threshold,  // 4-bin compare, produces a neuron value
    Zero,       // constant 0 neuron value (fully pruned neuron)
};

struct NetlistNode {
    NodeKind kind;
    std::uint8_t weight = 0;           // FirstOp / Cam
    std::uint16_t layer = 0;           // weight layer of FirstOp / Cam / Threshold / Zero
    std::uint32_t index = 0;           // flat weight index within the layer, or neuron index
    std::uint32_t lhs = 0, rhs = 0;    // operand node ids (lhs only for unary nodes)
    ActivationThresholds thresholds;   // Threshold
    std::uint32_t depth = 0;           // adder levels below this node
};

class NetlistMirror {
public:
    static NetlistMirror build(const Genome& genome);

    const NetworkShape& shape() const noexcept { return shape_; }
    std::span<const NetlistNode> nodes() const noexcept { return nodes_; }
    std::span<const std::uint32_t> inputs() const noexcept { return inputs_; }
    /// Node producing neuron `n` of weight layer `layer`.
    std::uint32_t neuron(std::size_t layer, std::size_t n) const { return neurons_.at(layer).at(n); }
    /// Root of the adder tree (or single term) feeding a neuron; empty fan-in returns the Zero node.
    std::uint32_t neuron_sum(std::size_t layer, std::size_t n) const;
    /// Maximum adder depth over the neurons of each layer.
    std::vector<int> adder_depths() const;

    /// Checks operand ordering (implies acyclicity) and node arities.
    void validate() const;

    std::vector<NeuronValue> evaluate(std::span<const InputSample> input) const;

private:
    explicit NetlistMirror(NetworkShape shape) : shape_(std::move(shape)) {}
    std::uint32_t add(NetlistNode node);

    NetworkShape shape_;
    std::vector<NetlistNode> nodes_;
    std::vector<std::uint32_t> inputs_;
    std::vector<std::vector<std::uint32_t>> neurons_;
};

/// Software stand-in for simulating the emitted design.
std::vector<NeuronValue> mirror_evaluate(const NetlistMirror& design, std::span<const InputSample> input);

struct StructureSummary {
    std::size_t first_op_nodes = 0;
    std::size_t cam_nodes = 0;
    std::size_t adder_nodes = 0;
    std::size_t comparator_count = 0;  // three per live neuron
    std::size_t silent_neurons = 0;
    std::vector<int> adder_depths;     // per layer, max over neurons
};

StructureSummary estimate_structure(const Genome& genome);

struct EmittedDesign {
    std::string name;
    std::string package_text;
    std::string entity_text;
    std::size_t input_port_bits = 0;
    std::size_t output_port_bits = 0;
    std::vector<int> adder_tree_depths;
};

/// Package `<name>_pkg`: types, CAM table, first-layer operations, activation.
std::string emit_package(std::string_view name = "bnn");
/// Entity `<name>` plus its package text.
EmittedDesign emit_entity(const Genome& genome, std::string_view name = "bnn");

}  // namespace lutbnn
