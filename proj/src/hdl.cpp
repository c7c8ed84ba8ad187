#include "lutbnn/hdl.hpp"

#include <algorithm>
#include <stdexcept>

namespace lutbnn {

namespace {

// The CAM rows exactly as printed into the package.
constexpr int kPackageCam[4][4] = {
    {0, 0, 0, 0},
    {0, 1, 2, 3},
    {1, 2, 3, 3},
    {3, 2, 1, 0},
};
constexpr int kPackageMaxInt = 127;
constexpr int kPackageIncrShift = 1;

// Mirrors the package functions op_block/op_pass/op_incr/op_neg.
int package_first_op(int w, int x) {
    switch (w) {
    case 0: return 0;
    case 1: return x;
    case 2: {
        const int doubled = x * (1 << kPackageIncrShift);
        return doubled > kPackageMaxInt ? kPackageMaxInt : doubled;
    }
    default: return kPackageMaxInt - x;
    }
}

// Mirrors the package function activate.
int package_activate(std::int64_t s, const ActivationThresholds& t) {
    if (s >= t.t3) return 3;
    if (s >= t.t2) return 2;
    if (s >= t.t1) return 1;
    return 0;
}

std::string layer_output_signal(const NetworkShape& shape, std::size_t layer) {
    return layer + 1 == shape.layer_count() ? "y" : "h" + std::to_string(layer + 1);
}

std::string layer_input_signal(std::size_t layer) { return layer == 0 ? "x" : "h" + std::to_string(layer); }

}  // namespace

std::uint32_t NetlistMirror::add(NetlistNode node) {
    nodes_.push_back(node);
    return static_cast<std::uint32_t>(nodes_.size() - 1);
}

NetlistMirror NetlistMirror::build(const Genome& genome) {
    NetlistMirror m(genome.shape());
    const NetworkShape& shape = m.shape_;
    for (std::size_t s = 0; s < shape.input_len(); ++s)
        m.inputs_.push_back(m.add({.kind = NodeKind::Input, .index = static_cast<std::uint32_t>(s)}));

    std::vector<std::uint32_t> prev = m.inputs_;
    for (std::size_t l = 0; l < shape.layer_count(); ++l) {
        const std::size_t fan_in = shape.layer_inputs(l);
        std::vector<std::uint32_t> layer_nodes;
        for (std::size_t d = 0; d < shape.layer_outputs(l); ++d) {
            const auto row = genome.row(l, d);
            std::vector<std::uint32_t> terms;
            for (std::size_t s = 0; s < fan_in; ++s) {
                if (row[s].blocked()) continue;
                terms.push_back(m.add({.kind = l == 0 ? NodeKind::FirstOp : NodeKind::Cam,
                                       .weight = row[s].value(),
                                       .layer = static_cast<std::uint16_t>(l),
                                       .index = static_cast<std::uint32_t>(d * fan_in + s),
                                       .lhs = prev[s]}));
            }
            if (terms.empty()) {
                layer_nodes.push_back(
                    m.add({.kind = NodeKind::Zero, .layer = static_cast<std::uint16_t>(l), .index = static_cast<std::uint32_t>(d)}));
                continue;
            }
            const std::size_t live = terms.size();
            while (terms.size() > 1) {
                std::vector<std::uint32_t> next;
                for (std::size_t i = 0; i + 1 < terms.size(); i += 2) {
                    const std::uint32_t depth = std::max(m.nodes_[terms[i]].depth, m.nodes_[terms[i + 1]].depth) + 1;
                    next.push_back(m.add({.kind = NodeKind::Add, .lhs = terms[i], .rhs = terms[i + 1], .depth = depth}));
                }
                if (terms.size() % 2 == 1) next.push_back(terms.back());
                terms = std::move(next);
            }
            const std::int64_t input_max = l == 0 ? kPackageMaxInt : 3;
            const std::int64_t span = static_cast<std::int64_t>(live) * input_max;
            const ActivationThresholds th{(span + 3) / 4, (span + 1) / 2, (3 * span + 3) / 4};
            layer_nodes.push_back(m.add({.kind = NodeKind::Threshold,
                                         .layer = static_cast<std::uint16_t>(l),
                                         .index = static_cast<std::uint32_t>(d),
                                         .lhs = terms.front(),
                                         .thresholds = th,
                                         .depth = m.nodes_[terms.front()].depth}));
        }
        m.neurons_.push_back(layer_nodes);
        prev = std::move(layer_nodes);
    }
    return m;
}

std::uint32_t NetlistMirror::neuron_sum(std::size_t layer, std::size_t n) const {
    const std::uint32_t id = neuron(layer, n);
    return nodes_[id].kind == NodeKind::Threshold ? nodes_[id].lhs : id;
}

std::vector<int> NetlistMirror::adder_depths() const {
    std::vector<int> depths;
    for (const auto& layer : neurons_) {
        int d = 0;
        for (std::uint32_t id : layer) d = std::max(d, static_cast<int>(nodes_[id].depth));
        depths.push_back(d);
    }
    return depths;
}

void NetlistMirror::validate() const {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const NetlistNode& n = nodes_[i];
        auto before = [&](std::uint32_t op) {
            if (op >= i) throw std::logic_error("netlist: operand does not precede node " + std::to_string(i));
            return nodes_[op].kind;
        };
        switch (n.kind) {
        case NodeKind::Input:
        case NodeKind::Zero: break;
        case NodeKind::FirstOp:
            if (before(n.lhs) != NodeKind::Input) throw std::logic_error("netlist: first-layer op must read an input");
            if (n.weight == 0) throw std::logic_error("netlist: blocked weight materialized");
            break;
        case NodeKind::Cam: {
            const NodeKind k = before(n.lhs);
            if (k != NodeKind::Threshold && k != NodeKind::Zero) throw std::logic_error("netlist: CAM must read a neuron");
            if (n.weight == 0) throw std::logic_error("netlist: blocked weight materialized");
            break;
        }
        case NodeKind::Add: {
            for (std::uint32_t op : {n.lhs, n.rhs}) {
                const NodeKind k = before(op);
                if (k != NodeKind::Add && k != NodeKind::FirstOp && k != NodeKind::Cam)
                    throw std::logic_error("netlist: adder operand must be a term or adder");
            }
            if (n.depth != std::max(nodes_[n.lhs].depth, nodes_[n.rhs].depth) + 1)
                throw std::logic_error("netlist: inconsistent adder depth");
            break;
        }
        case NodeKind::Threshold: {
            const NodeKind k = before(n.lhs);
            if (k != NodeKind::Add && k != NodeKind::FirstOp && k != NodeKind::Cam)
                throw std::logic_error("netlist: threshold must read a sum");
            break;
        }
        }
    }
}

std::vector<NeuronValue> NetlistMirror::evaluate(std::span<const InputSample> input) const {
    if (input.size() != inputs_.size())
        throw std::invalid_argument("mirror_evaluate: expected " + std::to_string(inputs_.size()) + " inputs, got " +
                                    std::to_string(input.size()));
    std::vector<std::int64_t> v(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const NetlistNode& n = nodes_[i];
        switch (n.kind) {
        case NodeKind::Input: v[i] = input[n.index].value(); break;
        case NodeKind::FirstOp: v[i] = package_first_op(n.weight, static_cast<int>(v[n.lhs])); break;
        case NodeKind::Cam: v[i] = kPackageCam[n.weight][v[n.lhs]]; break;
        case NodeKind::Add: v[i] = v[n.lhs] + v[n.rhs]; break;
        case NodeKind::Threshold: v[i] = package_activate(v[n.lhs], n.thresholds); break;
        case NodeKind::Zero: v[i] = 0; break;
        }
    }
    std::vector<NeuronValue> out;
    for (std::uint32_t id : neurons_.back()) out.emplace_back(static_cast<int>(v[id]));
    return out;
}

std::vector<NeuronValue> mirror_evaluate(const NetlistMirror& design, std::span<const InputSample> input) {
    return design.evaluate(input);
}

StructureSummary estimate_structure(const Genome& genome) {
    const NetworkShape& shape = genome.shape();
    StructureSummary s;
    for (std::size_t l = 0; l < shape.layer_count(); ++l) {
        int depth = 0;
        for (std::size_t d = 0; d < shape.layer_outputs(l); ++d) {
            const std::size_t live = nonzero_fan_in(genome, l, d);
            (l == 0 ? s.first_op_nodes : s.cam_nodes) += live;
            if (live == 0) {
                ++s.silent_neurons;
                continue;
            }
            s.adder_nodes += live - 1;
            s.comparator_count += 3;
            depth = std::max(depth, tree_depth(live));
        }
        s.adder_depths.push_back(depth);
    }
    return s;
}

// ---------------------------------------------------------------------------
// VHDL text

namespace {

std::string header_comment(std::string_view what) {
    return "-- " + std::string(what) + "\n-- Generated by lutbnn VHDL emitter " + std::string(kEmitterVersion) +
           ". Do not edit.\n\n";
}

// Aggregates of length 1 must use named association.
std::string aggregate(const std::vector<std::string>& items, std::string_view indent, std::size_t per_line) {
    if (items.size() == 1) return "(0 => " + items.front() + ")";
    std::string out = "(\n";
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i % per_line == 0) out += indent;
        out += items[i];
        if (i + 1 < items.size()) out += (i % per_line == per_line - 1) ? ",\n" : ", ";
    }
    out += ")";
    return out;
}

class EntityPrinter {
public:
    explicit EntityPrinter(const NetlistMirror& m) : m_(m) {}

    std::string expr(std::uint32_t id) const {
        const NetlistNode& n = m_.nodes()[id];
        const std::size_t fan_in = m_.shape().layer_inputs(n.layer);
        const std::string w = "W" + std::to_string(n.layer + 1) + "(" + std::to_string(n.index) + ")";
        const std::string src = layer_input_signal(n.layer) + "(" + std::to_string(n.index % fan_in) + ")";
        switch (n.kind) {
        case NodeKind::FirstOp: return "first_op(" + w + ", " + src + ")";
        case NodeKind::Cam: return "cam_mul(" + w + ", " + src + ")";
        case NodeKind::Add: return "(" + expr(n.lhs) + " + " + expr(n.rhs) + ")";
        default: throw std::logic_error("emit: unexpected node in sum expression");
        }
    }

private:
    const NetlistMirror& m_;
};

}  // namespace

std::string emit_package(std::string_view name) {
    const std::string pkg = std::string(name) + "_pkg";
    std::string t = header_comment("Operations for the 2-bit LUT network '" + std::string(name) + "'.");
    t += "library ieee;\nuse ieee.std_logic_1164.all;\nuse ieee.numeric_std.all;\n\n";
    t += "package " + pkg + " is\n";
    t += "  constant MAX_INT    : natural := " + std::to_string(kPackageMaxInt) + ";\n";
    t += "  constant INCR_SHIFT : natural := " + std::to_string(kPackageIncrShift) + ";\n\n";
    t += "  subtype wcode_t  is natural range 0 to 3;\n";
    t += "  subtype nval_t   is natural range 0 to 3;\n";
    t += "  subtype sample_t is natural range 0 to MAX_INT;\n";
    t += "  type wcode_array  is array (natural range <>) of wcode_t;\n";
    t += "  type nval_array   is array (natural range <>) of nval_t;\n";
    t += "  type sample_array is array (natural range <>) of sample_t;\n\n";
    t += "  type threshold_t is record\n    t1 : natural;\n    t2 : natural;\n    t3 : natural;\n  end record;\n";
    t += "  type threshold_array is array (natural range <>) of threshold_t;\n\n";
    t += "  -- 2-bit multiplication, indexed (weight)(value)\n";
    t += "  type cam_row_t   is array (0 to 3) of nval_t;\n";
    t += "  type cam_table_t is array (0 to 3) of cam_row_t;\n";
    t += "  constant CAM_TABLE : cam_table_t := (\n";
    for (int w = 0; w < 4; ++w) {
        t += "    (";
        for (int x = 0; x < 4; ++x) t += std::to_string(kPackageCam[w][x]) + (x < 3 ? ", " : "");
        t += w < 3 ? "),\n" : "));\n\n";
    }
    t += "  function cam_mul(w : wcode_t; x : nval_t) return nval_t;\n";
    t += "  function op_block(x : sample_t) return sample_t;\n";
    t += "  function op_pass(x : sample_t) return sample_t;\n";
    t += "  function op_incr(x : sample_t) return sample_t;\n";
    t += "  function op_neg(x : sample_t) return sample_t;\n";
    t += "  function first_op(w : wcode_t; x : sample_t) return sample_t;\n";
    t += "  function activate(s : natural; t : threshold_t) return nval_t;\n";
    t += "end package " + pkg + ";\n\n";

    t += "package body " + pkg + " is\n\n";
    t += "  function cam_mul(w : wcode_t; x : nval_t) return nval_t is\n  begin\n"
         "    return CAM_TABLE(w)(x);\n  end function;\n\n";
    t += "  function op_block(x : sample_t) return sample_t is\n  begin\n    return 0;\n  end function;\n\n";
    t += "  function op_pass(x : sample_t) return sample_t is\n  begin\n    return x;\n  end function;\n\n";
    t += "  function op_incr(x : sample_t) return sample_t is\n  begin\n"
         "    if x * 2**INCR_SHIFT > MAX_INT then\n      return MAX_INT;\n    end if;\n"
         "    return x * 2**INCR_SHIFT;\n  end function;\n\n";
    t += "  function op_neg(x : sample_t) return sample_t is\n  begin\n    return MAX_INT - x;\n  end function;\n\n";
    t += "  function first_op(w : wcode_t; x : sample_t) return sample_t is\n  begin\n"
         "    case w is\n"
         "      when 0      => return op_block(x);\n"
         "      when 1      => return op_pass(x);\n"
         "      when 2      => return op_incr(x);\n"
         "      when others => return op_neg(x);\n"
         "    end case;\n  end function;\n\n";
    t += "  function activate(s : natural; t : threshold_t) return nval_t is\n  begin\n"
         "    if s >= t.t3 then\n      return 3;\n"
         "    elsif s >= t.t2 then\n      return 2;\n"
         "    elsif s >= t.t1 then\n      return 1;\n"
         "    end if;\n    return 0;\n  end function;\n\n";
    t += "end package body " + pkg + ";\n";
    return t;
}

EmittedDesign emit_entity(const Genome& genome, std::string_view name_view) {
    const std::string name(name_view);
    const NetworkShape& shape = genome.shape();
    const NetlistMirror mirror = NetlistMirror::build(genome);
    const EntityPrinter printer(mirror);

    EmittedDesign d;
    d.name = name;
    d.package_text = emit_package(name);
    d.input_port_bits = shape.input_len() * kInputBits;
    d.output_port_bits = shape.output_len() * kNeuronBits;
    d.adder_tree_depths = mirror.adder_depths();

    std::string t = header_comment("Combinatorial 2-bit LUT network " + shape.to_string() + ", " +
                                   std::to_string(nonzero_weight_count(genome)) + " non-zero weights.");
    t += "library ieee;\nuse ieee.std_logic_1164.all;\nuse ieee.numeric_std.all;\n";
    t += "use work." + name + "_pkg.all;\n\n";
    t += "entity " + name + " is\n  port (\n";
    t += "    x_in  : in  std_logic_vector(" + std::to_string(d.input_port_bits - 1) + " downto 0);\n";
    t += "    y_out : out std_logic_vector(" + std::to_string(d.output_port_bits - 1) + " downto 0)\n";
    t += "  );\nend entity " + name + ";\n\n";
    t += "architecture comb of " + name + " is\n";

    for (std::size_t l = 0; l < shape.layer_count(); ++l) {
        const std::size_t fan_in = shape.layer_inputs(l), fan_out = shape.layer_outputs(l);
        const std::string tag = std::to_string(l + 1);
        t += "  -- layer " + tag + ": " + std::to_string(fan_in) + " -> " + std::to_string(fan_out) +
             ", weight (d, s) at index d * " + std::to_string(fan_in) + " + s\n";
        std::vector<std::string> weights;
        for (std::size_t d_ = 0; d_ < fan_out; ++d_)
            for (WeightCode w : genome.row(l, d_)) weights.push_back(std::to_string(w.value()));
        t += "  constant W" + tag + " : wcode_array(0 to " + std::to_string(weights.size() - 1) + ") := " +
             aggregate(weights, "    ", 32) + ";\n";
        std::vector<std::string> thresholds;
        for (std::size_t n = 0; n < fan_out; ++n) {
            const NetlistNode& node = mirror.nodes()[mirror.neuron(l, n)];
            const ActivationThresholds th = node.kind == NodeKind::Threshold ? node.thresholds : ActivationThresholds{};
            thresholds.push_back("(" + std::to_string(th.t1) + ", " + std::to_string(th.t2) + ", " +
                                 std::to_string(th.t3) + ")");
        }
        t += "  constant T" + tag + " : threshold_array(0 to " + std::to_string(fan_out - 1) + ") := " +
             aggregate(thresholds, "    ", 4) + ";\n\n";
    }
    t += "  signal x : sample_array(0 to " + std::to_string(shape.input_len() - 1) + ");\n";
    for (std::size_t l = 0; l < shape.layer_count(); ++l)
        t += "  signal " + layer_output_signal(shape, l) + " : nval_array(0 to " +
             std::to_string(shape.layer_outputs(l) - 1) + ");\n";
    t += "begin\n\n";
    t += "  unpack : for i in 0 to " + std::to_string(shape.input_len() - 1) + " generate\n";
    t += "    x(i) <= to_integer(unsigned(x_in(7 * i + 6 downto 7 * i)));\n  end generate;\n\n";

    for (std::size_t l = 0; l < shape.layer_count(); ++l) {
        const std::string out = layer_output_signal(shape, l);
        const std::string tag = std::to_string(l + 1);
        t += "  -- layer " + tag + ", adder depth " + std::to_string(d.adder_tree_depths[l]) + "\n";
        for (std::size_t n = 0; n < shape.layer_outputs(l); ++n) {
            const std::uint32_t id = mirror.neuron(l, n);
            const std::string lhs = "  " + out + "(" + std::to_string(n) + ") <= ";
            if (mirror.nodes()[id].kind == NodeKind::Zero) {
                t += lhs + "0;\n";
                continue;
            }
            t += lhs + "activate(" + printer.expr(mirror.neuron_sum(l, n)) + ", T" + tag + "(" + std::to_string(n) +
                 "));\n";
        }
        t += "\n";
    }
    t += "  pack : for j in 0 to " + std::to_string(shape.output_len() - 1) + " generate\n";
    t += "    y_out(2 * j + 1 downto 2 * j) <= std_logic_vector(to_unsigned(y(j), 2));\n  end generate;\n\n";
    t += "end architecture comb;\n";
    d.entity_text = std::move(t);
    return d;
}

}  // namespace lutbnn
