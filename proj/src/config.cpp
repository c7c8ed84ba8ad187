#include "lutbnn/config.hpp"

#include <set>

#include "lutbnn/genome_io.hpp"

namespace lutbnn {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void reject_unknown(const json& j, std::string_view section, const std::set<std::string>& known) {
    if (!j.is_object()) throw std::invalid_argument("config: '" + std::string(section) + "' must be an object");
    for (const auto& [key, _] : j.items()) {
        if (!known.contains(key))
            throw std::invalid_argument("config: unknown key '" + std::string(section) + "." + key + "'");
    }
}

template <class T>
void read(const json& j, std::string_view section, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw std::invalid_argument("config: bad value for '" + std::string(section) + "." + key + "'");
    }
}

void read_interval(const json& j, std::string_view section, const char* key, Interval& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw std::invalid_argument("config: '" + std::string(section) + "." + key + "' must be [lo, hi]");
    out = {v[0].get<double>(), v[1].get<double>()};
}

ordered_json interval(const Interval& r) { return ordered_json::array({r.lo, r.hi}); }

}  // namespace

ordered_json to_json(const NetworkShape& shape) {
    return {{"input", shape.input_len()}, {"hidden", shape.hidden()}, {"output", shape.output_len()}};
}

NetworkShape shape_from_json(const json& j) {
    if (j.is_string()) return NetworkShape::parse(j.get<std::string>());
    reject_unknown(j, "shape", {"input", "hidden", "output"});
    try {
        return NetworkShape(j.at("input").get<std::size_t>(), j.value("hidden", std::vector<std::size_t>{}),
                            j.at("output").get<std::size_t>());
    } catch (const json::exception&) {
        throw std::invalid_argument("config: 'shape' needs integer 'input', 'output' and a 'hidden' list");
    }
}

ordered_json to_json(const SimConfig& cfg) {
    ordered_json j;
    j["frame_len"] = cfg.frame_len;
    j["baseline"] = cfg.baseline;
    j["noise_sigma"] = cfg.noise_sigma;
    j["amplitude"] = interval(cfg.amplitude);
    j["tau_rise"] = interval(cfg.tau_rise);
    j["tau_fall"] = interval(cfg.tau_fall);
    j["t0"] = interval(cfg.t0);
    j["pileup_gap"] = interval(cfg.pileup_gap);
    j["seed"] = cfg.rng_seed;
    return j;
}

SimConfig sim_from_json(const json& j, SimConfig cfg) {
    reject_unknown(j, "sim",
                   {"frame_len", "baseline", "noise_sigma", "amplitude", "tau_rise", "tau_fall", "t0", "pileup_gap",
                    "seed"});
    read(j, "sim", "frame_len", cfg.frame_len);
    read(j, "sim", "baseline", cfg.baseline);
    read(j, "sim", "noise_sigma", cfg.noise_sigma);
    read_interval(j, "sim", "amplitude", cfg.amplitude);
    read_interval(j, "sim", "tau_rise", cfg.tau_rise);
    read_interval(j, "sim", "tau_fall", cfg.tau_fall);
    read_interval(j, "sim", "t0", cfg.t0);
    read_interval(j, "sim", "pileup_gap", cfg.pileup_gap);
    read(j, "sim", "seed", cfg.rng_seed);
    return cfg;
}

ordered_json to_json(const GaConfig& cfg) {
    ordered_json j;
    j["population_size"] = cfg.population_size;
    j["generations"] = cfg.generations;
    j["crossover_prob"] = cfg.crossover_prob;
    j["mutation_prob"] = cfg.mutation_prob;
    j["per_gene_mutation_rate"] = cfg.per_gene_mutation_rate ? ordered_json(*cfg.per_gene_mutation_rate) : ordered_json();
    j["tournament_size"] = cfg.tournament_size;
    j["elite_count"] = cfg.elite_count;
    j["eval_good"] = cfg.eval_good;
    j["eval_ugly"] = cfg.eval_ugly;
    j["accuracy_weight"] = cfg.accuracy_weight;
    j["size_weight"] = cfg.size_weight;
    j["seed"] = cfg.rng_seed;
    j["resample_each_eval"] = cfg.resample_each_eval;
    j["target_accuracy"] = cfg.target_accuracy ? ordered_json(*cfg.target_accuracy) : ordered_json();
    return j;
}

GaConfig ga_from_json(const json& j, GaConfig cfg) {
    reject_unknown(j, "ga",
                   {"population_size", "generations", "crossover_prob", "mutation_prob", "per_gene_mutation_rate",
                    "tournament_size", "elite_count", "eval_good", "eval_ugly", "accuracy_weight", "size_weight", "seed",
                    "resample_each_eval", "target_accuracy"});
    read(j, "ga", "population_size", cfg.population_size);
    read(j, "ga", "generations", cfg.generations);
    read(j, "ga", "crossover_prob", cfg.crossover_prob);
    read(j, "ga", "mutation_prob", cfg.mutation_prob);
    if (j.contains("per_gene_mutation_rate")) {
        if (j["per_gene_mutation_rate"].is_null())
            cfg.per_gene_mutation_rate.reset();
        else
            read(j, "ga", "per_gene_mutation_rate", cfg.per_gene_mutation_rate.emplace());
    }
    read(j, "ga", "tournament_size", cfg.tournament_size);
    read(j, "ga", "elite_count", cfg.elite_count);
    read(j, "ga", "eval_good", cfg.eval_good);
    read(j, "ga", "eval_ugly", cfg.eval_ugly);
    read(j, "ga", "accuracy_weight", cfg.accuracy_weight);
    read(j, "ga", "size_weight", cfg.size_weight);
    read(j, "ga", "seed", cfg.rng_seed);
    read(j, "ga", "resample_each_eval", cfg.resample_each_eval);
    if (j.contains("target_accuracy")) {
        if (j["target_accuracy"].is_null())
            cfg.target_accuracy.reset();
        else
            read(j, "ga", "target_accuracy", cfg.target_accuracy.emplace());
    }
    return cfg;
}

ordered_json to_json(const RunConfig& cfg) {
    ordered_json j;
    j["shape"] = to_json(cfg.shape);
    j["sim"] = to_json(cfg.sim);
    j["ga"] = to_json(cfg.ga);
    j["output"] = {{"dir", cfg.output.dir.string()},
                   {"genome", cfg.output.genome},
                   {"metrics", cfg.output.metrics},
                   {"timing", cfg.output.timing},
                   {"checkpoint", cfg.output.checkpoint},
                   {"checkpoint_every", cfg.output.checkpoint_every}};
    j["simulate"] = {{"good", cfg.simulate.good}, {"ugly", cfg.simulate.ugly}, {"noise", cfg.simulate.noise}};
    return j;
}

RunConfig run_config_from_json(const json& j) {
    reject_unknown(j, "config", {"shape", "sim", "ga", "output", "simulate"});
    RunConfig cfg;
    if (j.contains("shape")) cfg.shape = shape_from_json(j["shape"]);
    if (j.contains("sim")) cfg.sim = sim_from_json(j["sim"]);
    if (j.contains("ga")) cfg.ga = ga_from_json(j["ga"]);
    if (j.contains("output")) {
        const json& o = j["output"];
        reject_unknown(o, "output", {"dir", "genome", "metrics", "timing", "checkpoint", "checkpoint_every"});
        std::string dir = cfg.output.dir.string();
        read(o, "output", "dir", dir);
        cfg.output.dir = dir;
        read(o, "output", "genome", cfg.output.genome);
        read(o, "output", "metrics", cfg.output.metrics);
        read(o, "output", "timing", cfg.output.timing);
        read(o, "output", "checkpoint", cfg.output.checkpoint);
        read(o, "output", "checkpoint_every", cfg.output.checkpoint_every);
    }
    if (j.contains("simulate")) {
        const json& s = j["simulate"];
        reject_unknown(s, "simulate", {"good", "ugly", "noise"});
        read(s, "simulate", "good", cfg.simulate.good);
        read(s, "simulate", "ugly", cfg.simulate.ugly);
        read(s, "simulate", "noise", cfg.simulate.noise);
    }
    cfg.validate();
    return cfg;
}

void RunConfig::validate() const {
    sim.validate();
    ga.validate();
    if (shape.input_len() != sim.frame_len)
        throw std::invalid_argument("config: shape.input (" + std::to_string(shape.input_len()) +
                                    ") must equal sim.frame_len (" + std::to_string(sim.frame_len) + ")");
}

RunConfig parse_run_config(std::string_view text) {
    json j;
    try {
        j = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: malformed JSON: ") + e.what());
    }
    return run_config_from_json(j);
}

RunConfig load_run_config(const std::filesystem::path& path) {
    try {
        return parse_run_config(read_file(path));
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path.string() + ": " + e.what());
    }
}

}  // namespace lutbnn
