#include "lutbnn/ga.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "lutbnn/compiled.hpp"
#include "lutbnn/config.hpp"
#include "lutbnn/parallel.hpp"

namespace lutbnn {

void GaConfig::validate() const {
    auto prob = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string("ga config: ") + name + " must be in [0,1]");
    };
    if (population_size < 2) throw std::invalid_argument("ga config: population_size must be >= 2");
    if (elite_count >= population_size) throw std::invalid_argument("ga config: elite_count must be < population_size");
    if (tournament_size < 1) throw std::invalid_argument("ga config: tournament_size must be >= 1");
    prob(crossover_prob, "crossover_prob");
    prob(mutation_prob, "mutation_prob");
    if (per_gene_mutation_rate) prob(*per_gene_mutation_rate, "per_gene_mutation_rate");
    if (eval_good + eval_ugly == 0) throw std::invalid_argument("ga config: eval_good + eval_ugly must be >= 1");
}

double GaConfig::gene_rate(std::size_t genome_len) const {
    if (per_gene_mutation_rate) return *per_gene_mutation_rate;
    return genome_len == 0 ? 0.0 : 1.0 / static_cast<double>(genome_len);
}

std::size_t ConfusionMatrix::row_sum(TruthLabel truth) const {
    const auto& row = counts[static_cast<std::size_t>(truth)];
    return std::accumulate(row.begin(), row.end(), std::size_t{0});
}

std::size_t ConfusionMatrix::total() const {
    return row_sum(TruthLabel::Good) + row_sum(TruthLabel::Ugly) + row_sum(TruthLabel::Noise);
}

double ConfusionMatrix::accuracy() const {
    const std::size_t n = row_sum(TruthLabel::Good) + row_sum(TruthLabel::Ugly);
    if (n == 0) return 0.0;
    return static_cast<double>(counts[0][0] + counts[1][1]) / static_cast<double>(n);
}

std::string ConfusionMatrix::to_string() const {
    // Noise frames are reported on the "Either" row.
    static constexpr const char* kRows[] = {"Good", "Ugly", "Either"};
    char line[128];
    std::string out;
    std::snprintf(line, sizeof line, "%-12s %8s %8s %8s\n", "true\\pred", "Good", "Ugly", "Either");
    out += line;
    for (std::size_t r = 0; r < 3; ++r) {
        std::snprintf(line, sizeof line, "%-12s %8zu %8zu %8zu\n", kRows[r], counts[r][0], counts[r][1], counts[r][2]);
        out += line;
    }
    return out;
}

double score_prediction(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> target) {
    if (pred.size() != target.size() || pred.empty())
        throw std::invalid_argument("score_prediction: tuples must have equal non-zero length");
    std::size_t matches = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) matches += (pred[i] != 0) == (target[i] != 0);
    return static_cast<double>(matches) / static_cast<double>(pred.size());
}

Bits one_hot_bits(std::span<const NeuronValue> output) {
    Bits bits(output.size());
    std::transform(output.begin(), output.end(), bits.begin(), [](NeuronValue v) { return std::uint8_t{v.on()}; });
    return bits;
}

Bits target_bits(TruthLabel label) {
    switch (label) {
    case TruthLabel::Good: return {1, 0};
    case TruthLabel::Ugly: return {0, 1};
    case TruthLabel::Noise: break;
    }
    throw std::invalid_argument("target_bits: Noise frames have no training target");
}

FitnessScore scalarize(double accuracy, std::size_t nonzero, std::size_t total_weights, const GaConfig& cfg) {
    const double fraction = total_weights == 0 ? 0.0 : static_cast<double>(nonzero) / static_cast<double>(total_weights);
    return {accuracy, nonzero, cfg.accuracy_weight * accuracy - cfg.size_weight * fraction};
}

namespace {

// Scores frames with an already compiled network.
double partial_credit_accuracy(const CompiledNetwork& net, std::span<const Waveform> dataset) {
    if (dataset.empty()) throw std::invalid_argument("evaluate_fitness: empty dataset");
    if (net.output_len() != 2) throw std::invalid_argument("evaluate_fitness: network must have 2 outputs");
    std::vector<std::uint8_t> input(net.input_len());
    std::array<std::uint8_t, 2> out{};
    double total = 0.0;
    bool all_equal = true;
    std::array<std::uint8_t, 2> first{};
    for (std::size_t f = 0; f < dataset.size(); ++f) {
        const Waveform& w = dataset[f];
        if (w.samples.size() != input.size())
            throw std::invalid_argument("evaluate_fitness: frame length does not match network input");
        for (std::size_t i = 0; i < input.size(); ++i) input[i] = quantize_12_to_7(w.samples[i]).value();
        net.evaluate(input, out);
        const std::array<std::uint8_t, 2> bits{std::uint8_t{out[0] >= 2}, std::uint8_t{out[1] >= 2}};
        const Bits target = target_bits(w.label);
        total += score_prediction(bits, target);
        if (f == 0)
            first = bits;
        else if (bits != first)
            all_equal = false;
    }
    if (all_equal) return 0.0;
    return total / static_cast<double>(dataset.size());
}

}  // namespace

FitnessScore evaluate_fitness(const Genome& genome, std::span<const Waveform> dataset, const GaConfig& cfg) {
    const CompiledNetwork net(genome);
    const double accuracy = partial_credit_accuracy(net, dataset);
    return scalarize(accuracy, nonzero_weight_count(genome), genome.shape().total_weights(), cfg);
}

std::size_t tournament_select(std::span<const FitnessScore> scores, std::size_t k, Engine& rng) {
    if (scores.empty()) throw std::invalid_argument("tournament_select: empty population");
    if (k >= scores.size()) {
        // The tournament spans the whole population.
        return static_cast<std::size_t>(std::distance(
            scores.begin(), std::max_element(scores.begin(), scores.end(),
                                             [](const FitnessScore& a, const FitnessScore& b) { return a.scalar < b.scalar; })));
    }
    std::uniform_int_distribution<std::size_t> pick(0, scores.size() - 1);
    std::size_t best = pick(rng);
    for (std::size_t i = 1; i < k; ++i) {
        const std::size_t c = pick(rng);
        if (scores[c].scalar > scores[best].scalar) best = c;
    }
    return best;
}

Genome random_genome(const NetworkShape& shape, Engine& rng) {
    std::uniform_int_distribution<int> code(0, 3);
    std::vector<WeightCode> weights(shape.total_weights());
    for (auto& w : weights) w = WeightCode(code(rng));
    return Genome(shape, std::move(weights));
}

Genome mutate(Genome genome, double per_gene_rate, Engine& rng) {
    if (!(per_gene_rate >= 0.0 && per_gene_rate <= 1.0)) throw std::invalid_argument("mutate: rate must be in [0,1]");
    if (per_gene_rate == 0.0) return genome;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> offset(1, 3);
    for (WeightCode& w : genome.weights()) {
        if (per_gene_rate < 1.0 && !(u(rng) < per_gene_rate)) continue;
        w = WeightCode((w.value() + offset(rng)) % 4);
    }
    return genome;
}

std::pair<Genome, Genome> crossover_at(const Genome& a, const Genome& b, std::size_t cut_lo, std::size_t cut_hi) {
    if (!(a.shape() == b.shape())) throw std::invalid_argument("crossover: parent shapes differ");
    const std::size_t len = a.weights().size();
    if (cut_lo > cut_hi || cut_hi > len) throw std::invalid_argument("crossover: invalid cut points");
    Genome c1 = a;
    Genome c2 = b;
    auto w1 = c1.weights();
    auto w2 = c2.weights();
    std::swap_ranges(w1.begin() + static_cast<std::ptrdiff_t>(cut_lo), w1.begin() + static_cast<std::ptrdiff_t>(cut_hi),
                     w2.begin() + static_cast<std::ptrdiff_t>(cut_lo));
    return {std::move(c1), std::move(c2)};
}

std::pair<Genome, Genome> crossover(const Genome& a, const Genome& b, Engine& rng) {
    if (!(a.shape() == b.shape())) throw std::invalid_argument("crossover: parent shapes differ");
    std::uniform_int_distribution<std::size_t> cut(0, a.weights().size());
    std::size_t lo = cut(rng);
    std::size_t hi = cut(rng);
    if (lo > hi) std::swap(lo, hi);
    return crossover_at(a, b, lo, hi);
}

ConfusionMatrix confusion_matrix(const Genome& genome, std::span<const Waveform> dataset, unsigned workers) {
    if (dataset.empty()) throw std::invalid_argument("confusion_matrix: empty dataset");
    if (genome.shape().output_len() != 2) throw std::invalid_argument("confusion_matrix: network must have 2 outputs");
    const CompiledNetwork net(genome);
    std::vector<ClassLabel> predicted(dataset.size());
    parallel_for(dataset.size(), workers, [&](std::size_t f) {
        const Waveform& w = dataset[f];
        if (w.samples.size() != net.input_len())
            throw std::invalid_argument("confusion_matrix: frame length " + std::to_string(w.samples.size()) +
                                        " does not match network input " + std::to_string(net.input_len()));
        predicted[f] = classify(net.evaluate(w.quantized()));
    });
    ConfusionMatrix cm;
    for (std::size_t f = 0; f < dataset.size(); ++f)
        ++cm.counts[static_cast<std::size_t>(dataset[f].label)][static_cast<std::size_t>(predicted[f])];
    return cm;
}

// ---------------------------------------------------------------------------
// Evolution loop

EvolutionState initial_state(const NetworkShape& shape, const GaConfig& ga, const SimConfig& sim) {
    ga.validate();
    sim.validate();
    if (shape.input_len() != sim.frame_len)
        throw std::invalid_argument("evolve: network input length must equal the simulated frame length");
    if (shape.output_len() != 2) throw std::invalid_argument("evolve: network must have 2 outputs");
    EvolutionState state{shape, ga, sim};
    Engine init = make_engine(ga.rng_seed, {kStreamInit});
    state.population.reserve(ga.population_size);
    for (std::size_t i = 0; i < ga.population_size; ++i) state.population.push_back(random_genome(shape, init));
    state.rng = make_engine(ga.rng_seed, {kStreamVariation});
    return state;
}

namespace {

std::vector<Waveform> eval_batch(const EvolutionState& s, std::size_t individual) {
    SimConfig sim = s.sim;
    sim.rng_seed = derive_seed(s.ga.rng_seed, {kStreamEval, s.generation, individual});
    return gen_batch(sim, s.ga.eval_good, s.ga.eval_ugly, 0);
}

std::vector<Waveform> fixed_batch(const EvolutionState& s) {
    SimConfig sim = s.sim;
    sim.rng_seed = derive_seed(s.ga.rng_seed, {kStreamFixedSet});
    return gen_batch(sim, s.ga.eval_good, s.ga.eval_ugly, 0);
}

}  // namespace

void advance(EvolutionState& state, unsigned workers) {
    if (state.done) return;
    const auto started = std::chrono::steady_clock::now();
    const GaConfig& ga = state.ga;
    const std::size_t n = state.population.size();
    const std::size_t total_weights = state.shape.total_weights();

    std::vector<Waveform> fixed;
    if (!ga.resample_each_eval) fixed = fixed_batch(state);

    std::vector<FitnessScore> scores(n);
    parallel_for(n, workers, [&](std::size_t i) {
        const Genome& g = state.population[i];
        const CompiledNetwork net(g);
        const double acc =
            ga.resample_each_eval ? partial_credit_accuracy(net, eval_batch(state, i)) : partial_credit_accuracy(net, fixed);
        scores[i] = scalarize(acc, nonzero_weight_count(g), total_weights, ga);
    });

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a].scalar > scores[b].scalar; });

    const FitnessScore& top = scores[order.front()];
    GenerationRecord rec;
    rec.generation = state.generation;
    rec.best_accuracy = top.accuracy;
    double acc_sum = 0.0;
    for (const auto& s : scores) acc_sum += s.accuracy;
    rec.mean_accuracy = acc_sum / static_cast<double>(n);
    rec.best_scalar = top.scalar;
    rec.best_nonzero = top.nonzero;
    rec.best_nonzero_fraction = static_cast<double>(top.nonzero) / static_cast<double>(total_weights);
    state.best = state.population[order.front()];
    state.best_score = top;

    const bool reached = ga.target_accuracy && top.accuracy >= *ga.target_accuracy;
    if (state.generation >= ga.generations || reached) {
        state.done = true;
    } else {
        std::vector<Genome> next;
        next.reserve(n);
        for (std::size_t e = 0; e < ga.elite_count; ++e) next.push_back(state.population[order[e]]);

        std::vector<Genome> offspring;
        offspring.reserve(n - ga.elite_count);
        for (std::size_t k = ga.elite_count; k < n; ++k)
            offspring.push_back(state.population[tournament_select(scores, ga.tournament_size, state.rng)]);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (std::size_t i = 1; i < offspring.size(); i += 2) {
            if (u(state.rng) < ga.crossover_prob) {
                auto [a, b] = crossover(offspring[i - 1], offspring[i], state.rng);
                offspring[i - 1] = std::move(a);
                offspring[i] = std::move(b);
            }
        }
        const double rate = ga.gene_rate(total_weights);
        for (Genome& g : offspring) {
            if (u(state.rng) < ga.mutation_prob) g = mutate(std::move(g), rate, state.rng);
        }
        for (Genome& g : offspring) next.push_back(std::move(g));
        state.population = std::move(next);
        ++state.generation;
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    state.records.push_back(rec);
}

EvolveResult run_to_completion(EvolutionState state, const EvolveOptions& opts) {
    while (!state.done) {
        advance(state, opts.workers);
        if (opts.on_generation) opts.on_generation(state);
    }
    return {*state.best, state.best_score, state.records};
}

EvolveResult evolve(const NetworkShape& shape, const GaConfig& ga, const SimConfig& sim, const EvolveOptions& opts) {
    return run_to_completion(initial_state(shape, ga, sim), opts);
}

std::string metrics_csv(std::span<const GenerationRecord> records) {
    std::string out(kMetricsHeader);
    out += '\n';
    char line[256];
    for (const auto& r : records) {
        std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g,%zu,%.17g\n", r.generation, r.best_accuracy,
                      r.mean_accuracy, r.best_scalar, r.best_nonzero, r.best_nonzero_fraction);
        out += line;
    }
    return out;
}

std::string timing_csv(std::span<const GenerationRecord> records) {
    std::string out = "generation,seconds\n";
    char line[64];
    for (const auto& r : records) {
        std::snprintf(line, sizeof line, "%zu,%.6f\n", r.generation, r.seconds);
        out += line;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr std::string_view kCheckpointFormat = "lutbnn-checkpoint";
constexpr int kCheckpointVersion = 1;

std::string fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

}  // namespace

std::string checkpoint_to_text(const EvolutionState& state) {
    nlohmann::ordered_json payload;
    payload["shape"] = to_json(state.shape);
    payload["ga"] = to_json(state.ga);
    payload["sim"] = to_json(state.sim);
    payload["generation"] = state.generation;
    payload["done"] = state.done;
    std::ostringstream rng;
    rng << state.rng;
    payload["rng"] = rng.str();
    auto& pop = payload["population"] = nlohmann::ordered_json::array();
    for (const Genome& g : state.population) pop.push_back(g.digits());
    auto& recs = payload["records"] = nlohmann::ordered_json::array();
    for (const auto& r : state.records) {
        recs.push_back({{"generation", r.generation},
                        {"best_accuracy", r.best_accuracy},
                        {"mean_accuracy", r.mean_accuracy},
                        {"best_scalar", r.best_scalar},
                        {"best_nonzero", r.best_nonzero},
                        {"best_nonzero_fraction", r.best_nonzero_fraction},
                        {"seconds", r.seconds}});
    }
    if (state.best) {
        payload["best"] = state.best->digits();
        payload["best_score"] = {{"accuracy", state.best_score.accuracy},
                                 {"nonzero", state.best_score.nonzero},
                                 {"scalar", state.best_score.scalar}};
    }
    const std::string body = payload.dump();
    nlohmann::ordered_json doc;
    doc["format"] = kCheckpointFormat;
    doc["version"] = kCheckpointVersion;
    doc["checksum"] = fnv1a64(body);
    doc["payload"] = std::move(payload);
    return doc.dump() + "\n";
}

EvolutionState checkpoint_from_text(std::string_view text) {
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error&) {
        throw std::invalid_argument("checkpoint: corrupt (not valid JSON)");
    }
    if (!doc.is_object() || doc.value("format", "") != kCheckpointFormat)
        throw std::invalid_argument("checkpoint: wrong format tag");
    if (doc.value("version", -1) != kCheckpointVersion) throw std::invalid_argument("checkpoint: unsupported version");
    if (!doc.contains("payload") || fnv1a64(doc["payload"].dump()) != doc.value("checksum", ""))
        throw std::invalid_argument("checkpoint: corrupt (checksum mismatch)");
    const auto& p = doc["payload"];
    try {
        EvolutionState state{shape_from_json(p.at("shape")), ga_from_json(p.at("ga")), sim_from_json(p.at("sim"))};
        state.generation = p.at("generation").get<std::size_t>();
        state.done = p.at("done").get<bool>();
        std::istringstream rng(p.at("rng").get<std::string>());
        rng >> state.rng;
        if (!rng) throw std::invalid_argument("checkpoint: bad rng state");
        for (const auto& d : p.at("population")) state.population.push_back(Genome::from_digits(state.shape, d.get<std::string>()));
        for (const auto& r : p.at("records")) {
            GenerationRecord rec;
            rec.generation = r.at("generation").get<std::size_t>();
            rec.best_accuracy = r.at("best_accuracy").get<double>();
            rec.mean_accuracy = r.at("mean_accuracy").get<double>();
            rec.best_scalar = r.at("best_scalar").get<double>();
            rec.best_nonzero = r.at("best_nonzero").get<std::size_t>();
            rec.best_nonzero_fraction = r.at("best_nonzero_fraction").get<double>();
            rec.seconds = r.at("seconds").get<double>();
            state.records.push_back(rec);
        }
        if (p.contains("best")) {
            state.best = Genome::from_digits(state.shape, p["best"].get<std::string>());
            const auto& s = p.at("best_score");
            state.best_score = {s.at("accuracy").get<double>(), s.at("nonzero").get<std::size_t>(),
                                s.at("scalar").get<double>()};
        }
        if (state.population.size() != state.ga.population_size)
            throw std::invalid_argument("checkpoint: population size mismatch");
        return state;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("checkpoint: ") + e.what());
    }
}

}  // namespace lutbnn
