#pragma once
/**
 * @file ga.hpp
 * @brief Genetic training of 2-bit LUT networks.
 *
 * A simple evolutionary loop with elitism: evaluate, keep the best few
 * unchanged, refill by tournament selection, two-point crossover and
 * per-gene mutation. Fitness is a partial-credit match of one-hot output bits
 * against the target, computed on a freshly simulated batch per evaluation,
 * scalarized against the fraction of non-blocked weights.
 */

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lutbnn/core.hpp"
#include "lutbnn/rng.hpp"
#include "lutbnn/sim.hpp"

namespace lutbnn {

struct GaConfig {
    std::size_t population_size = 200;
    std::size_t generations = 500;
    double crossover_prob = 0.5;
    double mutation_prob = 0.2;
    /// Unset means 1 / genome length.
    std::optional<double> per_gene_mutation_rate;
    std::size_t tournament_size = 3;
    std::size_t elite_count = 5;
    std::size_t eval_good = 200;
    std::size_t eval_ugly = 200;
    double accuracy_weight = 10.0;
    double size_weight = 1.0;
    std::uint64_t rng_seed = 1;
    bool resample_each_eval = true;
    /// Stop once the best individual reaches this training accuracy.
    std::optional<double> target_accuracy;

    void validate() const;
    double gene_rate(std::size_t genome_len) const;
    friend bool operator==(const GaConfig&, const GaConfig&) = default;
};

struct FitnessScore {
    double accuracy = 0.0;
    std::size_t nonzero = 0;
    double scalar = 0.0;
    friend bool operator==(const FitnessScore&, const FitnessScore&) = default;
};

struct GenerationRecord {
    std::size_t generation = 0;
    double best_accuracy = 0.0;  // of the best-scalar individual
    double mean_accuracy = 0.0;
    double best_scalar = 0.0;
    std::size_t best_nonzero = 0;
    double best_nonzero_fraction = 0.0;
    double seconds = 0.0;  // wall clock; excluded from equality

    bool same_result(const GenerationRecord& o) const {
        return generation == o.generation && best_accuracy == o.best_accuracy && mean_accuracy == o.mean_accuracy &&
               best_scalar == o.best_scalar && best_nonzero == o.best_nonzero &&
               best_nonzero_fraction == o.best_nonzero_fraction;
    }
};

/// Rows: true Good / Ugly / Noise. Columns: predicted Good / Ugly / Either.
struct ConfusionMatrix {
    std::array<std::array<std::size_t, 3>, 3> counts{};

    std::size_t row_sum(TruthLabel truth) const;
    std::size_t total() const;
    /// Fraction of Good/Ugly frames predicted as their own class.
    double accuracy() const;
    std::string to_string() const;
};

using Bits = std::vector<std::uint8_t>;

/// Fraction of positions where the tuples agree.
double score_prediction(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> target);
Bits one_hot_bits(std::span<const NeuronValue> output);
Bits target_bits(TruthLabel label);

FitnessScore scalarize(double accuracy, std::size_t nonzero, std::size_t total_weights, const GaConfig& cfg);

/// Mean partial-credit score over Good/Ugly frames; zero if every prediction is the same.
FitnessScore evaluate_fitness(const Genome& genome, std::span<const Waveform> dataset, const GaConfig& cfg);

/// Index of the scalar-fittest of k uniform draws with replacement (first drawn wins ties).
/// With k >= population size the whole population competes and the first best index wins.
std::size_t tournament_select(std::span<const FitnessScore> scores, std::size_t k, Engine& rng);

Genome random_genome(const NetworkShape& shape, Engine& rng);
Genome mutate(Genome genome, double per_gene_rate, Engine& rng);
/// Two-point crossover swapping the half-open gene range [cut_lo, cut_hi).
std::pair<Genome, Genome> crossover_at(const Genome& a, const Genome& b, std::size_t cut_lo, std::size_t cut_hi);
std::pair<Genome, Genome> crossover(const Genome& a, const Genome& b, Engine& rng);

ConfusionMatrix confusion_matrix(const Genome& genome, std::span<const Waveform> dataset, unsigned workers = 1);

/// Complete resumable state of a run between generations.
struct EvolutionState {
    NetworkShape shape;
    GaConfig ga;
    SimConfig sim;
    std::size_t generation = 0;  // index of `population`, not yet evaluated
    std::vector<Genome> population;
    Engine rng;  // variation stream
    std::vector<GenerationRecord> records;
    std::optional<Genome> best;
    FitnessScore best_score;
    bool done = false;
};

EvolutionState initial_state(const NetworkShape& shape, const GaConfig& ga, const SimConfig& sim);

/// Evaluates the pending generation, appends its record, then either marks the
/// run done or breeds the next population.
void advance(EvolutionState& state, unsigned workers = 1);

struct EvolveOptions {
    unsigned workers = 1;
    std::function<void(const EvolutionState&)> on_generation;
};

struct EvolveResult {
    Genome best;
    FitnessScore best_score;
    std::vector<GenerationRecord> records;
};

EvolveResult evolve(const NetworkShape& shape, const GaConfig& ga, const SimConfig& sim, const EvolveOptions& opts = {});
EvolveResult run_to_completion(EvolutionState state, const EvolveOptions& opts = {});

/// Deterministic metrics CSV (no wall-clock column).
std::string metrics_csv(std::span<const GenerationRecord> records);
std::string timing_csv(std::span<const GenerationRecord> records);
inline constexpr std::string_view kMetricsHeader =
    "generation,best_accuracy,mean_accuracy,best_scalar,best_nonzero,best_nonzero_fraction";

/// Checkpoint: JSON envelope with an FNV-1a checksum over the payload.
std::string checkpoint_to_text(const EvolutionState& state);
EvolutionState checkpoint_from_text(std::string_view text);

}  // namespace lutbnn
