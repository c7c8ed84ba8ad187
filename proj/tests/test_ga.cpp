#include <doctest.h>

#include <cmath>
#include <random>

#include "lutbnn/ga.hpp"
#include "oracle.hpp"

using namespace lutbnn;

namespace {

Waveform frame(TruthLabel label, int raw) {
    Waveform w;
    w.label = label;
    w.samples = {RawSample(raw)};
    return w;
}

// 1-1-2 net: the hidden neuron bins the sample; output 0 passes it, output 1
// applies `second` to it.
Genome probe_net(WeightCode second) {
    Genome g(NetworkShape(1, {1}, 2));
    g.set(0, 0, 0, WeightCode::pass());
    g.set(1, 0, 0, WeightCode::pass());
    g.set(1, 1, 0, second);
    return g;
}

GaConfig small_ga() {
    GaConfig cfg;
    cfg.population_size = 16;
    cfg.generations = 6;
    cfg.elite_count = 2;
    cfg.eval_good = 10;
    cfg.eval_ugly = 10;
    cfg.rng_seed = 123;
    return cfg;
}

const NetworkShape kSmallShape(128, {8, 4}, 2);

}  // namespace

TEST_CASE("score_prediction") {
    const Bits t{1, 0};
    CHECK(score_prediction(Bits{1, 0}, t) == 1.0);
    CHECK(score_prediction(Bits{1, 1}, t) == 0.5);
    CHECK(score_prediction(Bits{0, 0}, t) == 0.5);
    CHECK(score_prediction(Bits{0, 1}, t) == 0.0);
    const Bits mnist{0, 0, 0, 0, 0, 0, 0, 0, 0, 1};
    CHECK(score_prediction(mnist, mnist) == 1.0);
    CHECK(score_prediction(Bits{0, 0, 0, 0, 0, 0, 1, 0, 0, 1}, mnist) == doctest::Approx(0.9).epsilon(1e-15));
    CHECK_THROWS_AS(score_prediction(Bits{1}, t), std::invalid_argument);
    CHECK_THROWS_AS(score_prediction(Bits{}, Bits{}), std::invalid_argument);

    SUBCASE("symmetric, bounded, steps of 1/len") {
        std::mt19937_64 rng(1);
        std::uniform_int_distribution<int> bit(0, 1);
        for (int trial = 0; trial < 1000; ++trial) {
            const std::size_t len = 1 + trial % 12;
            Bits a(len), b(len);
            for (auto& x : a) x = static_cast<std::uint8_t>(bit(rng));
            for (auto& x : b) x = static_cast<std::uint8_t>(bit(rng));
            const double s = score_prediction(a, b);
            REQUIRE(s == score_prediction(b, a));
            REQUIRE(s >= 0.0);
            REQUIRE(s <= 1.0);
            const double steps = s * static_cast<double>(len);
            REQUIRE(std::abs(steps - std::round(steps)) < 1e-9);
        }
    }
}

TEST_CASE("one_hot_bits") {
    CHECK(one_hot_bits(std::vector{NeuronValue(0), NeuronValue(3)}) == Bits{0, 1});
    CHECK(one_hot_bits(std::vector{NeuronValue(1), NeuronValue(1)}) == Bits{0, 0});
    CHECK(one_hot_bits(std::vector{NeuronValue(2), NeuronValue(2)}) == Bits{1, 1});
}

TEST_CASE("evaluate_fitness") {
    GaConfig cfg;
    SUBCASE("constant outputs score zero") {
        const std::vector<Waveform> ds{frame(TruthLabel::Good, 4095), frame(TruthLabel::Ugly, 0)};
        const FitnessScore s = evaluate_fitness(Genome(NetworkShape(1, {1}, 2)), ds, cfg);
        CHECK(s.accuracy == 0.0);
        CHECK(s.nonzero == 0);
        // Neg on both outputs is constant (both on) for any sample too.
        Genome neg(NetworkShape(1, {1}, 2));
        neg.set(1, 0, 0, WeightCode::neg());
        neg.set(1, 1, 0, WeightCode::neg());
        CHECK(evaluate_fitness(neg, ds, cfg).accuracy == 0.0);
    }
    SUBCASE("perfect classifier") {
        const std::vector<Waveform> ds{frame(TruthLabel::Good, 4095), frame(TruthLabel::Ugly, 0),
                                       frame(TruthLabel::Good, 4000), frame(TruthLabel::Ugly, 100)};
        const FitnessScore s = evaluate_fitness(probe_net(WeightCode::neg()), ds, cfg);
        CHECK(s.accuracy == 1.0);
        CHECK(s.nonzero == 3);
        CHECK(s.scalar == doctest::Approx(cfg.accuracy_weight - cfg.size_weight * 1.0));
    }
    SUBCASE("hand-built four-frame set") {
        // probe_net(Incr) predicts (1,1) at 127, (0,0) at 0 and (0,1) at 50.
        const std::vector<Waveform> ds{frame(TruthLabel::Good, 127 * 32), frame(TruthLabel::Ugly, 0),
                                       frame(TruthLabel::Ugly, 50 * 32), frame(TruthLabel::Ugly, 127 * 32)};
        // 0.5 + 0.5 + 1.0 + 0.5
        CHECK(evaluate_fitness(probe_net(WeightCode::incr()), ds, cfg).accuracy == 0.625);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(evaluate_fitness(probe_net(WeightCode::neg()), std::vector<Waveform>{}, cfg),
                        std::invalid_argument);
        CHECK_THROWS_AS(evaluate_fitness(probe_net(WeightCode::neg()), std::vector{frame(TruthLabel::Noise, 0)}, cfg),
                        std::invalid_argument);
    }
}

TEST_CASE("scalarization prefers smaller genomes at equal accuracy") {
    GaConfig cfg;
    for (std::size_t n = 0; n < 100; ++n) {
        CHECK(scalarize(0.7, n, 5184, cfg).scalar > scalarize(0.7, n + 1, 5184, cfg).scalar);
    }
    CHECK(scalarize(0.5, 2592, 5184, cfg).scalar == doctest::Approx(10 * 0.5 - 0.5));
}

TEST_CASE("tournament_select") {
    std::vector<FitnessScore> scores(10);
    for (std::size_t i = 0; i < scores.size(); ++i) scores[i].scalar = static_cast<double>((i * 7) % 10);
    Engine rng(5);
    SUBCASE("k = N returns the global best") {
        for (int i = 0; i < 100; ++i) CHECK(tournament_select(scores, 10, rng) == 7);  // 7*7 % 10 == 9
    }
    SUBCASE("k = 1 is a uniform pick") {
        std::vector<int> hits(10);
        for (int i = 0; i < 10000; ++i) ++hits[tournament_select(scores, 1, rng)];
        for (int h : hits) CHECK(std::abs(h - 1000) < 4 * std::sqrt(10000 * 0.1 * 0.9));
    }
    SUBCASE("win rate of the best matches 1 - (1 - 1/N)^k") {
        for (std::size_t k : {2, 3, 5}) {
            const double p = 1.0 - std::pow(1.0 - 0.1, static_cast<double>(k));
            int wins = 0;
            const int n = 10000;
            for (int i = 0; i < n; ++i) wins += tournament_select(scores, k, rng) == 7;
            CHECK(std::abs(wins - n * p) <= 3 * std::sqrt(n * p * (1 - p)));
        }
    }
    CHECK_THROWS_AS(tournament_select(std::vector<FitnessScore>{}, 3, rng), std::invalid_argument);
}

TEST_CASE("mutate") {
    std::mt19937_64 gen(2);
    const Genome g = oracle::random_genome(kSmallShape, gen);
    Engine rng(3);
    CHECK(mutate(g, 0.0, rng) == g);
    const Genome all = mutate(g, 1.0, rng);
    CHECK(all.shape() == g.shape());
    for (std::size_t i = 0; i < g.weights().size(); ++i) REQUIRE(all.weights()[i] != g.weights()[i]);

    SUBCASE("realized change fraction equals the rate") {
        const double rate = 0.05;
        std::size_t changed = 0, total = 0;
        for (int trial = 0; trial < 1000; ++trial) {
            const Genome m = mutate(g, rate, rng);
            for (std::size_t i = 0; i < g.weights().size(); ++i) changed += m.weights()[i] != g.weights()[i];
            total += g.weights().size();
        }
        const double sigma = std::sqrt(rate * (1 - rate) / static_cast<double>(total));
        CHECK(std::abs(static_cast<double>(changed) / static_cast<double>(total) - rate) < 4 * sigma);
    }
    CHECK_THROWS_AS(mutate(g, 1.5, rng), std::invalid_argument);
}

TEST_CASE("crossover") {
    std::mt19937_64 gen(6);
    const Genome a = oracle::random_genome(kSmallShape, gen);
    const Genome b = oracle::random_genome(kSmallShape, gen);
    Engine rng(1);
    {
        auto [c1, c2] = crossover(a, a, rng);
        CHECK(c1 == a);
        CHECK(c2 == a);
    }
    {
        auto [c1, c2] = crossover_at(a, b, 0, a.weights().size());
        CHECK(c1 == b);
        CHECK(c2 == a);
    }
    SUBCASE("genes are conserved position by position") {
        for (int trial = 0; trial < 200; ++trial) {
            auto [c1, c2] = crossover(a, b, rng);
            for (std::size_t i = 0; i < a.weights().size(); ++i) {
                const bool straight = c1.weights()[i] == a.weights()[i] && c2.weights()[i] == b.weights()[i];
                const bool swapped = c1.weights()[i] == b.weights()[i] && c2.weights()[i] == a.weights()[i];
                REQUIRE((straight || swapped));
            }
        }
    }
    CHECK_THROWS_AS(crossover(a, Genome(NetworkShape(128, {8, 8}, 2)), rng), std::invalid_argument);
    CHECK_THROWS_AS(crossover_at(a, b, 5, 4), std::invalid_argument);
}

TEST_CASE("confusion_matrix") {
    const std::vector<Waveform> ds{frame(TruthLabel::Good, 4095), frame(TruthLabel::Good, 3900),
                                   frame(TruthLabel::Ugly, 0),    frame(TruthLabel::Ugly, 10),
                                   frame(TruthLabel::Ugly, 20),   frame(TruthLabel::Noise, 2000)};
    SUBCASE("perfect classifier gives a diagonal") {
        const ConfusionMatrix cm = confusion_matrix(probe_net(WeightCode::neg()), ds);
        CHECK(cm.counts[0] == std::array<std::size_t, 3>{2, 0, 0});
        CHECK(cm.counts[1] == std::array<std::size_t, 3>{0, 3, 0});
        CHECK(cm.row_sum(TruthLabel::Noise) == 1);
        CHECK(cm.accuracy() == 1.0);
    }
    SUBCASE("all-Block genome predicts Either only") {
        const ConfusionMatrix cm = confusion_matrix(Genome(NetworkShape(1, {1}, 2)), ds);
        for (const auto& row : cm.counts) {
            CHECK(row[0] == 0);
            CHECK(row[1] == 0);
        }
        CHECK(cm.row_sum(TruthLabel::Good) == 2);
        CHECK(cm.row_sum(TruthLabel::Ugly) == 3);
        CHECK(cm.total() == 6);
    }
    CHECK_THROWS_AS(confusion_matrix(Genome(NetworkShape(1, {1}, 2)), std::vector<Waveform>{}), std::invalid_argument);
    CHECK_THROWS_AS(confusion_matrix(Genome(NetworkShape(2, {1}, 2)), ds), std::invalid_argument);
}

TEST_CASE("evolve") {
    SimConfig sim;
    GaConfig cfg = small_ga();

    SUBCASE("generations = 0 returns the best of the initial population") {
        cfg.generations = 0;
        const EvolveResult r = evolve(kSmallShape, cfg, sim);
        REQUIRE(r.records.size() == 1);
        EvolutionState s = initial_state(kSmallShape, cfg, sim);
        advance(s);
        CHECK(s.done);
        CHECK(r.best == *s.best);
        CHECK(r.records[0].best_scalar == s.best_score.scalar);
    }
    SUBCASE("fixed seed reproduces the record stream, independent of workers") {
        const EvolveResult a = evolve(kSmallShape, cfg, sim, {.workers = 1});
        const EvolveResult b = evolve(kSmallShape, cfg, sim, {.workers = 3});
        CHECK(a.best == b.best);
        CHECK(metrics_csv(a.records) == metrics_csv(b.records));
        CHECK(a.records.size() == cfg.generations + 1);
        for (std::size_t i = 0; i < a.records.size(); ++i) CHECK(a.records[i].generation == i);
    }
    SUBCASE("elitism with a fixed evaluation set is monotone") {
        cfg.resample_each_eval = false;
        cfg.generations = 15;
        const EvolveResult r = evolve(kSmallShape, cfg, sim);
        for (std::size_t g = 1; g < r.records.size(); ++g)
            CHECK(r.records[g].best_scalar >= r.records[g - 1].best_scalar);
    }
    SUBCASE("population size constant, elites copied unchanged") {
        EvolutionState s = initial_state(kSmallShape, cfg, sim);
        const auto before = s.population;
        advance(s);
        CHECK(s.population.size() == cfg.population_size);
        CHECK(s.population[0] == *s.best);
        const bool from_previous = std::find(before.begin(), before.end(), s.population[1]) != before.end();
        CHECK(from_previous);
    }
    SUBCASE("target accuracy stops early") {
        cfg.target_accuracy = 0.0;
        CHECK(evolve(kSmallShape, cfg, sim).records.size() == 1);
    }
    SUBCASE("invalid configuration") {
        cfg.elite_count = cfg.population_size;
        CHECK_THROWS_AS(evolve(kSmallShape, cfg, sim), std::invalid_argument);
        CHECK_THROWS_AS(evolve(NetworkShape(64, {8}, 2), small_ga(), sim), std::invalid_argument);
    }
}

TEST_CASE("checkpoint round trip and resume") {
    SimConfig sim;
    GaConfig cfg = small_ga();
    const EvolveResult reference = evolve(kSmallShape, cfg, sim);

    EvolutionState s = initial_state(kSmallShape, cfg, sim);
    advance(s);
    advance(s);
    const std::string text = checkpoint_to_text(s);
    EvolutionState restored = checkpoint_from_text(text);
    CHECK(checkpoint_to_text(restored) == text);
    const EvolveResult resumed = run_to_completion(std::move(restored));
    CHECK(resumed.best == reference.best);
    REQUIRE(resumed.records.size() == reference.records.size());
    for (std::size_t i = 0; i < reference.records.size(); ++i)
        CHECK(resumed.records[i].same_result(reference.records[i]));

    SUBCASE("corruption is detected") {
        std::string bad = text;
        const auto pos = bad.find("\"population\":[\"") + 15;
        bad[pos] = bad[pos] == '0' ? '1' : '0';
        CHECK_THROWS_WITH_AS(checkpoint_from_text(bad), doctest::Contains("checksum"), std::invalid_argument);
        CHECK_THROWS_AS(checkpoint_from_text("{"), std::invalid_argument);
    }
}

TEST_CASE("metrics csv") {
    GenerationRecord r{3, 0.75, 0.5, 7.0, 100, 0.25, 1.5};
    const std::string csv = metrics_csv(std::vector{r});
    CHECK(csv == std::string(kMetricsHeader) + "\n3,0.75,0.5,7,100,0.25\n");
    CHECK(timing_csv(std::vector{r}) == "generation,seconds\n3,1.500000\n");
}
