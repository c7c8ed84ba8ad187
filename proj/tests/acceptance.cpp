// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: acceptance [criterion numbers...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "lutbnn/compiled.hpp"
#include "lutbnn/core.hpp"
#include "lutbnn/ga.hpp"
#include "lutbnn/genome_io.hpp"
#include "lutbnn/hdl.hpp"
#include "lutbnn/sim.hpp"
#include "oracle.hpp"

using namespace lutbnn;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

// ---------------------------------------------------------------------------

Outcome criterion_cam() {
    const auto t = Clock::now();
    static constexpr int table[4][4] = {{0, 0, 0, 0}, {0, 1, 2, 3}, {1, 2, 3, 3}, {3, 2, 1, 0}};
    int bad = 0;
    for (int w = 0; w < 4; ++w)
        for (int x = 0; x < 4; ++x)
            bad += cam_multiply(WeightCode(w), NeuronValue(x)).value() != table[w][x];
    for (int w = 0; w < 4; ++w)
        for (int x = 0; x < 128; ++x) {
            const int v = first_layer_op(WeightCode(w), InputSample(x));
            const int expect = w == 0 ? 0 : w == 1 ? x : w == 2 ? std::min(2 * x, 127) : 127 - x;
            bad += v < 0 || v > 127 || v != expect;
        }
    const double s = seconds_since(t);
    return {bad == 0 && s < 1.0, std::to_string(16 + 512) + " cases, " + std::to_string(bad) + " mismatches, " +
                                     std::to_string(s) + " s"};
}

Outcome criterion_fitness() {
    const Bits t{1, 0};
    const Bits ten{0, 0, 0, 0, 0, 0, 0, 0, 0, 1};
    const double a = score_prediction(Bits{1, 0}, t), b = score_prediction(Bits{1, 1}, t),
                 c = score_prediction(Bits{0, 0}, t), d = score_prediction(Bits{0, 1}, t),
                 e = score_prediction(Bits{0, 0, 0, 0, 0, 0, 1, 0, 0, 1}, ten);
    const bool ok = a == 1.0 && b == 0.5 && c == 0.5 && d == 0.0 && e == 9.0 / 10.0;
    char buf[160];
    std::snprintf(buf, sizeof buf, "(1,0)->%g (1,1)->%g (0,0)->%g (0,1)->%g 10-tuple->%.17g", a, b, c, d, e);
    return {ok, buf};
}

Outcome criterion_broken_clock() {
    SimConfig sim;
    GaConfig ga;
    std::size_t checked = 0, failures = 0;
    const NetworkShape shape(128, {32, 32}, 2);
    std::vector<Genome> constant{Genome(shape)};
    // A fully blocked first layer makes every later value independent of the input.
    std::mt19937_64 rng(11);
    for (int k = 0; k < 4; ++k) {
        Genome g = oracle::random_genome(shape, rng, 0.3);
        for (std::size_t d = 0; d < 32; ++d)
            for (std::size_t s = 0; s < 128; ++s) g.set(0, d, s, WeightCode::block());
        constant.push_back(g);
    }
    for (std::size_t n : {1, 2, 5, 50}) {
        sim.rng_seed = n;
        const auto frames = gen_batch(sim, n, n, 0);
        for (const Genome& g : constant) {
            ++checked;
            failures += evaluate_fitness(g, frames, ga).accuracy != 0.0;
        }
    }
    return {failures == 0, std::to_string(checked) + " constant-output evaluations, " + std::to_string(failures) +
                               " non-zero accuracies"};
}

Outcome criterion_mirror() {
    const auto t = Clock::now();
    std::size_t cases = 0, mismatches = 0;
    std::mt19937_64 rng(5);
    const int corners[] = {0, 1, 63, 64, 126, 127};
    for (int trial = 0; trial < 40; ++trial) {
        const Genome g = oracle::random_genome(NetworkShape(4, {2}, 2), rng, 0.1 * (trial % 10));
        const NetlistMirror m = NetlistMirror::build(g);
        m.validate();
        for (int a : corners)
            for (int b : corners)
                for (int c : corners)
                    for (int d : corners) {
                        const std::vector<InputSample> x{InputSample(a), InputSample(b), InputSample(c), InputSample(d)};
                        ++cases;
                        mismatches += mirror_evaluate(m, x) != forward(g, x);
                    }
    }
    const NetworkShape big(128, {32, 32}, 2);
    std::uniform_int_distribution<int> sample(0, 127);
    std::uniform_int_distribution<int> flat(0, 127);
    for (int gi = 0; gi < 10; ++gi) {
        const Genome g = oracle::random_genome(big, rng, 0.1 * gi);
        const NetlistMirror m = NetlistMirror::build(g);
        m.validate();
        for (int i = 0; i < 1000; ++i) {
            std::vector<InputSample> x(128);
            if (i % 10 == 0) {
                std::fill(x.begin(), x.end(), InputSample(flat(rng)));
            } else {
                for (auto& v : x) v = InputSample(sample(rng));
            }
            ++cases;
            mismatches += mirror_evaluate(m, x) != forward(g, x);
        }
    }
    const double s = seconds_since(t);
    return {mismatches == 0 && s < 30.0, std::to_string(cases) + " inputs, " + std::to_string(mismatches) +
                                             " mismatches, " + std::to_string(s) + " s"};
}

Outcome criterion_emitter() {
    const Genome g = load_genome(std::string(LUTBNN_DATA_DIR) + "/example_genome.json");
    const EmittedDesign a = emit_entity(g, "example");
    const EmittedDesign b = emit_entity(g, "example");
    const bool same = a.package_text == b.package_text && a.entity_text == b.entity_text;
    const bool golden = a.package_text == read_file(std::string(LUTBNN_GOLDEN_DIR) + "/example_pkg.vhd") &&
                        a.entity_text == read_file(std::string(LUTBNN_GOLDEN_DIR) + "/example.vhd");
    std::mt19937_64 rng(8);
    const Genome big = oracle::random_genome(NetworkShape(128, {32, 32}, 2), rng);
    const bool big_same = emit_entity(big).entity_text == emit_entity(big).entity_text;
    return {same && golden && big_same, std::string("repeat identical: ") + (same && big_same ? "yes" : "no") +
                                            ", golden match: " + (golden ? "yes" : "no")};
}

Outcome criterion_elitism() {
    GaConfig ga;
    ga.generations = 100;
    ga.resample_each_eval = false;
    ga.eval_good = 50;
    ga.eval_ugly = 50;
    ga.rng_seed = 6;
    const auto r = evolve(NetworkShape(128, {32, 32}, 2), ga, SimConfig{}, {.workers = workers()});
    std::size_t drops = 0;
    for (std::size_t i = 1; i < r.records.size(); ++i) drops += r.records[i].best_scalar < r.records[i - 1].best_scalar;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%zu generations, best scalar %.6f -> %.6f, %zu decreases", r.records.size() - 1,
                  r.records.front().best_scalar, r.records.back().best_scalar, drops);
    return {drops == 0 && r.records.size() == 101, buf};
}

// ---------------------------------------------------------------------------
// Desk-scale training, shared by criteria 7, 8 and 9.

struct TrainingRun {
    std::uint64_t seed = 0;
    std::optional<Genome> best;
    std::vector<GenerationRecord> records;
    std::string metrics;
    double seconds = 0.0;
    double heldout_accuracy = 0.0;  // partial credit, as in training
    std::size_t heldout_frames = 0;
    ConfusionMatrix heldout;
};

constexpr std::size_t kRuns = 5;

// One-sided P(X >= k) for X ~ Binomial(n, 1/2).
double binomial_tail_half(std::size_t k, std::size_t n) {
    if (k == 0) return 1.0;
    double log_terms_max = -INFINITY;
    std::vector<double> logs;
    for (std::size_t i = k; i <= n; ++i) {
        const double l = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) - n * std::log(2.0);
        logs.push_back(l);
        log_terms_max = std::max(log_terms_max, l);
    }
    double sum = 0.0;
    for (double l : logs) sum += std::exp(l - log_terms_max);
    return std::exp(log_terms_max) * sum;
}

const std::vector<TrainingRun>& training_runs() {
    static const std::vector<TrainingRun> runs = [] {
        std::vector<TrainingRun> out;
        for (std::size_t i = 0; i < kRuns; ++i) {
            GaConfig ga;  // population 200, 500 generations, 200+200 frames per evaluation
            ga.rng_seed = 1000 + i;
            const auto t = Clock::now();
            const EvolveResult r = evolve(NetworkShape(128, {32, 32}, 2), ga, SimConfig{}, {.workers = workers()});
            TrainingRun run;
            run.seed = ga.rng_seed;
            run.seconds = seconds_since(t);
            run.best = r.best;
            run.records = r.records;
            run.metrics = metrics_csv(r.records);
            SimConfig held;
            held.rng_seed = 90000 + i;
            const auto frames = gen_batch(held, 2000, 2000, 0, workers());
            run.heldout_accuracy = evaluate_fitness(r.best, frames, ga).accuracy;
            run.heldout_frames = frames.size();
            run.heldout = confusion_matrix(r.best, frames, workers());
            std::filesystem::create_directories("acceptance_runs");
            const std::string stem = "acceptance_runs/seed_" + std::to_string(run.seed);
            write_file(stem + "_metrics.csv", run.metrics);
            save_genome(r.best, stem + "_genome.json");
            std::fprintf(stderr,
                         "  training run seed %llu: %.0f s, held-out accuracy %.4f (strict %.4f), nonzero %zu\n",
                         static_cast<unsigned long long>(run.seed), run.seconds, run.heldout_accuracy,
                         run.heldout.accuracy(), nonzero_weight_count(*run.best));
            out.push_back(std::move(run));
        }
        return out;
    }();
    return runs;
}

Outcome criterion_training() {
    const auto& runs = training_runs();
    // Budget is 30 min on 8 cores; scale by the cores actually available.
    const double budget = 30.0 * 60.0 * 8.0 / std::min(8u, workers());
    std::size_t good = 0;
    bool floors = true, in_time = true;
    std::ostringstream acc;
    for (const auto& r : runs) {
        // Each frame contributes two output bits; a random guesser matches each with probability 1/2.
        const double a = r.heldout_accuracy;
        const std::size_t n = 2 * r.heldout_frames;
        const std::size_t k = static_cast<std::size_t>(std::llround(a * static_cast<double>(n)));
        const double p = binomial_tail_half(k, n);
        good += a >= 0.65;
        floors = floors && p < 0.01;
        in_time = in_time && r.seconds <= budget;
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s%.4f(p=%.1e,%.0fs)", acc.tellp() ? " " : "", a, p, r.seconds);
        acc << buf;
    }
    return {good >= 3 && floors && in_time, "held-out accuracy " + acc.str() + "; " + std::to_string(good) +
                                                "/5 >= 0.65, all above floor: " + (floors ? "yes" : "no") +
                                                ", within time: " + (in_time ? "yes" : "no")};
}

struct CsvRow {
    std::size_t generation;
    double best_accuracy;
    double nonzero_fraction;
};

std::vector<CsvRow> parse_metrics(const std::string& csv) {
    std::vector<CsvRow> rows;
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::vector<std::string> f;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        if (f.size() != 6) throw std::runtime_error("metrics row has " + std::to_string(f.size()) + " fields");
        rows.push_back({std::stoul(f[0]), std::stod(f[1]), std::stod(f[5])});
    }
    return rows;
}

Outcome criterion_size_pressure() {
    const auto& runs = training_runs();
    std::size_t ok = 0;
    std::ostringstream detail;
    for (const auto& r : runs) {
        const auto rows = parse_metrics(r.metrics);
        double final_max = 0.0;
        for (const auto& row : rows) final_max = std::max(final_max, row.best_accuracy);
        // Plateau: first generation whose running best accuracy is within 0.02 of the final maximum.
        double running = 0.0;
        std::size_t plateau = 0;
        for (const auto& row : rows) {
            running = std::max(running, row.best_accuracy);
            if (running >= final_max - 0.02) {
                plateau = row.generation;
                break;
            }
        }
        const double at_plateau = rows[plateau].nonzero_fraction;
        const double at_end = rows.back().nonzero_fraction;
        ok += at_end < at_plateau;
        char buf[96];
        std::snprintf(buf, sizeof buf, "%sgen %zu %.4f->%.4f", detail.tellp() ? "; " : "", plateau, at_plateau, at_end);
        detail << buf;
    }
    return {ok == runs.size(), std::to_string(ok) + "/" + std::to_string(runs.size()) +
                                   " runs shrink after plateau (" + detail.str() + ")"};
}

Outcome criterion_noise_probe() {
    const auto& runs = training_runs();
    const auto best = std::max_element(runs.begin(), runs.end(), [](const auto& a, const auto& b) {
        return a.heldout_accuracy < b.heldout_accuracy;
    });
    SimConfig sim;
    sim.rng_seed = 777;
    const ConfusionMatrix cm = confusion_matrix(*best->best, gen_batch(sim, 5000, 5000, 5000, workers()), workers());
    bool ok = cm.total() == 15000;
    for (TruthLabel t : {TruthLabel::Good, TruthLabel::Ugly, TruthLabel::Noise}) ok = ok && cm.row_sum(t) == 5000;
    std::string m = cm.to_string();
    std::replace(m.begin(), m.end(), '\n', ' ');
    while (!m.empty() && m.back() == ' ') m.pop_back();
    return {ok, "seed " + std::to_string(best->seed) + ": " + m};
}

Outcome criterion_reproducibility() {
    GaConfig ga;
    ga.population_size = 24;
    ga.generations = 6;
    ga.eval_good = 40;
    ga.eval_ugly = 40;
    ga.rng_seed = 10;
    const NetworkShape shape(128, {32, 32}, 2);
    std::vector<std::string> genomes, metrics;
    for (unsigned w : {1u, 4u, 8u}) {
        const auto r = evolve(shape, ga, SimConfig{}, {.workers = w});
        genomes.push_back(genome_to_text(r.best));
        metrics.push_back(metrics_csv(r.records));
    }
    const bool ok = genomes[0] == genomes[1] && genomes[0] == genomes[2] && metrics[0] == metrics[1] &&
                    metrics[0] == metrics[2];
    return {ok, std::string("workers 1/4/8 genomes and metrics ") + (ok ? "identical" : "differ")};
}

}  // namespace

int main(int argc, char** argv) {
    const std::map<int, std::pair<std::string, std::function<Outcome()>>> criteria{
        {1, {"CAM exactness", criterion_cam}},
        {2, {"Fitness formula", criterion_fitness}},
        {3, {"Broken-clock rule", criterion_broken_clock}},
        {4, {"Mirror equivalence", criterion_mirror}},
        {5, {"Emitter determinism", criterion_emitter}},
        {6, {"Elitism monotonicity", criterion_elitism}},
        {7, {"Desk-scale training", criterion_training}},
        {8, {"Size pressure", criterion_size_pressure}},
        {9, {"Noise robustness probe", criterion_noise_probe}},
        {10, {"Reproducibility", criterion_reproducibility}},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
    if (selected.empty())
        for (const auto& [k, v] : criteria) selected.insert(k);

    int failed = 0;
    for (int id : selected) {
        const auto it = criteria.find(id);
        if (it == criteria.end()) {
            std::printf("FAIL %d unknown criterion\n", id);
            ++failed;
            continue;
        }
        Outcome o;
        try {
            o = it->second.second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, it->second.first.c_str(), o.detail.c_str());
        std::fflush(stdout);
        failed += !o.pass;
    }
    return failed == 0 ? 0 : 1;
}
