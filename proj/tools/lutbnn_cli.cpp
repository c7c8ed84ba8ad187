// lutbnn command line: simulate, train, resume, evaluate, infer, emit.

#include <atomic>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lutbnn/config.hpp"
#include "lutbnn/dataset_io.hpp"
#include "lutbnn/ga.hpp"
#include "lutbnn/genome_io.hpp"
#include "lutbnn/hdl.hpp"

namespace fs = std::filesystem;
using namespace lutbnn;

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

struct CommonOpts {
    std::string config;
    std::optional<std::uint64_t> seed;
    unsigned workers = 1;
    std::string out;
};

RunConfig load_or_default(const std::string& path) {
    return path.empty() ? RunConfig{} : load_run_config(path);
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOpts {
    std::optional<std::size_t> good, ugly, noise;
    bool binary = false;
};

int cmd_simulate(const CommonOpts& c, const SimulateOpts& o) {
    RunConfig cfg = load_or_default(c.config);
    if (c.seed) cfg.sim.rng_seed = *c.seed;
    if (o.good) cfg.simulate.good = *o.good;
    if (o.ugly) cfg.simulate.ugly = *o.ugly;
    if (o.noise) cfg.simulate.noise = *o.noise;
    cfg.sim.validate();
    if (c.out.empty()) throw std::invalid_argument("--out: output dataset path required");

    Dataset ds;
    ds.config = cfg.sim;
    ds.frames = gen_batch(cfg.sim, cfg.simulate.good, cfg.simulate.ugly, cfg.simulate.noise, c.workers);
    save_dataset(ds, c.out, o.binary ? DatasetFormat::Binary : DatasetFormat::Text);
    std::cout << "wrote " << c.out << ": good=" << ds.count(TruthLabel::Good) << " ugly=" << ds.count(TruthLabel::Ugly)
              << " noise=" << ds.count(TruthLabel::Noise) << " total=" << ds.frames.size() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// train / resume

void write_outputs(const EvolutionState& st, const OutputPaths& out) {
    fs::create_directories(out.dir);
    write_file(out.metrics_path(), metrics_csv(st.records));
    write_file(out.timing_path(), timing_csv(st.records));
    if (st.best) save_genome(*st.best, out.genome_path());
}

void write_checkpoint(const EvolutionState& st, const OutputPaths& out) {
    fs::create_directories(out.dir);
    const fs::path tmp = out.checkpoint_path().string() + ".tmp";
    write_file(tmp, checkpoint_to_text(st));
    fs::rename(tmp, out.checkpoint_path());
}

int run_training(EvolutionState st, const OutputPaths& out, unsigned workers) {
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    fs::create_directories(out.dir);
    while (!st.done) {
        advance(st, workers);
        const GenerationRecord& r = st.records.back();
        std::fprintf(stderr, "gen %zu best_acc %.4f mean_acc %.4f nonzero %zu\n", r.generation, r.best_accuracy,
                     r.mean_accuracy, r.best_nonzero);
        if (st.done) break;
        if (g_stop) {
            write_outputs(st, out);
            write_checkpoint(st, out);
            std::fprintf(stderr, "interrupted; checkpoint written to %s\n", out.checkpoint_path().c_str());
            return 130;
        }
        if (out.checkpoint_every > 0 && st.generation % out.checkpoint_every == 0) {
            write_outputs(st, out);
            write_checkpoint(st, out);
        }
    }
    write_outputs(st, out);
    write_checkpoint(st, out);
    std::cout << "best genome " << out.genome_path().string() << ": accuracy " << st.best_score.accuracy
              << " nonzero " << st.best_score.nonzero << "/" << st.shape.total_weights() << " generations "
              << st.records.size() << "\n";
    return 0;
}

int cmd_train(const CommonOpts& c, const std::string& resume) {
    if (!resume.empty()) {
        EvolutionState st = checkpoint_from_text(read_file(resume));
        OutputPaths out = c.config.empty() ? OutputPaths{} : load_run_config(c.config).output;
        if (c.config.empty()) out.dir = fs::path(resume).parent_path();
        if (!c.out.empty()) out.dir = c.out;
        return run_training(std::move(st), out, c.workers);
    }
    RunConfig cfg = load_or_default(c.config);
    if (c.seed) cfg.ga.rng_seed = *c.seed;
    if (!c.out.empty()) cfg.output.dir = c.out;
    cfg.validate();
    return run_training(initial_state(cfg.shape, cfg.ga, cfg.sim), cfg.output, c.workers);
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateOpts {
    std::string genome, dataset, report;
    std::optional<std::size_t> good, ugly, noise;
};

int cmd_evaluate(const CommonOpts& c, const EvaluateOpts& o) {
    const Genome g = load_genome(o.genome);
    Dataset ds;
    if (!o.dataset.empty()) {
        ds = load_dataset(o.dataset);
    } else {
        RunConfig cfg = load_or_default(c.config);
        if (c.seed) cfg.sim.rng_seed = *c.seed;
        ds.config = cfg.sim;
        ds.frames = gen_batch(cfg.sim, o.good.value_or(cfg.simulate.good), o.ugly.value_or(cfg.simulate.ugly),
                              o.noise.value_or(cfg.simulate.noise), c.workers);
    }
    if (ds.frames.empty()) throw std::invalid_argument("dataset: no frames to evaluate");
    if (ds.config.frame_len != g.shape().input_len())
        throw std::invalid_argument("dataset: frame length " + std::to_string(ds.config.frame_len) +
                                    " does not match genome input " + std::to_string(g.shape().input_len()));

    const ConfusionMatrix cm = confusion_matrix(g, ds.frames, c.workers);
    std::cout << "frames " << cm.total() << "\n";
    std::cout << "accuracy " << cm.accuracy() << "\n";
    std::cout << cm.to_string();
    if (!o.report.empty()) {
        nlohmann::ordered_json j;
        j["genome"] = o.genome;
        j["frames"] = cm.total();
        j["accuracy"] = cm.accuracy();
        j["columns"] = {"Good", "Ugly", "Either"};
        j["rows"] = {"Good", "Ugly", "Either"};
        j["confusion"] = cm.counts;
        write_file(o.report, j.dump(2) + "\n");
    }
    return 0;
}

// ---------------------------------------------------------------------------
// infer

std::vector<RawSample> parse_frame(const std::string& text) {
    std::vector<RawSample> out;
    std::string cleaned = text;
    for (char& ch : cleaned)
        if (ch == ',' || ch == '\n' || ch == '\t' || ch == '\r') ch = ' ';
    std::istringstream in(cleaned);
    std::string tok;
    while (in >> tok) {
        std::size_t used = 0;
        long v = 0;
        try {
            v = std::stol(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != tok.size()) throw std::invalid_argument("frame: sample " + std::to_string(out.size()) + " '" + tok + "' is not an integer");
        if (v < 0 || v > 4095)
            throw std::invalid_argument("frame: sample " + std::to_string(out.size()) + " = " + tok + " outside [0,4095]");
        out.emplace_back(static_cast<std::uint16_t>(v));
    }
    return out;
}

int cmd_infer(const std::string& genome_path, const std::string& frame_text, const std::string& frame_file, bool trace) {
    const Genome g = load_genome(genome_path);
    if (frame_text.empty() == frame_file.empty()) throw std::invalid_argument("frame: give exactly one of --frame or --frame-file");
    const std::vector<RawSample> raw = parse_frame(frame_text.empty() ? read_file(frame_file) : frame_text);
    if (raw.size() != g.shape().input_len())
        throw std::invalid_argument("frame: " + std::to_string(raw.size()) + " samples, genome expects " +
                                    std::to_string(g.shape().input_len()));
    const std::vector<InputSample> x = quantize_frame(raw);
    std::vector<LayerTrace> layers;
    const std::vector<NeuronValue> y = forward(g, x, trace ? &layers : nullptr);
    if (trace) {
        for (std::size_t l = 0; l < layers.size(); ++l) {
            std::cout << "layer " << l + 1 << " sums";
            for (auto s : layers[l].sums) std::cout << ' ' << s;
            std::cout << "\nlayer " << l + 1 << " values";
            for (auto v : layers[l].values) std::cout << ' ' << static_cast<int>(v.value());
            std::cout << "\n";
        }
    }
    std::cout << to_string(classify(y));
    for (auto v : y) std::cout << ' ' << static_cast<int>(v.value());
    std::cout << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// emit

int cmd_emit(const std::string& genome_path, const std::string& out_dir, const std::string& name) {
    const Genome g = load_genome(genome_path);
    const EmittedDesign d = emit_entity(g, name);
    const fs::path dir = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
    fs::create_directories(dir);
    write_file(dir / (name + "_pkg.vhd"), d.package_text);
    write_file(dir / (name + ".vhd"), d.entity_text);
    const StructureSummary s = estimate_structure(g);
    std::cout << "wrote " << (dir / (name + "_pkg.vhd")).string() << " " << (dir / (name + ".vhd")).string() << "\n";
    std::cout << "input port bits " << d.input_port_bits << "\n";
    std::cout << "output port bits " << d.output_port_bits << "\n";
    std::cout << "adder depths";
    for (int depth : d.adder_tree_depths) std::cout << ' ' << depth;
    std::cout << "\nnonzero weights " << nonzero_weight_count(g) << "/" << g.shape().total_weights() << "\n";
    std::cout << "first-layer ops " << s.first_op_nodes << " cam " << s.cam_nodes << " adders " << s.adder_nodes
              << " comparators " << s.comparator_count << " silent neurons " << s.silent_neurons << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lutbnn: 2-bit LUT network trainer, evaluator and VHDL emitter"};
    app.require_subcommand(1);

    CommonOpts common;
    auto add_common = [&](CLI::App* sub, bool workers) {
        sub->add_option("--config", common.config, "run config file (JSON, comments allowed)");
        sub->add_option("--seed", common.seed, "override the relevant RNG seed");
        if (workers) sub->add_option("--workers", common.workers, "worker threads")->check(CLI::PositiveNumber);
    };

    SimulateOpts sim_opts;
    auto* simulate = app.add_subcommand("simulate", "write a simulated dataset");
    add_common(simulate, true);
    simulate->add_option("--out", common.out, "dataset path")->required();
    simulate->add_option("--good", sim_opts.good, "Good frames");
    simulate->add_option("--ugly", sim_opts.ugly, "Ugly frames");
    simulate->add_option("--noise", sim_opts.noise, "noise frames");
    simulate->add_flag("--binary", sim_opts.binary, "write the binary variant");

    std::string resume_path;
    auto* train = app.add_subcommand("train", "run genetic training");
    add_common(train, true);
    train->add_option("--out", common.out, "output directory (overrides output.dir)");
    train->add_option("--resume", resume_path, "continue from a checkpoint file");

    auto* resume = app.add_subcommand("resume", "continue training from a checkpoint");
    add_common(resume, true);
    resume->add_option("--out", common.out, "output directory");
    resume->add_option("--resume,checkpoint", resume_path, "checkpoint file")->required();

    EvaluateOpts eval_opts;
    auto* evaluate = app.add_subcommand("evaluate", "accuracy and confusion matrix of a genome");
    add_common(evaluate, true);
    evaluate->add_option("--genome", eval_opts.genome, "genome file")->required();
    evaluate->add_option("--dataset", eval_opts.dataset, "dataset file; omitted means simulate fresh frames");
    evaluate->add_option("--good", eval_opts.good, "fresh Good frames");
    evaluate->add_option("--ugly", eval_opts.ugly, "fresh Ugly frames");
    evaluate->add_option("--noise", eval_opts.noise, "fresh noise frames");
    evaluate->add_option("--report,--out", eval_opts.report, "write a JSON report");

    std::string genome_path, frame_text, frame_file, name = "bnn";
    bool trace = false;
    auto* infer = app.add_subcommand("infer", "classify one frame of raw samples");
    infer->add_option("--genome", genome_path, "genome file")->required();
    infer->add_option("--frame", frame_text, "comma separated raw samples");
    infer->add_option("--frame-file", frame_file, "file of raw samples");
    infer->add_flag("--trace", trace, "print per-layer sums and values");

    auto* emit = app.add_subcommand("emit", "write VHDL package and entity");
    emit->add_option("--genome", genome_path, "genome file")->required();
    emit->add_option("--out", common.out, "output directory");
    emit->add_option("--name", name, "design name");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (simulate->parsed()) return cmd_simulate(common, sim_opts);
        if (train->parsed() || resume->parsed()) return cmd_train(common, resume_path);
        if (evaluate->parsed()) return cmd_evaluate(common, eval_opts);
        if (infer->parsed()) return cmd_infer(genome_path, frame_text, frame_file, trace);
        if (emit->parsed()) return cmd_emit(genome_path, common.out, name);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
