#include "lutbnn/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "lutbnn/parallel.hpp"

namespace lutbnn {

namespace {

void check_interval(const Interval& r, std::string_view name, double min_lo) {
    if (!(r.lo <= r.hi)) throw std::invalid_argument("sim config: " + std::string(name) + " range is empty");
    if (r.lo < min_lo)
        throw std::invalid_argument("sim config: " + std::string(name) + " lower bound must be >= " +
                                    std::to_string(min_lo));
}

double uniform(Engine& rng, const Interval& r) {
    if (r.lo == r.hi) return r.lo;
    return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

// Time of the maximum of exp(-t/tf) - exp(-t/tr) and its raw height.
double peak_height(double tau_rise, double tau_fall) {
    const double t_peak = std::log(tau_fall / tau_rise) * tau_rise * tau_fall / (tau_fall - tau_rise);
    return std::exp(-t_peak / tau_fall) - std::exp(-t_peak / tau_rise);
}

}  // namespace

void PulseParams::validate() const {
    if (!(amplitude >= 0.0)) throw std::invalid_argument("pulse: amplitude must be >= 0");
    if (!(tau_rise > 0.0 && tau_rise < tau_fall)) throw std::invalid_argument("pulse: need 0 < tau_rise < tau_fall");
}

void SimConfig::validate() const {
    if (frame_len < 1) throw std::invalid_argument("sim config: frame_len must be >= 1");
    if (!(noise_sigma >= 0.0)) throw std::invalid_argument("sim config: noise_sigma must be >= 0");
    if (!std::isfinite(baseline)) throw std::invalid_argument("sim config: baseline must be finite");
    check_interval(amplitude, "amplitude", 0.0);
    check_interval(tau_rise, "tau_rise", 0.0);
    check_interval(tau_fall, "tau_fall", 0.0);
    check_interval(t0, "t0", 0.0);
    check_interval(pileup_gap, "pileup_gap", 0.0);
    if (!(tau_rise.lo > 0.0)) throw std::invalid_argument("sim config: tau_rise must be > 0");
    if (!(tau_rise.hi < tau_fall.lo)) throw std::invalid_argument("sim config: tau_rise range must lie below tau_fall");
    if (!(t0.hi < static_cast<double>(frame_len))) throw std::invalid_argument("sim config: t0 range must lie inside the frame");
}

std::string_view to_string(TruthLabel label) {
    switch (label) {
    case TruthLabel::Good: return "Good";
    case TruthLabel::Ugly: return "Ugly";
    case TruthLabel::Noise: return "Noise";
    }
    return "?";
}

TruthLabel truth_label_from_string(std::string_view name) {
    if (name == "Good") return TruthLabel::Good;
    if (name == "Ugly") return TruthLabel::Ugly;
    if (name == "Noise") return TruthLabel::Noise;
    throw std::invalid_argument("unknown frame label '" + std::string(name) + "'");
}

double double_exp(double t, const PulseParams& p) {
    if (t <= p.t0 || p.amplitude == 0.0) return 0.0;
    const double dt = t - p.t0;
    const double scale = p.amplitude / peak_height(p.tau_rise, p.tau_fall);
    return scale * (std::exp(-dt / p.tau_fall) - std::exp(-dt / p.tau_rise));
}

RawSample digitize(double value) {
    const double rounded = std::floor(value + 0.5);
    return RawSample(static_cast<int>(std::clamp(rounded, 0.0, static_cast<double>(kMaxRaw))));
}

PulseParams draw_pulse(const SimConfig& cfg, Engine& rng) {
    PulseParams p;
    p.amplitude = uniform(rng, cfg.amplitude);
    p.t0 = uniform(rng, cfg.t0);
    p.tau_rise = uniform(rng, cfg.tau_rise);
    p.tau_fall = uniform(rng, cfg.tau_fall);
    return p;
}

std::vector<RawSample> render(const SimConfig& cfg, std::span<const PulseParams> pulses, Engine& rng) {
    std::vector<RawSample> out(cfg.frame_len);
    std::normal_distribution<double> noise(0.0, cfg.noise_sigma > 0.0 ? cfg.noise_sigma : 1.0);
    std::vector<double> scales;
    scales.reserve(pulses.size());
    for (const PulseParams& p : pulses) scales.push_back(p.amplitude / peak_height(p.tau_rise, p.tau_fall));
    for (std::size_t i = 0; i < cfg.frame_len; ++i) {
        const double t = static_cast<double>(i);
        double v = cfg.baseline;
        for (std::size_t k = 0; k < pulses.size(); ++k) {
            const PulseParams& p = pulses[k];
            if (t <= p.t0 || p.amplitude == 0.0) continue;
            const double dt = t - p.t0;
            v += scales[k] * (std::exp(-dt / p.tau_fall) - std::exp(-dt / p.tau_rise));
        }
        if (cfg.noise_sigma > 0.0) v += noise(rng);
        out[i] = digitize(v);
    }
    return out;
}

Waveform gen_good(const SimConfig& cfg, Engine& rng) {
    Waveform w;
    w.label = TruthLabel::Good;
    w.pulses.push_back(draw_pulse(cfg, rng));
    w.samples = render(cfg, w.pulses, rng);
    return w;
}

Waveform gen_ugly(const SimConfig& cfg, Engine& rng) {
    Waveform w;
    w.label = TruthLabel::Ugly;
    const PulseParams first = draw_pulse(cfg, rng);
    PulseParams second = draw_pulse(cfg, rng);
    second.t0 = first.t0 + uniform(rng, cfg.pileup_gap);
    w.pulses = {first, second};
    w.samples = render(cfg, w.pulses, rng);
    return w;
}

Waveform gen_noise(const SimConfig& cfg, Engine& rng) {
    Waveform w;
    w.label = TruthLabel::Noise;
    w.samples.resize(cfg.frame_len);
    std::uniform_int_distribution<int> dist(0, kMaxRaw);
    for (auto& s : w.samples) s = RawSample(dist(rng));
    return w;
}

std::vector<Waveform> gen_batch(const SimConfig& cfg, std::size_t n_good, std::size_t n_ugly, std::size_t n_noise,
                                unsigned workers) {
    cfg.validate();
    std::vector<Waveform> batch(n_good + n_ugly + n_noise);
    parallel_for(batch.size(), workers, [&](std::size_t i) {
        Engine rng = make_engine(cfg.rng_seed, {kStreamFrame, i});
        if (i < n_good)
            batch[i] = gen_good(cfg, rng);
        else if (i < n_good + n_ugly)
            batch[i] = gen_ugly(cfg, rng);
        else
            batch[i] = gen_noise(cfg, rng);
    });
    return batch;
}

}  // namespace lutbnn
