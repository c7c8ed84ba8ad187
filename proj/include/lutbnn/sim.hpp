#pragma once
/**
 * @file sim.hpp
 * @brief Synthetic SiPM frames: single pulses, pile-up doubles and uniform noise.
 *
 * Pulses follow a peak-normalized double exponential on top of a constant
 * baseline with Gaussian noise, digitized to 12 bits.
 */

#include <cstdint>
#include <string_view>
#include <vector>

#include "lutbnn/core.hpp"
#include "lutbnn/rng.hpp"

namespace lutbnn {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    friend bool operator==(const Interval&, const Interval&) = default;
};

struct PulseParams {
    double amplitude = 0.0;  // peak height, ADC counts
    double t0 = 0.0;         // onset, samples
    double tau_rise = 1.0;   // samples
    double tau_fall = 2.0;   // samples

    /// Throws std::invalid_argument unless amplitude >= 0 and 0 < tau_rise < tau_fall.
    void validate() const;
};

struct SimConfig {
    std::size_t frame_len = 128;
    double baseline = 200.0;
    double noise_sigma = 8.0;
    Interval amplitude{300.0, 3500.0};
    Interval tau_rise{1.5, 3.0};
    Interval tau_fall{15.0, 30.0};
    Interval t0{10.0, 40.0};
    Interval pileup_gap{4.0, 50.0};
    std::uint64_t rng_seed = 1;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
    friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

enum class TruthLabel { Good, Ugly, Noise };

std::string_view to_string(TruthLabel label);
TruthLabel truth_label_from_string(std::string_view name);

struct Waveform {
    std::vector<RawSample> samples;
    TruthLabel label = TruthLabel::Noise;
    std::vector<PulseParams> pulses;  // generator metadata, not serialized

    std::vector<InputSample> quantized() const { return quantize_frame(samples); }
};

/// Peak-normalized double exponential; zero before onset.
double double_exp(double t, const PulseParams& p);

/// Round half up, then clip to the 12-bit range.
RawSample digitize(double value);

PulseParams draw_pulse(const SimConfig& cfg, Engine& rng);

/// Renders baseline + pulses + noise into a digitized frame.
std::vector<RawSample> render(const SimConfig& cfg, std::span<const PulseParams> pulses, Engine& rng);

Waveform gen_good(const SimConfig& cfg, Engine& rng);
Waveform gen_ugly(const SimConfig& cfg, Engine& rng);
Waveform gen_noise(const SimConfig& cfg, Engine& rng);

/// n_good Good frames, then n_ugly Ugly, then n_noise Noise. Frame i draws
/// from the stream (cfg.rng_seed, i), so the batch is independent of `workers`.
std::vector<Waveform> gen_batch(const SimConfig& cfg, std::size_t n_good, std::size_t n_ugly, std::size_t n_noise,
                                unsigned workers = 1);

}  // namespace lutbnn
