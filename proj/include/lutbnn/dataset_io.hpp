#pragma once
/**
 * @file dataset_io.hpp
 * @brief Labeled frame files.
 *
 * Text variant (version 1):
 *
 *     # lutbnn-dataset v1
 *     # config {"frame_len":128,...}      (SimConfig echo, JSON, one line)
 *     # counts good=200 ugly=200 noise=0
 *     Good,201,199,...                    (label then frame_len samples)
 *
 * Binary variant (version 1, all integers little-endian):
 *
 *     "LBDS"  u32 version  u32 frame_len  u32 n_good  u32 n_ugly  u32 n_noise
 *     u32 config_len  config_len bytes of config JSON
 *     per frame: u8 label (0 Good, 1 Ugly, 2 Noise), frame_len x u16 sample
 */

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lutbnn/sim.hpp"

namespace lutbnn {

struct Dataset {
    SimConfig config;
    std::vector<Waveform> frames;

    std::size_t count(TruthLabel label) const;
};

enum class DatasetFormat { Text, Binary };

std::string dataset_to_text(const Dataset& ds);
Dataset dataset_from_text(std::string_view text);

std::string dataset_to_binary(const Dataset& ds);
Dataset dataset_from_binary(std::string_view bytes);

void save_dataset(const Dataset& ds, const std::filesystem::path& path, DatasetFormat format);
/// Detects the variant from the leading bytes.
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace lutbnn
