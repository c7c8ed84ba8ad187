#pragma once
// Genome file: a JSON document holding the shape, the weight layout version
// and the weights as a string of digits 0..3.
//
//   {
//     "format": "lutbnn-genome",
//     "layout_version": 1,
//     "shape": { "input": 128, "hidden": [32, 32], "output": 2 },
//     "nonzero": 3811,
//     "weights": "0312..."
//   }
//
// "nonzero" is informational and checked on load.

#include <filesystem>
#include <string>
#include <string_view>

#include "lutbnn/core.hpp"

namespace lutbnn {

std::string genome_to_text(const Genome& genome);
Genome genome_from_text(std::string_view text);

void save_genome(const Genome& genome, const std::filesystem::path& path);
Genome load_genome(const std::filesystem::path& path);

/// Reads a whole file; throws std::runtime_error naming the path on failure.
std::string read_file(const std::filesystem::path& path);
/// Writes bytes verbatim; throws std::runtime_error naming the path on failure.
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace lutbnn
