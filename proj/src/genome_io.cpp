#include "lutbnn/genome_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace lutbnn {

namespace {
constexpr std::string_view kFormat = "lutbnn-genome";
}

std::string genome_to_text(const Genome& genome) {
    const NetworkShape& shape = genome.shape();
    nlohmann::ordered_json doc;
    doc["format"] = kFormat;
    doc["layout_version"] = Genome::kLayoutVersion;
    doc["shape"] = {{"input", shape.input_len()}, {"hidden", shape.hidden()}, {"output", shape.output_len()}};
    doc["nonzero"] = nonzero_weight_count(genome);
    doc["weights"] = genome.digits();
    return doc.dump(2) + "\n";
}

Genome genome_from_text(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("genome: malformed JSON: ") + e.what());
    }
    if (!doc.is_object() || doc.value("format", "") != kFormat)
        throw std::invalid_argument("genome: missing or wrong \"format\" (expected lutbnn-genome)");
    if (doc.value("layout_version", -1) != Genome::kLayoutVersion)
        throw std::invalid_argument("genome: unsupported layout_version");
    try {
        const auto& s = doc.at("shape");
        NetworkShape shape(s.at("input").get<std::size_t>(), s.at("hidden").get<std::vector<std::size_t>>(),
                           s.at("output").get<std::size_t>());
        Genome genome = Genome::from_digits(std::move(shape), doc.at("weights").get<std::string>());
        if (doc.contains("nonzero") && doc["nonzero"].get<std::size_t>() != nonzero_weight_count(genome))
            throw std::invalid_argument("genome: \"nonzero\" does not match the weights");
        return genome;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("genome: ") + e.what());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

void save_genome(const Genome& genome, const std::filesystem::path& path) {
    write_file(path, genome_to_text(genome));
}

Genome load_genome(const std::filesystem::path& path) {
    try {
        return genome_from_text(read_file(path));
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path.string() + ": " + e.what());
    }
}

}  // namespace lutbnn
