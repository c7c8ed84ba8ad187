#include "lutbnn/dataset_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstring>

#include "lutbnn/config.hpp"
#include "lutbnn/genome_io.hpp"

namespace lutbnn {

namespace {

constexpr std::string_view kTextMagic = "# lutbnn-dataset v1";
constexpr std::string_view kBinaryMagic = "LBDS";
constexpr std::uint32_t kBinaryVersion = 1;

std::string config_line(const SimConfig& cfg) { return to_json(cfg).dump(); }

SimConfig parse_config(std::string_view text) {
    try {
        return sim_from_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("dataset: bad config header: ") + e.what());
    }
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>(v >> 8));
}

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}
    std::string_view take(std::size_t n) {
        if (bytes_.size() - pos_ < n) throw std::invalid_argument("dataset: truncated binary file");
        auto s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    std::uint32_t u32() {
        auto s = take(4);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(s[static_cast<std::size_t>(i)]);
        return v;
    }
    std::uint16_t u16() {
        auto s = take(2);
        return static_cast<std::uint16_t>(static_cast<unsigned char>(s[0]) | (static_cast<unsigned char>(s[1]) << 8));
    }
    std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
    bool at_end() const { return pos_ == bytes_.size(); }

private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

void check_counts(const Dataset& ds, std::size_t good, std::size_t ugly, std::size_t noise) {
    if (ds.count(TruthLabel::Good) != good || ds.count(TruthLabel::Ugly) != ugly || ds.count(TruthLabel::Noise) != noise)
        throw std::invalid_argument("dataset: frame labels do not match the header counts");
}

}  // namespace

std::size_t Dataset::count(TruthLabel label) const {
    return static_cast<std::size_t>(
        std::count_if(frames.begin(), frames.end(), [label](const Waveform& w) { return w.label == label; }));
}

std::string dataset_to_text(const Dataset& ds) {
    std::string out(kTextMagic);
    out += "\n# config " + config_line(ds.config) + "\n";
    out += "# counts good=" + std::to_string(ds.count(TruthLabel::Good)) +
           " ugly=" + std::to_string(ds.count(TruthLabel::Ugly)) + " noise=" + std::to_string(ds.count(TruthLabel::Noise)) +
           "\n";
    for (const Waveform& w : ds.frames) {
        out += to_string(w.label);
        for (RawSample s : w.samples) {
            out += ',';
            out += std::to_string(s.value());
        }
        out += '\n';
    }
    return out;
}

Dataset dataset_from_text(std::string_view text) {
    Dataset ds;
    std::size_t good = 0, ugly = 0, noise = 0;
    bool have_config = false, have_counts = false;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line_no == 1) {
            if (line != kTextMagic) throw std::invalid_argument("dataset: missing '# lutbnn-dataset v1' header");
            continue;
        }
        if (line.empty()) continue;
        if (line.starts_with("# config ")) {
            ds.config = parse_config(line.substr(9));
            have_config = true;
            continue;
        }
        if (line.starts_with("# counts ")) {
            if (std::sscanf(std::string(line).c_str(), "# counts good=%zu ugly=%zu noise=%zu", &good, &ugly, &noise) != 3)
                throw std::invalid_argument("dataset: malformed counts line");
            have_counts = true;
            continue;
        }
        if (line.starts_with('#')) continue;

        const auto where = "dataset line " + std::to_string(line_no) + ": ";
        Waveform w;
        const auto comma = line.find(',');
        w.label = truth_label_from_string(line.substr(0, comma));
        std::string_view rest = comma == std::string_view::npos ? std::string_view{} : line.substr(comma + 1);
        while (!rest.empty()) {
            const auto c = rest.find(',');
            const auto tok = rest.substr(0, c);
            int v = -1;
            auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (ec != std::errc{} || ptr != tok.data() + tok.size() || v < 0 || v > kMaxRaw)
                throw std::invalid_argument(where + "sample '" + std::string(tok) + "' is not in 0..4095");
            w.samples.emplace_back(v);
            rest = c == std::string_view::npos ? std::string_view{} : rest.substr(c + 1);
        }
        if (have_config && w.samples.size() != ds.config.frame_len)
            throw std::invalid_argument(where + "expected " + std::to_string(ds.config.frame_len) + " samples, got " +
                                        std::to_string(w.samples.size()));
        ds.frames.push_back(std::move(w));
    }
    if (!have_config || !have_counts) throw std::invalid_argument("dataset: missing config or counts header");
    check_counts(ds, good, ugly, noise);
    return ds;
}

std::string dataset_to_binary(const Dataset& ds) {
    std::string out(kBinaryMagic);
    put_u32(out, kBinaryVersion);
    put_u32(out, static_cast<std::uint32_t>(ds.config.frame_len));
    put_u32(out, static_cast<std::uint32_t>(ds.count(TruthLabel::Good)));
    put_u32(out, static_cast<std::uint32_t>(ds.count(TruthLabel::Ugly)));
    put_u32(out, static_cast<std::uint32_t>(ds.count(TruthLabel::Noise)));
    const std::string cfg = config_line(ds.config);
    put_u32(out, static_cast<std::uint32_t>(cfg.size()));
    out += cfg;
    for (const Waveform& w : ds.frames) {
        if (w.samples.size() != ds.config.frame_len) throw std::invalid_argument("dataset: frame length mismatch");
        out.push_back(static_cast<char>(w.label));
        for (RawSample s : w.samples) put_u16(out, s.value());
    }
    return out;
}

Dataset dataset_from_binary(std::string_view bytes) {
    Reader in(bytes);
    if (in.take(4) != kBinaryMagic) throw std::invalid_argument("dataset: not a binary dataset");
    if (in.u32() != kBinaryVersion) throw std::invalid_argument("dataset: unsupported binary version");
    const std::size_t frame_len = in.u32();
    const std::size_t good = in.u32(), ugly = in.u32(), noise = in.u32();
    Dataset ds;
    ds.config = parse_config(in.take(in.u32()));
    if (ds.config.frame_len != frame_len) throw std::invalid_argument("dataset: frame_len disagrees with config");
    for (std::size_t f = 0; f < good + ugly + noise; ++f) {
        Waveform w;
        const std::uint8_t label = in.u8();
        if (label > 2) throw std::invalid_argument("dataset: bad label byte");
        w.label = static_cast<TruthLabel>(label);
        w.samples.reserve(frame_len);
        for (std::size_t i = 0; i < frame_len; ++i) {
            const std::uint16_t v = in.u16();
            if (v > kMaxRaw) throw std::invalid_argument("dataset: sample out of 12-bit range");
            w.samples.emplace_back(v);
        }
        ds.frames.push_back(std::move(w));
    }
    if (!in.at_end()) throw std::invalid_argument("dataset: trailing bytes");
    check_counts(ds, good, ugly, noise);
    return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path, DatasetFormat format) {
    write_file(path, format == DatasetFormat::Text ? dataset_to_text(ds) : dataset_to_binary(ds));
}

Dataset load_dataset(const std::filesystem::path& path) {
    const std::string bytes = read_file(path);
    try {
        if (std::string_view(bytes).starts_with(kBinaryMagic)) return dataset_from_binary(bytes);
        return dataset_from_text(bytes);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path.string() + ": " + e.what());
    }
}

}  // namespace lutbnn
