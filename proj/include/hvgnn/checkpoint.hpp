#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "hvgnn/vgae.hpp"

// Versioned binary checkpoint:
//   magic "HVGNCKPT" | u32 version | u32 config length | config echo
//   (key=value lines) | u64 parameter count | parameters as f64, all
// little-endian.

namespace hvgnn {

static_assert(std::endian::native == std::endian::little, "checkpoint format assumes a little-endian host");

inline constexpr char checkpoint_magic[8] = {'H', 'V', 'G', 'N', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t checkpoint_version = 1;

namespace detail {

inline std::string config_echo(const ModelConfig& cfg) {
    std::ostringstream os;
    os << "geometry=" << geometry_name(cfg.geometry) << "\n";
    os << "d=" << cfg.d << "\n";
    os << "layers=" << cfg.layers << "\n";
    os << "feature_dim=" << cfg.feature_dim << "\n";
    os << "K=" << format_double(cfg.K) << "\n";
    os << "trainable_k=" << (cfg.trainable_k ? 1 : 0) << "\n";
    os << "fd_r=" << format_double(cfg.decoder.fd_r) << "\n";
    os << "fd_t=" << format_double(cfg.decoder.fd_t) << "\n";
    os << "n_classes=" << cfg.decoder.n_classes << "\n";
    os << "max_neighbors=" << cfg.max_neighbors << "\n";
    os << "n_mc=" << cfg.n_mc << "\n";
    os << "t_max=" << format_double(cfg.t_max) << "\n";
    return os.str();
}

inline std::map<std::string, std::string> parse_kv(const std::string& text) {
    std::map<std::string, std::string> out;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        out[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return out;
}

} // namespace detail

inline void save_checkpoint(const std::string& path, const ModelState& st) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("save_checkpoint: cannot open " + path + " for writing");
    out.write(checkpoint_magic, sizeof(checkpoint_magic));
    const std::uint32_t version = checkpoint_version;
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    const std::string cfg = detail::config_echo(st.cfg);
    const std::uint32_t cfg_len = static_cast<std::uint32_t>(cfg.size());
    out.write(reinterpret_cast<const char*>(&cfg_len), sizeof(cfg_len));
    out.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));
    const std::uint64_t count = st.params.size();
    out.write(reinterpret_cast<const char*>(&count), sizeof(count));
    out.write(reinterpret_cast<const char*>(st.params.data()), static_cast<std::streamsize>(count * sizeof(double)));
    if (!out) throw input_error("save_checkpoint: write failed for " + path);
}

/// Loads parameters into a state initialized from cfg; throws
/// configuration_error when the stored config echo disagrees with cfg.
inline ModelState load_checkpoint(const std::string& path, const ModelConfig& cfg) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("load_checkpoint: cannot open " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, checkpoint_magic, sizeof(magic)) != 0)
        throw parse_error("load_checkpoint: bad magic in " + path);
    std::uint32_t version = 0, cfg_len = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    if (!in || version != checkpoint_version) throw parse_error("load_checkpoint: unsupported version");
    in.read(reinterpret_cast<char*>(&cfg_len), sizeof(cfg_len));
    std::string echo(cfg_len, '\0');
    in.read(echo.data(), cfg_len);
    std::uint64_t count = 0;
    in.read(reinterpret_cast<char*>(&count), sizeof(count));
    if (!in) throw parse_error("load_checkpoint: truncated file " + path);

    ModelState st = init_model(cfg, 0);
    if (count != st.params.size())
        throw configuration_error("load_checkpoint: parameter count mismatch (checkpoint " + std::to_string(count) +
                                  ", config " + std::to_string(st.params.size()) + ")");
    const auto kv = detail::parse_kv(echo);
    auto expect = [&](const std::string& key, const std::string& val) {
        auto it = kv.find(key);
        if (it == kv.end() || it->second != val)
            throw configuration_error("load_checkpoint: config mismatch on " + key + " (checkpoint '" +
                                      (it == kv.end() ? std::string("<missing>") : it->second) + "', config '" + val +
                                      "')");
    };
    expect("geometry", geometry_name(cfg.geometry));
    expect("d", std::to_string(cfg.d));
    expect("layers", std::to_string(cfg.layers));
    expect("feature_dim", std::to_string(cfg.feature_dim));
    expect("n_classes", std::to_string(cfg.decoder.n_classes));
    expect("trainable_k", cfg.trainable_k ? "1" : "0");
    in.read(reinterpret_cast<char*>(st.params.data()), static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw parse_error("load_checkpoint: truncated parameter array in " + path);
    return st;
}

} // namespace hvgnn
