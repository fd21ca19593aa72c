#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "hoidet/adam.hpp"
#include "hoidet/model.hpp"

namespace hoidet {

inline void to_json(nlohmann::json& j, const ConvSpec& s) {
    j = {{"out_channels", s.out_channels}, {"stride", s.stride}};
}
inline void from_json(const nlohmann::json& j, ConvSpec& s) {
    j.at("out_channels").get_to(s.out_channels);
    j.at("stride").get_to(s.stride);
}
inline void to_json(nlohmann::json& j, const ModelConfig& c) {
    j = {{"input_channels", c.input_channels},
         {"num_verbs", c.num_verbs},
         {"kernel", c.kernel},
         {"trunk", c.trunk}};
}
inline void from_json(const nlohmann::json& j, ModelConfig& c) {
    c.input_channels = j.value("input_channels", c.input_channels);
    c.num_verbs = j.value("num_verbs", c.num_verbs);
    c.kernel = j.value("kernel", c.kernel);
    if (j.contains("trunk")) j.at("trunk").get_to(c.trunk);
}

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Digest of the canonical (sorted-key, compact) JSON form of the model
/// configuration; a checkpoint only loads against the configuration it was
/// written with.
inline std::uint64_t config_digest(const ModelConfig& c) {
    return fnv1a64(nlohmann::json(c).dump());
}

class CheckpointError : public std::runtime_error {
  public:
    enum class Code { Io, BadMagic, BadVersion, ConfigMismatch, BadLayout, Truncated };

    CheckpointError(Code code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    Code code() const { return code_; }

  private:
    Code code_;
};

namespace detail {

constexpr char kCheckpointMagic[8] = {'H', 'O', 'I', 'D', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kCheckpointVersion = 1;

inline void write_u32(std::ostream& os, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b, 4);
}

inline void write_u64(std::ostream& os, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b, 8);
}

inline void write_f64(std::ostream& os, double v) {
    write_u64(os, std::bit_cast<std::uint64_t>(v));
}

inline std::uint32_t read_u32(std::istream& is) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4))
        throw CheckpointError(CheckpointError::Code::Truncated, "checkpoint ends mid-field");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

inline std::uint64_t read_u64(std::istream& is) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8))
        throw CheckpointError(CheckpointError::Code::Truncated, "checkpoint ends mid-field");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

inline double read_f64(std::istream& is) { return std::bit_cast<double>(read_u64(is)); }

inline void write_f64_block(std::ostream& os, const std::vector<double>& v) {
    for (double x : v) write_f64(os, x);
}

inline void read_f64_block(std::istream& is, std::vector<double>& v) {
    for (double& x : v) x = read_f64(is);
}

}  // namespace detail

inline void save_checkpoint(const std::string& path, const Model& model, const Adam& opt) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw CheckpointError(CheckpointError::Code::Io, "cannot open " + path);
    os.write(detail::kCheckpointMagic, 8);
    detail::write_u32(os, detail::kCheckpointVersion);
    detail::write_u64(os, config_digest(model.config()));

    const Parameters& p = model.params();
    detail::write_u32(os, static_cast<std::uint32_t>(p.count()));
    for (std::size_t t = 0; t < p.count(); ++t) {
        const Tensor& tensor = p[t];
        detail::write_u32(os, static_cast<std::uint32_t>(tensor.name.size()));
        os.write(tensor.name.data(), static_cast<std::streamsize>(tensor.name.size()));
        detail::write_u32(os, static_cast<std::uint32_t>(tensor.shape.size()));
        for (int d : tensor.shape) detail::write_u32(os, static_cast<std::uint32_t>(d));
        detail::write_f64_block(os, tensor.data);
    }

    detail::write_u64(os, opt.step_count());
    detail::write_f64(os, opt.config().lr);
    detail::write_f64(os, opt.config().beta1);
    detail::write_f64(os, opt.config().beta2);
    detail::write_f64(os, opt.config().epsilon);
    detail::write_f64_block(os, opt.m());
    detail::write_f64_block(os, opt.v());
    if (!os) throw CheckpointError(CheckpointError::Code::Io, "write failed for " + path);
}

struct LoadedCheckpoint {
    Model model;
    Adam optimizer;
};

inline LoadedCheckpoint load_checkpoint(const std::string& path, const ModelConfig& config) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw CheckpointError(CheckpointError::Code::Io, "cannot open " + path);

    char magic[8];
    if (!is.read(magic, 8))
        throw CheckpointError(CheckpointError::Code::Truncated, "checkpoint shorter than header");
    if (std::memcmp(magic, detail::kCheckpointMagic, 8) != 0)
        throw CheckpointError(CheckpointError::Code::BadMagic, "not a checkpoint file");
    const std::uint32_t version = detail::read_u32(is);
    if (version != detail::kCheckpointVersion)
        throw CheckpointError(CheckpointError::Code::BadVersion,
                              "unsupported checkpoint version " + std::to_string(version));
    const std::uint64_t digest = detail::read_u64(is);
    if (digest != config_digest(config))
        throw CheckpointError(CheckpointError::Code::ConfigMismatch,
                              "checkpoint was written for a different model configuration");

    Model expected = Model::init(config, 0);
    Parameters params = zeros_like(expected.params());
    const std::uint32_t count = detail::read_u32(is);
    if (count != params.count())
        throw CheckpointError(CheckpointError::Code::BadLayout, "unexpected tensor count");
    for (std::uint32_t t = 0; t < count; ++t) {
        const std::uint32_t name_len = detail::read_u32(is);
        std::string name(name_len, '\0');
        if (!is.read(name.data(), name_len))
            throw CheckpointError(CheckpointError::Code::Truncated, "checkpoint ends mid-name");
        if (name != params[t].name)
            throw CheckpointError(CheckpointError::Code::BadLayout,
                                  "tensor " + std::to_string(t) + " is " + name + ", expected " +
                                      params[t].name);
        const std::uint32_t ndim = detail::read_u32(is);
        std::vector<int> shape(ndim);
        for (auto& d : shape) d = static_cast<int>(detail::read_u32(is));
        if (shape != params[t].shape)
            throw CheckpointError(CheckpointError::Code::BadLayout,
                                  "tensor " + name + " has an unexpected shape");
        detail::read_f64_block(is, params[t].data);
    }

    const std::uint64_t step = detail::read_u64(is);
    AdamConfig acfg;
    acfg.lr = detail::read_f64(is);
    acfg.beta1 = detail::read_f64(is);
    acfg.beta2 = detail::read_f64(is);
    acfg.epsilon = detail::read_f64(is);
    Adam opt(acfg, params.total_size());
    opt.set_step(step);
    detail::read_f64_block(is, opt.m());
    detail::read_f64_block(is, opt.v());
    if (is.peek() != std::char_traits<char>::eof())
        throw CheckpointError(CheckpointError::Code::BadLayout, "trailing bytes after checkpoint");

    return LoadedCheckpoint{Model(config, std::move(params)), std::move(opt)};
}

}  // namespace hoidet
