#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hoidet/grid.hpp"

namespace hoidet {

inline std::uint8_t to_byte(double v) {
    const double c = v < 0.0 ? 0.0 : v > 1.0 ? 1.0 : v;
    return static_cast<std::uint8_t>(std::lround(c * 255.0));
}

/// Snaps channel values to the 8-bit lattice used by the image files, so an
/// in-memory image and its disk round trip are bit-identical.
inline void quantize_image(ChannelGrid& img) {
    for (double& v : img.data) v = to_byte(v) / 255.0;
}

inline void write_ppm(const std::string& path, const ChannelGrid& img) {
    if (img.channels != 3) throw std::invalid_argument("write_ppm expects a 3-channel image");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << "P6\n" << img.width << " " << img.height << "\n255\n";
    std::vector<std::uint8_t> row(static_cast<std::size_t>(img.width) * 3);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3; ++c)
                row[static_cast<std::size_t>(x) * 3 + c] = to_byte(img.at(x, y, c));
        os.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
    if (!os) throw std::runtime_error("write failed for " + path);
}

namespace detail {

inline int read_pnm_int(std::istream& is) {
    // Skips whitespace and '#' comments, as the format allows in headers.
    int c = is.get();
    while (c == '#' || std::isspace(c)) {
        if (c == '#')
            while (c != '\n' && c != EOF) c = is.get();
        c = is.get();
    }
    int v = 0;
    bool any = false;
    while (c >= '0' && c <= '9') {
        v = v * 10 + (c - '0');
        any = true;
        c = is.get();
    }
    if (!any) throw std::runtime_error("malformed image header");
    return v;
}

}  // namespace detail

inline ChannelGrid read_ppm(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    char m0 = 0, m1 = 0;
    is.get(m0);
    is.get(m1);
    if (m0 != 'P' || m1 != '6') throw std::runtime_error(path + " is not a binary PPM");
    const int w = detail::read_pnm_int(is);
    const int h = detail::read_pnm_int(is);
    const int maxval = detail::read_pnm_int(is);
    if (maxval != 255) throw std::runtime_error("unsupported PPM maxval");
    ChannelGrid img(w, h, 3);
    std::vector<std::uint8_t> row(static_cast<std::size_t>(w) * 3);
    for (int y = 0; y < h; ++y) {
        if (!is.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size())))
            throw std::runtime_error(path + " is truncated");
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c)
                img.at(x, y, c) = row[static_cast<std::size_t>(x) * 3 + c] / 255.0;
    }
    return img;
}

/// Writes one channel of a grid as an 8-bit grayscale PGM; values are
/// clamped to [0, 1] before scaling, which suits probability maps.
inline void write_pgm(const std::string& path, const ChannelGrid& grid, int channel) {
    if (channel < 0 || channel >= grid.channels)
        throw std::invalid_argument("channel out of range");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << "P5\n" << grid.width << " " << grid.height << "\n255\n";
    for (int y = 0; y < grid.height; ++y)
        for (int x = 0; x < grid.width; ++x) {
            const std::uint8_t b = to_byte(grid.at(x, y, channel));
            os.write(reinterpret_cast<const char*>(&b), 1);
        }
    if (!os) throw std::runtime_error("write failed for " + path);
}

}  // namespace hoidet
