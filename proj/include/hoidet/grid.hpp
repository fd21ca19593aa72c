#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hoidet {

/// Dense W x H x C grid of doubles stored channel-planar (CHW).
/// Used for model outputs, supervision targets, weight maps and images
/// (a 3-channel grid at input resolution is an RGB image, a 4-channel one
/// is an RGBM input).
struct ChannelGrid {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<double> data;

    ChannelGrid() = default;
    ChannelGrid(int w, int h, int c, double fill = 0.0)
        : width(w), height(h), channels(c),
          data(static_cast<std::size_t>(w) * h * c, fill) {}

    double& at(int x, int y, int c) {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
    double at(int x, int y, int c) const {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }

    /// Pointer to the start of one channel plane (height * width values).
    double* plane(int c) { return data.data() + static_cast<std::size_t>(c) * height * width; }
    const double* plane(int c) const {
        return data.data() + static_cast<std::size_t>(c) * height * width;
    }

    std::size_t size() const { return data.size(); }

    bool same_shape(const ChannelGrid& other) const {
        return width == other.width && height == other.height && channels == other.channels;
    }

    void fill(double v) { std::fill(data.begin(), data.end(), v); }

    bool operator==(const ChannelGrid&) const = default;
};

inline void require_same_shape(const ChannelGrid& a, const ChannelGrid& b, const char* what) {
    if (!a.same_shape(b)) throw std::invalid_argument(std::string("shape mismatch in ") + what);
}

}  // namespace hoidet
