#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hoidet/grid.hpp"
#include "hoidet/rng.hpp"

namespace hoidet {

struct ConvSpec {
    int out_channels = 0;
    int stride = 1;
};

/// Network shape. The trunk is a stack of 3x3 same-padded convolutions with
/// tanh activations; two 1x1 sigmoid heads read the final feature map. The
/// overall stride is the product of the trunk strides.
struct ModelConfig {
    int input_channels = 4;
    int num_verbs = 3;
    int kernel = 3;
    std::vector<ConvSpec> trunk = {{8, 2}, {16, 2}, {32, 1}, {32, 1}};

    int head_channels() const { return num_verbs + 1; }
    int trunk_out_channels() const { return trunk.back().out_channels; }
    int stride() const {
        int s = 1;
        for (const auto& l : trunk) s *= l.stride;
        return s;
    }
};

struct Tensor {
    std::string name;
    std::vector<int> shape;
    std::vector<double> data;

    static Tensor zeros(std::string name, std::vector<int> shape) {
        Tensor t;
        t.name = std::move(name);
        std::size_t n = 1;
        for (int d : shape) n *= static_cast<std::size_t>(d);
        t.shape = std::move(shape);
        t.data.assign(n, 0.0);
        return t;
    }
};

/// Named parameter tensors in a fixed registration order; gradients and
/// optimizer state follow the same order.
struct Parameters {
    std::vector<Tensor> tensors;

    Tensor& operator[](std::size_t i) { return tensors[i]; }
    const Tensor& operator[](std::size_t i) const { return tensors[i]; }
    std::size_t count() const { return tensors.size(); }

    std::size_t total_size() const {
        std::size_t n = 0;
        for (const auto& t : tensors) n += t.data.size();
        return n;
    }

    Tensor& find(const std::string& name) {
        for (auto& t : tensors)
            if (t.name == name) return t;
        throw std::out_of_range("no parameter named " + name);
    }
    const Tensor& find(const std::string& name) const {
        for (const auto& t : tensors)
            if (t.name == name) return t;
        throw std::out_of_range("no parameter named " + name);
    }
};

inline Parameters zeros_like(const Parameters& p) {
    Parameters out;
    out.tensors.reserve(p.count());
    for (const auto& t : p.tensors) out.tensors.push_back(Tensor::zeros(t.name, t.shape));
    return out;
}

namespace detail {

/// Same-padded convolution; output is ceil(in / stride) per axis.
inline ChannelGrid conv_forward(const ChannelGrid& in, const Tensor& w, const Tensor& b,
                                int kernel, int stride) {
    const int ic = in.channels, oc = w.shape[0], pad = kernel / 2;
    const int ow = (in.width - 1) / stride + 1;
    const int oh = (in.height - 1) / stride + 1;
    ChannelGrid out(ow, oh, oc);
    for (int o = 0; o < oc; ++o) {
        const double* wt = &w.data[static_cast<std::size_t>(o) * ic * kernel * kernel];
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox) {
                double acc = b.data[o];
                for (int i = 0; i < ic; ++i)
                    for (int ky = 0; ky < kernel; ++ky) {
                        const int iy = oy * stride + ky - pad;
                        if (iy < 0 || iy >= in.height) continue;
                        for (int kx = 0; kx < kernel; ++kx) {
                            const int ix = ox * stride + kx - pad;
                            if (ix < 0 || ix >= in.width) continue;
                            acc += wt[(i * kernel + ky) * kernel + kx] * in.at(ix, iy, i);
                        }
                    }
                out.at(ox, oy, o) = acc;
            }
    }
    return out;
}

/// Gradients of conv_forward: accumulates into gw/gb and returns the
/// gradient with respect to the input.
inline ChannelGrid conv_backward(const ChannelGrid& in, const Tensor& w, const ChannelGrid& dz,
                                 int kernel, int stride, Tensor& gw, Tensor& gb) {
    const int ic = in.channels, oc = w.shape[0], pad = kernel / 2;
    ChannelGrid din(in.width, in.height, in.channels, 0.0);
    for (int o = 0; o < oc; ++o) {
        const double* wt = &w.data[static_cast<std::size_t>(o) * ic * kernel * kernel];
        double* gwt = &gw.data[static_cast<std::size_t>(o) * ic * kernel * kernel];
        for (int oy = 0; oy < dz.height; ++oy)
            for (int ox = 0; ox < dz.width; ++ox) {
                const double g = dz.at(ox, oy, o);
                if (g == 0.0) continue;
                gb.data[o] += g;
                for (int i = 0; i < ic; ++i)
                    for (int ky = 0; ky < kernel; ++ky) {
                        const int iy = oy * stride + ky - pad;
                        if (iy < 0 || iy >= in.height) continue;
                        for (int kx = 0; kx < kernel; ++kx) {
                            const int ix = ox * stride + kx - pad;
                            if (ix < 0 || ix >= in.width) continue;
                            gwt[(i * kernel + ky) * kernel + kx] += g * in.at(ix, iy, i);
                            din.at(ix, iy, i) += g * wt[(i * kernel + ky) * kernel + kx];
                        }
                    }
            }
    }
    return din;
}

inline void tanh_inplace(ChannelGrid& g) {
    for (double& v : g.data) v = std::tanh(v);
}

inline void sigmoid_inplace(ChannelGrid& g) {
    for (double& v : g.data) v = 1.0 / (1.0 + std::exp(-v));
}

}  // namespace detail

/// Everything the backward pass needs from one forward pass.
struct ForwardCache {
    ChannelGrid input{0, 0, 0};
    std::vector<ChannelGrid> activations;  // post-tanh output of each trunk layer
    ChannelGrid actor{0, 0, 0};            // post-sigmoid head outputs
    ChannelGrid object{0, 0, 0};
};

class Model {
  public:
    Model() = default;
    Model(ModelConfig config, Parameters params)
        : config_(std::move(config)), params_(std::move(params)) {}

    /// Fan-in scaled uniform weights; trunk biases start at zero and head
    /// biases at logit(0.1) so fresh score maps sit near the negative floor.
    static Model init(const ModelConfig& config, std::uint64_t seed) {
        Parameters p;
        int in_c = config.input_channels;
        int idx = 1;
        for (const auto& l : config.trunk) {
            p.tensors.push_back(Tensor::zeros("conv" + std::to_string(idx) + ".weight",
                                              {l.out_channels, in_c, config.kernel, config.kernel}));
            p.tensors.push_back(
                Tensor::zeros("conv" + std::to_string(idx) + ".bias", {l.out_channels}));
            in_c = l.out_channels;
            ++idx;
        }
        const int hc = config.head_channels();
        p.tensors.push_back(Tensor::zeros("actor_head.weight", {hc, in_c, 1, 1}));
        p.tensors.push_back(Tensor::zeros("actor_head.bias", {hc}));
        p.tensors.push_back(Tensor::zeros("object_head.weight", {hc, in_c, 1, 1}));
        p.tensors.push_back(Tensor::zeros("object_head.bias", {hc}));

        Rng rng(item_seed(seed, 0, 2));
        const double head_bias = std::log(0.1 / 0.9);
        for (auto& t : p.tensors) {
            const bool bias = t.shape.size() == 1;
            if (bias) {
                const bool head = t.name.find("head") != std::string::npos;
                for (double& v : t.data) v = head ? head_bias : 0.0;
            } else {
                const int fan_in = t.shape[1] * t.shape[2] * t.shape[3];
                const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
                for (double& v : t.data) v = rng.uniform(-bound, bound);
            }
        }
        return Model(config, std::move(p));
    }

    const ModelConfig& config() const { return config_; }
    Parameters& params() { return params_; }
    const Parameters& params() const { return params_; }

    ForwardCache forward(const ChannelGrid& input) const {
        if (input.channels != config_.input_channels)
            throw std::invalid_argument("model input has wrong channel count");
        ForwardCache cache;
        cache.input = input;
        const ChannelGrid* cur = &cache.input;
        for (std::size_t l = 0; l < config_.trunk.size(); ++l) {
            ChannelGrid z = detail::conv_forward(*cur, params_[2 * l], params_[2 * l + 1],
                                                 config_.kernel, config_.trunk[l].stride);
            detail::tanh_inplace(z);
            cache.activations.push_back(std::move(z));
            cur = &cache.activations.back();
        }
        const std::size_t h = 2 * config_.trunk.size();
        cache.actor = detail::conv_forward(*cur, params_[h], params_[h + 1], 1, 1);
        detail::sigmoid_inplace(cache.actor);
        cache.object = detail::conv_forward(*cur, params_[h + 2], params_[h + 3], 1, 1);
        detail::sigmoid_inplace(cache.object);
        return cache;
    }

    /// Backpropagates loss gradients on the two head outputs into `grads`,
    /// which must be zeros_like(params()) or an accumulator of same shape.
    void backward(const ForwardCache& cache, const ChannelGrid& dactor, const ChannelGrid& dobject,
                  Parameters& grads) const {
        const std::size_t h = 2 * config_.trunk.size();
        const ChannelGrid& feat = cache.activations.back();

        auto head_dz = [](const ChannelGrid& p, const ChannelGrid& dp) {
            ChannelGrid dz = dp;
            for (std::size_t i = 0; i < dz.data.size(); ++i)
                dz.data[i] *= p.data[i] * (1.0 - p.data[i]);
            return dz;
        };
        ChannelGrid dza = head_dz(cache.actor, dactor);
        ChannelGrid dzo = head_dz(cache.object, dobject);

        ChannelGrid dfeat =
            detail::conv_backward(feat, params_[h], dza, 1, 1, grads[h], grads[h + 1]);
        ChannelGrid dfeat_o =
            detail::conv_backward(feat, params_[h + 2], dzo, 1, 1, grads[h + 2], grads[h + 3]);
        for (std::size_t i = 0; i < dfeat.data.size(); ++i) dfeat.data[i] += dfeat_o.data[i];

        ChannelGrid d = std::move(dfeat);
        for (int l = static_cast<int>(config_.trunk.size()) - 1; l >= 0; --l) {
            const ChannelGrid& a = cache.activations[l];
            for (std::size_t i = 0; i < d.data.size(); ++i)
                d.data[i] *= 1.0 - a.data[i] * a.data[i];
            const ChannelGrid& in = l == 0 ? cache.input : cache.activations[l - 1];
            d = detail::conv_backward(in, params_[2 * l], d, config_.kernel,
                                      config_.trunk[l].stride, grads[2 * l], grads[2 * l + 1]);
        }
    }

  private:
    ModelConfig config_;
    Parameters params_;
};

}  // namespace hoidet
