#include "mssr/model.hpp"

#include <cmath>
#include <random>
#include <string>

#include "mssr/errors.hpp"

namespace mssr {

void ModelConfig::validate() const {
    if (n_long < 2 || n_short < 1 || n_short >= n_long) {
        throw ArgumentError("model config: need 1 <= n_short < n_long (got n_short=" + std::to_string(n_short) +
                            ", n_long=" + std::to_string(n_long) + ")");
    }
    if (n_recon < 1) {
        throw ArgumentError("model config: n_recon must be >= 1");
    }
    if (width < 1) {
        throw ArgumentError("model config: width must be >= 1");
    }
}

namespace {

template <typename T>
FusionBlock<T> make_block(std::size_t in_channels, const ModelConfig& cfg) {
    FusionBlock<T> block;
    block.tap_index = cfg.n_short;
    block.layers.reserve(cfg.n_long);
    for (std::size_t k = 0; k < cfg.n_long; ++k) {
        block.layers.emplace_back(k == 0 ? in_channels : cfg.width, cfg.width);
    }
    return block;
}

template <typename T>
void relu_inplace(Tensor4<T>& t) {
    for (T& v : t.values()) {
        v = v > T(0) ? v : T(0);
    }
}

template <typename T>
Tensor4<T> conv_relu(const Tensor4<T>& in, const ConvLayer<T>& layer) {
    Tensor4<T> out = conv2d_forward(in, layer);
    relu_inplace(out);
    return out;
}

template <typename T>
void check_block(const FusionBlock<T>& block, const Tensor4<T>& input) {
    if (block.layers.empty() || block.tap_index < 1 || block.tap_index >= block.layers.size()) {
        throw ShapeError("block_forward: tap index " + std::to_string(block.tap_index) + " invalid for " +
                         std::to_string(block.layers.size()) + " layers");
    }
    if (input.channels() != block.layers.front().in_channels) {
        throw ShapeError("block_forward: input " + to_string(input.shape()) + " expects " +
                         std::to_string(block.layers.front().in_channels) + " channels");
    }
}

// When `record` is given, every layer output is appended to it; the caller
// reserves enough capacity so earlier entries stay addressable.
template <typename T>
Tensor4<T> run_block(const FusionBlock<T>& block, const Tensor4<T>& input, std::vector<Tensor4<T>>* record) {
    check_block(block, input);
    const Tensor4<T>* cur = &input;
    Tensor4<T> h;
    Tensor4<T> tap;
    for (std::size_t k = 0; k < block.layers.size(); ++k) {
        Tensor4<T> next = conv_relu(*cur, block.layers[k]);
        if (record) {
            record->push_back(std::move(next));
            cur = &record->back();
        } else {
            h = std::move(next);
            cur = &h;
            if (k + 1 == block.tap_index) {
                tap = h;
            }
        }
    }
    if (record) {
        const std::size_t first = record->size() - block.layers.size();
        return add((*record)[first + block.tap_index - 1], record->back());
    }
    return add(tap, h);
}

template <typename T>
Tensor4<T> run_recon(const std::vector<ConvLayer<T>>& recon, const Tensor4<T>& input,
                     std::vector<Tensor4<T>>* record) {
    const Tensor4<T>* cur = &input;
    Tensor4<T> h;
    for (std::size_t k = 0; k < recon.size(); ++k) {
        const bool last = k + 1 == recon.size();
        Tensor4<T> next = last ? conv2d_forward(*cur, recon[k]) : conv_relu(*cur, recon[k]);
        if (record) {
            record->push_back(std::move(next));
            cur = &record->back();
        } else {
            h = std::move(next);
            cur = &h;
        }
    }
    return record ? record->back() : h;
}

template <typename T>
void check_model_input(const MssrModel<T>& model, const Tensor4<T>& x) {
    if (x.channels() != 1) {
        throw ShapeError("model_forward: expected a 1-channel input, got " + to_string(x.shape()));
    }
    if (model.recon.empty()) {
        throw ShapeError("model_forward: model has no reconstruction layers");
    }
}

// Backward through one fusion block. `acts` points at the block's n_long
// recorded activations. Returns dL/dinput unless `need_input_grad` is false.
template <typename T>
Tensor4<T> block_backward(FusionBlock<T>& block, const Tensor4<T>& input, const Tensor4<T>* acts,
                          const Tensor4<T>& grad_out, bool need_input_grad) {
    const std::size_t n = block.layers.size();
    Tensor4<T> g = grad_out;
    for (std::size_t k = n; k-- > 0;) {
        g = relu_backward(acts[k], g);
        const Tensor4<T>& in = k == 0 ? input : acts[k - 1];
        if (k == 0 && !need_input_grad) {
            conv2d_backward_params(in, block.layers[k], g);
            return Tensor4<T>(input.shape());
        }
        g = conv2d_backward(in, block.layers[k], g);
        if (k == block.tap_index) {
            // g is now dL/d(activation after layer tap_index); add the tap's share.
            add_inplace(g, grad_out);
        }
    }
    return g;
}

}  // namespace

template <typename T>
MssrModel<T>::MssrModel(const ModelConfig& cfg) : config(cfg) {
    config.validate();
    block1 = make_block<T>(1, config);
    block2 = make_block<T>(config.width, config);
    recon.reserve(config.n_recon);
    for (std::size_t k = 0; k < config.n_recon; ++k) {
        const bool last = k + 1 == config.n_recon;
        recon.emplace_back(config.width, last ? 1 : config.width);
    }
}

template <typename T>
std::vector<ConvLayer<T>*> MssrModel<T>::layers() {
    std::vector<ConvLayer<T>*> out;
    out.reserve(config.layer_count());
    for (auto& l : block1.layers) out.push_back(&l);
    for (auto& l : block2.layers) out.push_back(&l);
    for (auto& l : recon) out.push_back(&l);
    return out;
}

template <typename T>
std::vector<const ConvLayer<T>*> MssrModel<T>::layers() const {
    std::vector<const ConvLayer<T>*> out;
    out.reserve(config.layer_count());
    for (const auto& l : block1.layers) out.push_back(&l);
    for (const auto& l : block2.layers) out.push_back(&l);
    for (const auto& l : recon) out.push_back(&l);
    return out;
}

template <typename T>
void MssrModel<T>::zero_grad() {
    for (auto* l : layers()) {
        l->zero_grad();
    }
    grads_ready = false;
}

template <typename T>
Tensor4<T> block_forward(const FusionBlock<T>& block, const Tensor4<T>& input) {
    return run_block(block, input, static_cast<std::vector<Tensor4<T>>*>(nullptr));
}

template <typename T>
Tensor4<T> model_forward(const MssrModel<T>& model, const Tensor4<T>& x) {
    check_model_input(model, x);
    Tensor4<T> h1 = run_block(model.block1, x, static_cast<std::vector<Tensor4<T>>*>(nullptr));
    Tensor4<T> h2 = run_block(model.block2, h1, static_cast<std::vector<Tensor4<T>>*>(nullptr));
    return run_recon(model.recon, h2, static_cast<std::vector<Tensor4<T>>*>(nullptr));
}

template <typename T>
ForwardTrace<T> model_forward_traced(const MssrModel<T>& model, const Tensor4<T>& x) {
    check_model_input(model, x);
    ForwardTrace<T> trace;
    trace.model = &model;
    trace.revision = model.revision;
    trace.input = x;
    trace.activations.reserve(model.config.layer_count());
    trace.block1_out = run_block(model.block1, trace.input, &trace.activations);
    trace.block2_out = run_block(model.block2, trace.block1_out, &trace.activations);
    run_recon(model.recon, trace.block2_out, &trace.activations);
    return trace;
}

template <typename T>
Tensor4<T> restore(const MssrModel<T>& model, const Tensor4<T>& x) {
    return add(x, model_forward(model, x));
}

template <typename T>
void model_backward(MssrModel<T>& model, const ForwardTrace<T>& trace, const Tensor4<T>& grad_residual) {
    const std::size_t n_long = model.config.n_long;
    if (trace.model != &model || trace.revision != model.revision ||
        trace.activations.size() != model.config.layer_count()) {
        throw ContractError("model_backward: trace was not produced by a forward pass of this model state");
    }
    require_same_shape(trace.residual().shape(), grad_residual.shape(), "model_backward");

    const Tensor4<T>* acts = trace.activations.data();
    const Tensor4<T>* recon_acts = acts + 2 * n_long;
    Tensor4<T> g = grad_residual;
    for (std::size_t k = model.recon.size(); k-- > 0;) {
        if (k + 1 != model.recon.size()) {
            g = relu_backward(recon_acts[k], g);
        }
        const Tensor4<T>& in = k == 0 ? trace.block2_out : recon_acts[k - 1];
        g = conv2d_backward(in, model.recon[k], g);
    }
    g = block_backward(model.block2, trace.block1_out, acts + n_long, g, true);
    block_backward(model.block1, trace.input, acts, g, false);
    model.grads_ready = true;
}

ReceptiveFields receptive_fields(std::size_t n_short, std::size_t n_long, std::size_t n_recon) {
    return {2 * (n_short + n_short + n_recon) + 1, 2 * (n_short + n_long + n_recon) + 1,
            2 * (n_long + n_long + n_recon) + 1};
}

template <typename T>
std::size_t parameter_count(const MssrModel<T>& model) {
    std::size_t n = 0;
    for (const auto* l : model.layers()) {
        n += l->out_channels * l->in_channels * kKernelArea + l->out_channels;
    }
    return n;
}

template <typename T>
void init_he(MssrModel<T>& model, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (auto* l : model.layers()) {
        std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(l->in_channels * kKernelArea)));
        for (T& w : l->weights) {
            w = static_cast<T>(dist(rng));
        }
        std::fill(l->bias.begin(), l->bias.end(), T(0));
        l->zero_grad();
    }
    model.grads_ready = false;
    ++model.revision;
}

template <typename T>
std::vector<T> flatten_parameters(const MssrModel<T>& model) {
    std::vector<T> out;
    out.reserve(parameter_count(model));
    for (const auto* l : model.layers()) {
        out.insert(out.end(), l->weights.begin(), l->weights.end());
        out.insert(out.end(), l->bias.begin(), l->bias.end());
    }
    return out;
}

template <typename T>
std::vector<T> flatten_gradients(const MssrModel<T>& model) {
    std::vector<T> out;
    out.reserve(parameter_count(model));
    for (const auto* l : model.layers()) {
        out.insert(out.end(), l->grad_weights.begin(), l->grad_weights.end());
        out.insert(out.end(), l->grad_bias.begin(), l->grad_bias.end());
    }
    return out;
}

template <typename T>
void assign_parameters(MssrModel<T>& model, const std::vector<T>& flat) {
    if (flat.size() != parameter_count(model)) {
        throw ShapeError("assign_parameters: got " + std::to_string(flat.size()) + " values for " +
                         std::to_string(parameter_count(model)) + " parameters");
    }
    auto it = flat.begin();
    for (auto* l : model.layers()) {
        std::copy(it, it + static_cast<std::ptrdiff_t>(l->weights.size()), l->weights.begin());
        it += static_cast<std::ptrdiff_t>(l->weights.size());
        std::copy(it, it + static_cast<std::ptrdiff_t>(l->bias.size()), l->bias.begin());
        it += static_cast<std::ptrdiff_t>(l->bias.size());
    }
    ++model.revision;
}

template struct MssrModel<float>;
template struct MssrModel<double>;

#define MSSR_INSTANTIATE(T)                                                                         \
    template Tensor4<T> block_forward(const FusionBlock<T>&, const Tensor4<T>&);                    \
    template Tensor4<T> model_forward(const MssrModel<T>&, const Tensor4<T>&);                      \
    template ForwardTrace<T> model_forward_traced(const MssrModel<T>&, const Tensor4<T>&);          \
    template Tensor4<T> restore(const MssrModel<T>&, const Tensor4<T>&);                            \
    template void model_backward(MssrModel<T>&, const ForwardTrace<T>&, const Tensor4<T>&);         \
    template std::size_t parameter_count(const MssrModel<T>&);                                      \
    template void init_he(MssrModel<T>&, std::uint64_t);                                            \
    template std::vector<T> flatten_parameters(const MssrModel<T>&);                                \
    template std::vector<T> flatten_gradients(const MssrModel<T>&);                                 \
    template void assign_parameters(MssrModel<T>&, const std::vector<T>&);

MSSR_INSTANTIATE(float)
MSSR_INSTANTIATE(double)

#undef MSSR_INSTANTIATE

}  // namespace mssr
