#include "net.hpp"

#include <cmath>

#include "errors.hpp"

namespace pinchfl {

namespace {

double activate(Activation act, double x) {
    switch (act) {
        case Activation::Linear: return x;
        case Activation::Relu: return x > 0.0 ? x : 0.0;
        case Activation::Tanh: return std::tanh(x);
    }
    return x;
}

double activate_grad(Activation act, double pre, double post) {
    switch (act) {
        case Activation::Linear: return 1.0;
        case Activation::Relu: return pre > 0.0 ? 1.0 : 0.0;
        case Activation::Tanh: return 1.0 - post * post;
    }
    return 1.0;
}

} // namespace

DenseNet::DenseNet(std::vector<LayerSpec> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw ConfigError("network needs at least one layer");
    std::size_t total = 0;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        if (layers_[l].in == 0 || layers_[l].out == 0)
            throw ConfigError("network layer with zero width");
        if (l > 0 && layers_[l].in != layers_[l - 1].out)
            throw ConfigError("network layer dimensions do not chain");
        offsets_.push_back(total);
        total += layers_[l].in * layers_[l].out + layers_[l].out;
    }
    params_.assign(total, 0.0);
}

DenseNet DenseNet::mlp(std::size_t input, const std::vector<std::size_t>& hidden,
                       std::size_t output, Activation hidden_act, Activation output_act) {
    std::vector<LayerSpec> layers;
    std::size_t prev = input;
    for (std::size_t h : hidden) {
        layers.push_back(LayerSpec{prev, h, hidden_act});
        prev = h;
    }
    layers.push_back(LayerSpec{prev, output, output_act});
    return DenseNet(std::move(layers));
}

void DenseNet::init(Rng& rng, double final_scale) {
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const LayerSpec& spec = layers_[l];
        double* w = params_.data() + offsets_[l];
        double* b = w + spec.in * spec.out;
        bool last = (l + 1 == layers_.size());
        if (last) {
            for (std::size_t i = 0; i < spec.in * spec.out; ++i)
                w[i] = rng.uniform(-final_scale, final_scale);
            for (std::size_t i = 0; i < spec.out; ++i)
                b[i] = rng.uniform(-final_scale, final_scale);
        } else {
            double scale = std::sqrt(2.0 / static_cast<double>(spec.in));
            for (std::size_t i = 0; i < spec.in * spec.out; ++i)
                w[i] = scale * rng.normal();
            for (std::size_t i = 0; i < spec.out; ++i) b[i] = 0.0;
        }
    }
}

std::vector<double> DenseNet::forward(const std::vector<double>& x) const {
    Trace trace;
    return forward(x, trace);
}

std::vector<double> DenseNet::forward(const std::vector<double>& x, Trace& trace) const {
    if (x.size() != input_dim()) throw ConfigError("network input dimension mismatch");
    trace.pre.assign(layers_.size(), {});
    trace.post.assign(layers_.size(), {});
    const std::vector<double>* cur = &x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const LayerSpec& spec = layers_[l];
        const double* w = params_.data() + offsets_[l];
        const double* b = w + spec.in * spec.out;
        auto& pre = trace.pre[l];
        auto& post = trace.post[l];
        pre.resize(spec.out);
        post.resize(spec.out);
        for (std::size_t o = 0; o < spec.out; ++o) {
            double acc = b[o];
            const double* row = w + o * spec.in;
            for (std::size_t i = 0; i < spec.in; ++i) acc += row[i] * (*cur)[i];
            pre[o] = acc;
            post[o] = activate(spec.act, acc);
        }
        cur = &post;
    }
    return trace.post.back();
}

std::vector<double> DenseNet::backward(const std::vector<double>& x, const Trace& trace,
                                       const std::vector<double>& dout,
                                       std::vector<double>& grad) const {
    if (dout.size() != output_dim()) throw ConfigError("network output-gradient dimension mismatch");
    if (grad.size() != params_.size()) throw ConfigError("gradient buffer size mismatch");
    std::vector<double> delta = dout;
    for (std::size_t li = layers_.size(); li-- > 0;) {
        const LayerSpec& spec = layers_[li];
        const double* w = params_.data() + offsets_[li];
        double* gw = grad.data() + offsets_[li];
        double* gb = gw + spec.in * spec.out;
        const std::vector<double>& input = (li == 0) ? x : trace.post[li - 1];
        // Through the activation.
        for (std::size_t o = 0; o < spec.out; ++o)
            delta[o] *= activate_grad(spec.act, trace.pre[li][o], trace.post[li][o]);
        std::vector<double> dinput(spec.in, 0.0);
        for (std::size_t o = 0; o < spec.out; ++o) {
            const double* row = w + o * spec.in;
            double* grow = gw + o * spec.in;
            double d = delta[o];
            gb[o] += d;
            for (std::size_t i = 0; i < spec.in; ++i) {
                grow[i] += d * input[i];
                dinput[i] += row[i] * d;
            }
        }
        delta = std::move(dinput);
    }
    return delta;
}

Adam::Adam(std::size_t n, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), t_(0), m_(n, 0.0), v_(n, 0.0) {}

void Adam::step(std::vector<double>& params, const std::vector<double>& grad) {
    if (params.size() != m_.size() || grad.size() != m_.size())
        throw ConfigError("optimizer size mismatch");
    ++t_;
    double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
        double mhat = m_[i] / bc1;
        double vhat = v_[i] / bc2;
        params[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
}

void Adam::restore(std::uint64_t t, std::vector<double> m, std::vector<double> v) {
    if (m.size() != m_.size() || v.size() != v_.size())
        throw ConfigError("optimizer restore size mismatch");
    t_ = t;
    m_ = std::move(m);
    v_ = std::move(v);
}

void soft_update(const std::vector<double>& online, std::vector<double>& target, double rate) {
    if (online.size() != target.size()) throw ConfigError("soft update size mismatch");
    for (std::size_t i = 0; i < online.size(); ++i)
        target[i] = rate * online[i] + (1.0 - rate) * target[i];
}

} // namespace pinchfl
