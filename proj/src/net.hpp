#pragma once

#include <cstddef>
#include <vector>

#include "rng.hpp"

namespace pinchfl {

enum class Activation { Linear, Relu, Tanh };

struct LayerSpec {
    std::size_t in = 0;
    std::size_t out = 0;
    Activation act = Activation::Linear;
};

// Fully-connected network over a single flat parameter vector laid out
// [W0 | b0 | W1 | b1 | ...] with W row-major (out x in).  Forward, manual
// backprop, and initialization only — optimization lives in Adam below.
class DenseNet {
public:
    explicit DenseNet(std::vector<LayerSpec> layers);

    static DenseNet mlp(std::size_t input, const std::vector<std::size_t>& hidden,
                        std::size_t output, Activation hidden_act, Activation output_act);

    std::size_t input_dim() const { return layers_.front().in; }
    std::size_t output_dim() const { return layers_.back().out; }
    std::size_t param_count() const { return params_.size(); }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }
    const std::vector<LayerSpec>& layers() const { return layers_; }

    // Scaled-normal weights on hidden layers (He), zero hidden biases, and a
    // small uniform final layer so initial outputs sit near zero.
    void init(Rng& rng, double final_scale = 3.0e-3);

    std::vector<double> forward(const std::vector<double>& x) const;

    // Per-layer pre-activations and activations kept for the backward pass.
    struct Trace {
        std::vector<std::vector<double>> pre;
        std::vector<std::vector<double>> post;
    };
    std::vector<double> forward(const std::vector<double>& x, Trace& trace) const;

    // Backpropagate dL/d(output); accumulates dL/d(params) into grad (size
    // param_count, caller-zeroed) and returns dL/d(input).
    std::vector<double> backward(const std::vector<double>& x, const Trace& trace,
                                 const std::vector<double>& dout, std::vector<double>& grad) const;

private:
    std::vector<LayerSpec> layers_;
    std::vector<double> params_;
    std::vector<std::size_t> offsets_;   // per layer: index of W block; b follows
};

// Adaptive-moment estimator; step() descends params along grad.
class Adam {
public:
    Adam(std::size_t n, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1.0e-8);

    void step(std::vector<double>& params, const std::vector<double>& grad);

    double lr() const { return lr_; }
    std::uint64_t steps() const { return t_; }
    const std::vector<double>& m() const { return m_; }
    const std::vector<double>& v() const { return v_; }
    void restore(std::uint64_t t, std::vector<double> m, std::vector<double> v);

private:
    double lr_, beta1_, beta2_, eps_;
    std::uint64_t t_;
    std::vector<double> m_, v_;
};

// target <- rate * online + (1 - rate) * target, elementwise.
void soft_update(const std::vector<double>& online, std::vector<double>& target, double rate);

} // namespace pinchfl
