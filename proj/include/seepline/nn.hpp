#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "seepline/rng.hpp"

namespace seepline::nn {

// Activations available to dense layers. Recurrent cells use the fixed
// sigmoid/tanh gate functions and ignore this.
enum class Activation { linear, relu, tanh, sigmoid };

Activation activation_from_name(std::string_view name);
const char* activation_name(Activation a);

/// One layer of a NetworkSpec. `units` is the conv filter count, recurrent
/// hidden size, or dense width depending on `kind`; unused fields keep their
/// defaults and are omitted from JSON.
struct LayerSpec {
    std::string kind;  // conv1d | maxpool | flatten | lstm | gru | rnn | dense
    int units = 0;
    int kernel = 3;                      // conv1d only; must be odd
    int pool = 2;                        // maxpool only
    Activation activation = Activation::linear;  // dense only

    static LayerSpec conv1d(int filters, int kernel = 3);
    static LayerSpec maxpool(int size);
    static LayerSpec flatten();
    static LayerSpec lstm(int units);
    static LayerSpec gru(int units);
    static LayerSpec rnn(int units);
    static LayerSpec dense(int units, Activation act = Activation::linear);

    nlohmann::json to_json() const;
    static LayerSpec from_json(const nlohmann::json& j);
};

/// Ordered layer list plus the input window shape. Shape composition is
/// validated when a Network is built from the spec, so a malformed spec
/// fails at construction, never mid-training.
struct NetworkSpec {
    std::vector<LayerSpec> layers;
    Eigen::Index input_len = 0;       // window length (time steps)
    Eigen::Index input_channels = 1;  // features per step
    std::uint64_t seed = 0;           // drives weight initialization

    nlohmann::json to_json() const;
    static NetworkSpec from_json(const nlohmann::json& j);
};

/// Preset architectures by name: cnn-lstm-1, cnn-lstm-2, and the mlp / rnn /
/// gru / lstm baselines. Unknown names raise ConfigError.
NetworkSpec build_preset(std::string_view name, Eigen::Index input_len, std::uint64_t seed);

/// A layer transforms a (time x channels) matrix and caches what its own
/// backward pass needs. backward() consumes the loss gradient w.r.t. the
/// last forward output, accumulates parameter gradients, and returns the
/// gradient w.r.t. the input. params() and grads() are parallel lists.
class Layer {
public:
    virtual ~Layer() = default;

    virtual const LayerSpec& spec() const = 0;

    /// Output (time, channels) for an input with `in_time` rows; the input
    /// channel count was fixed at construction.
    virtual std::pair<Eigen::Index, Eigen::Index> out_shape(Eigen::Index in_time) const = 0;

    virtual Eigen::MatrixXd forward(const Eigen::Ref<const Eigen::MatrixXd>& x) = 0;
    virtual Eigen::MatrixXd backward(const Eigen::Ref<const Eigen::MatrixXd>& dy) = 0;

    virtual std::vector<Eigen::MatrixXd*> params() { return {}; }
    virtual std::vector<Eigen::MatrixXd*> grads() { return {}; }
    virtual std::vector<std::string> param_names() const { return {}; }

    void zero_grads();

    /// Glorot-uniform weights, zero biases; LSTM forget-gate bias starts
    /// at +1. Matrices are filled row-major in params() order.
    virtual void init_params(Rng& rng) = 0;
};

/// Builds a single layer that expects `in_channels` input columns.
/// Parameters are left zero; call init_params to randomize.
std::unique_ptr<Layer> make_layer(const LayerSpec& spec, Eigen::Index in_channels);

/// A NetworkSpec instantiated with parameters. Forward/backward run the
/// layer chain and verify every intermediate stays finite (NumericFault
/// otherwise). Construction seeds each layer from substream(seed, "init", i).
class Network {
public:
    explicit Network(const NetworkSpec& spec);

    const NetworkSpec& spec() const { return spec_; }
    Eigen::Index n_layers() const { return static_cast<Eigen::Index>(layers_.size()); }
    Layer& layer(Eigen::Index i) { return *layers_[static_cast<std::size_t>(i)]; }

    /// Full forward pass; input must be input_len x input_channels.
    Eigen::MatrixXd forward(const Eigen::Ref<const Eigen::MatrixXd>& x);

    /// Backpropagates d(loss)/d(output), accumulating parameter gradients.
    void backward(const Eigen::Ref<const Eigen::MatrixXd>& dy);

    /// Scalar prediction for one window (networks ending in dense(1)).
    double predict_one(const Eigen::Ref<const Eigen::VectorXd>& window);

    std::vector<Eigen::MatrixXd*> params();
    std::vector<Eigen::MatrixXd*> grads();
    void zero_grads();
    Eigen::Index param_count();

    /// Parameter tensors only (shape + row-major data per layer); the
    /// enclosing checkpoint format adds spec, stats, and history.
    nlohmann::json state_json();
    void load_state(const nlohmann::json& j);

private:
    NetworkSpec spec_;
    std::vector<std::unique_ptr<Layer>> layers_;
};

double mse_loss(const Eigen::Ref<const Eigen::VectorXd>& pred,
                const Eigen::Ref<const Eigen::VectorXd>& target);

/// Gradient of mse_loss w.r.t. pred: 2 (pred - target) / n.
Eigen::VectorXd mse_grad(const Eigen::Ref<const Eigen::VectorXd>& pred,
                         const Eigen::Ref<const Eigen::VectorXd>& target);

struct AdamConfig {
    double lr = 0.001;
    double weight_decay = 0.005;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Adam with decoupled weight decay: p <- p - lr*wd*p happens before the
/// bias-corrected moment update each step.
class Adam {
public:
    Adam(std::vector<Eigen::MatrixXd*> params, AdamConfig cfg);
    void step(const std::vector<Eigen::MatrixXd*>& grads);
    std::int64_t steps() const { return t_; }

private:
    std::vector<Eigen::MatrixXd*> params_;
    std::vector<Eigen::MatrixXd> m_, v_;
    AdamConfig cfg_;
    std::int64_t t_ = 0;
};

/// Central-difference comparison result. rel_err for one element is
/// |analytic - numeric| / max(|analytic| + |numeric|, 1e-6); the floor keeps
/// near-zero gradient pairs from registering as spurious disagreement.
struct GradCheck {
    double max_rel_err = 0.0;
    Eigen::Index checked = 0;
};

/// Checks d[sum(R .* layer(X))] for every parameter element and every input
/// element of a single layer, with X and R drawn from `seed`.
GradCheck gradient_check_layer(Layer& layer, Eigen::Index in_time, Eigen::Index in_channels,
                               std::uint64_t seed, double eps = 1e-5);

/// Whole-network check through the MSE loss on one random window/target pair.
GradCheck gradient_check_network(Network& net, std::uint64_t seed, double eps = 1e-5);

}  // namespace seepline::nn
