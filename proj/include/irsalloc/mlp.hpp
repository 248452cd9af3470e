#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "irsalloc/rng.hpp"

namespace irsalloc {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

enum class OutputActivation { Linear, Tanh };

// Activations kept from the last forward pass; act[0] is the input batch and
// act[i] the output of layer i. Batches are column-major: one sample per column.
struct ForwardCache {
    std::vector<Mat> act;
};

struct Gradients {
    std::vector<Mat> dw;
    std::vector<Vec> db;
};

// Dense feed-forward network, ReLU hidden layers, linear or tanh output.
class Mlp {
public:
    Mlp() = default;

    // sizes = {input, hidden..., output}; weights ~ U(-1/sqrt(fan_in), +1/sqrt(fan_in))
    static Mlp make(std::vector<int> sizes, OutputActivation out_act, Rng& rng);

    int input_dim() const { return sizes_.front(); }
    int output_dim() const { return sizes_.back(); }
    int num_layers() const { return static_cast<int>(w_.size()); }
    const std::vector<int>& sizes() const { return sizes_; }
    OutputActivation output_activation() const { return out_act_; }

    Mat& weights(int layer) { return w_[layer]; }
    Vec& biases(int layer) { return b_[layer]; }
    const Mat& weights(int layer) const { return w_[layer]; }
    const Vec& biases(int layer) const { return b_[layer]; }

    // x: input_dim x batch. Fills `cache` for backward when given.
    Mat forward(const Mat& x, ForwardCache* cache = nullptr) const;
    Vec forward1(const Vec& x) const;

    // Reverse-mode gradients for all parameters from dL/d(output); returns the
    // input gradient through `dx` when requested. Requires a cache from forward.
    Gradients backward(const ForwardCache& cache, const Mat& dy, Mat* dx = nullptr) const;

    Gradients zero_gradients() const;
    double parameter_norm() const;
    bool parameters_finite() const;

private:
    std::vector<int> sizes_;
    std::vector<Mat> w_;  // w_[l]: sizes_[l+1] x sizes_[l]
    std::vector<Vec> b_;
    OutputActivation out_act_ = OutputActivation::Linear;
};

// dst <- src parameters; architectures must match exactly.
void copy_parameters(const Mlp& src, Mlp& dst);

// Flat binary checkpoint: architecture header then parameters in layer order.
void save_mlp(const std::string& path, const Mlp& net);
Mlp load_mlp(const std::string& path);

double gradient_global_norm(const Gradients& grads);

// First-order optimizer with optional global-norm gradient clipping. Fails
// loudly (std::runtime_error) when the gradient norm is non-finite.
class Optimizer {
public:
    enum class Kind { Sgd, Adam };

    static Optimizer make(Kind kind, double learning_rate, const Mlp& net, double clip_norm = 1.0);

    void step(Mlp& net, Gradients& grads);

    Kind kind() const { return kind_; }
    double learning_rate() const { return lr_; }
    long step_count() const { return t_; }

    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

private:
    Kind kind_ = Kind::Adam;
    double lr_ = 1e-3;
    double clip_norm_ = 1.0;  // <= 0 disables clipping
    long t_ = 0;
    std::vector<Mat> mw_, vw_;
    std::vector<Vec> mb_, vb_;
};

}  // namespace irsalloc
