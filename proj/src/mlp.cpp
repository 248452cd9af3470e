#include "irsalloc/mlp.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace irsalloc {

Mlp Mlp::make(std::vector<int> sizes, OutputActivation out_act, Rng& rng) {
    if (sizes.size() < 2) throw std::invalid_argument("Mlp: need at least input and output sizes");
    for (int s : sizes)
        if (s < 1) throw std::invalid_argument("Mlp: layer sizes must be >= 1");
    Mlp net;
    net.sizes_ = std::move(sizes);
    net.out_act_ = out_act;
    for (size_t l = 0; l + 1 < net.sizes_.size(); ++l) {
        const int fan_in = net.sizes_[l], fan_out = net.sizes_[l + 1];
        const double limit = 1.0 / std::sqrt(static_cast<double>(fan_in));
        Mat w(fan_out, fan_in);
        for (int j = 0; j < fan_in; ++j)
            for (int i = 0; i < fan_out; ++i) w(i, j) = rng.uniform(-limit, limit);
        Vec b(fan_out);
        for (int i = 0; i < fan_out; ++i) b(i) = rng.uniform(-limit, limit);
        net.w_.push_back(std::move(w));
        net.b_.push_back(std::move(b));
    }
    return net;
}

Mat Mlp::forward(const Mat& x, ForwardCache* cache) const {
    if (x.rows() != input_dim()) throw std::invalid_argument("Mlp::forward: input length mismatch");
    if (cache) {
        cache->act.clear();
        cache->act.reserve(w_.size() + 1);
        cache->act.push_back(x);
    }
    Mat a = x;
    const int L = num_layers();
    for (int l = 0; l < L; ++l) {
        Mat z = (w_[l] * a).colwise() + b_[l];
        if (l + 1 < L) {
            a = z.cwiseMax(0.0);  // ReLU
        } else if (out_act_ == OutputActivation::Tanh) {
            a = z.array().tanh();
        } else {
            a = std::move(z);
        }
        if (cache) cache->act.push_back(a);
    }
    return a;
}

Vec Mlp::forward1(const Vec& x) const { return forward(Mat(x)); }

Gradients Mlp::backward(const ForwardCache& cache, const Mat& dy, Mat* dx) const {
    const int L = num_layers();
    if (static_cast<int>(cache.act.size()) != L + 1)
        throw std::invalid_argument("Mlp::backward: missing or stale forward cache");
    if (dy.rows() != output_dim() || dy.cols() != cache.act.back().cols())
        throw std::invalid_argument("Mlp::backward: output gradient shape mismatch");

    Gradients g;
    g.dw.resize(L);
    g.db.resize(L);
    Mat delta;  // dL/dz for the current layer
    if (out_act_ == OutputActivation::Tanh) {
        delta = dy.cwiseProduct(Mat(1.0 - cache.act[L].array().square()));
    } else {
        delta = dy;
    }
    for (int l = L - 1; l >= 0; --l) {
        g.dw[l].noalias() = delta * cache.act[l].transpose();
        g.db[l] = delta.rowwise().sum();
        if (l > 0) {
            Mat da = w_[l].transpose() * delta;
            // ReLU derivative from the stored activation
            delta = da.cwiseProduct((cache.act[l].array() > 0.0).cast<double>().matrix());
        } else if (dx) {
            dx->noalias() = w_[0].transpose() * delta;
        }
    }
    return g;
}

Gradients Mlp::zero_gradients() const {
    Gradients g;
    for (int l = 0; l < num_layers(); ++l) {
        g.dw.push_back(Mat::Zero(w_[l].rows(), w_[l].cols()));
        g.db.push_back(Vec::Zero(b_[l].size()));
    }
    return g;
}

double Mlp::parameter_norm() const {
    double s = 0.0;
    for (const auto& w : w_) s += w.squaredNorm();
    for (const auto& b : b_) s += b.squaredNorm();
    return std::sqrt(s);
}

bool Mlp::parameters_finite() const {
    for (const auto& w : w_)
        if (!w.allFinite()) return false;
    for (const auto& b : b_)
        if (!b.allFinite()) return false;
    return true;
}

void copy_parameters(const Mlp& src, Mlp& dst) {
    if (src.sizes() != dst.sizes() || src.output_activation() != dst.output_activation())
        throw std::invalid_argument("copy_parameters: architecture mismatch");
    for (int l = 0; l < src.num_layers(); ++l) {
        dst.weights(l) = src.weights(l);
        dst.biases(l) = src.biases(l);
    }
}

double gradient_global_norm(const Gradients& grads) {
    double s = 0.0;
    for (const auto& m : grads.dw) s += m.squaredNorm();
    for (const auto& v : grads.db) s += v.squaredNorm();
    return std::sqrt(s);
}

Optimizer Optimizer::make(Kind kind, double learning_rate, const Mlp& net, double clip_norm) {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("Optimizer: learning rate must be positive");
    Optimizer opt;
    opt.kind_ = kind;
    opt.lr_ = learning_rate;
    opt.clip_norm_ = clip_norm;
    if (kind == Kind::Adam) {
        for (int l = 0; l < net.num_layers(); ++l) {
            opt.mw_.push_back(Mat::Zero(net.weights(l).rows(), net.weights(l).cols()));
            opt.vw_.push_back(Mat::Zero(net.weights(l).rows(), net.weights(l).cols()));
            opt.mb_.push_back(Vec::Zero(net.biases(l).size()));
            opt.vb_.push_back(Vec::Zero(net.biases(l).size()));
        }
    }
    return opt;
}

void Optimizer::step(Mlp& net, Gradients& grads) {
    if (static_cast<int>(grads.dw.size()) != net.num_layers())
        throw std::invalid_argument("Optimizer::step: gradient/parameter shape mismatch");
    const double norm = gradient_global_norm(grads);
    if (!std::isfinite(norm)) throw std::runtime_error("Optimizer::step: non-finite gradient");
    if (clip_norm_ > 0.0 && norm > clip_norm_) {
        const double scale = clip_norm_ / norm;
        for (auto& m : grads.dw) m *= scale;
        for (auto& v : grads.db) v *= scale;
    }
    ++t_;
    if (kind_ == Kind::Sgd) {
        for (int l = 0; l < net.num_layers(); ++l) {
            net.weights(l) -= lr_ * grads.dw[l];
            net.biases(l) -= lr_ * grads.db[l];
        }
        return;
    }
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
    for (int l = 0; l < net.num_layers(); ++l) {
        mw_[l] = beta1 * mw_[l] + (1.0 - beta1) * grads.dw[l];
        vw_[l] = beta2 * vw_[l] + (1.0 - beta2) * grads.dw[l].cwiseProduct(grads.dw[l]);
        mb_[l] = beta1 * mb_[l] + (1.0 - beta1) * grads.db[l];
        vb_[l] = beta2 * vb_[l] + (1.0 - beta2) * grads.db[l].cwiseProduct(grads.db[l]);
        net.weights(l).array() -=
            lr_ * (mw_[l].array() / bc1) / ((vw_[l].array() / bc2).sqrt() + epsilon);
        net.biases(l).array() -=
            lr_ * (mb_[l].array() / bc1) / ((vb_[l].array() / bc2).sqrt() + epsilon);
    }
}

namespace {

constexpr char kMlpMagic[8] = {'I', 'R', 'S', 'M', 'L', 'P', '1', '\n'};

}  // namespace

void save_mlp(const std::string& path, const Mlp& net) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_mlp: cannot open " + path);
    out.write(kMlpMagic, sizeof kMlpMagic);
    const std::int32_t n = static_cast<std::int32_t>(net.sizes().size());
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    for (int s : net.sizes()) {
        const std::int32_t v = s;
        out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
    const std::int32_t act = net.output_activation() == OutputActivation::Tanh ? 1 : 0;
    out.write(reinterpret_cast<const char*>(&act), sizeof act);
    for (int l = 0; l < net.num_layers(); ++l) {
        const Mat& w = net.weights(l);
        out.write(reinterpret_cast<const char*>(w.data()),
                  static_cast<std::streamsize>(sizeof(double) * w.size()));
        const Vec& b = net.biases(l);
        out.write(reinterpret_cast<const char*>(b.data()),
                  static_cast<std::streamsize>(sizeof(double) * b.size()));
    }
    if (!out) throw std::runtime_error("save_mlp: write failed for " + path);
}

Mlp load_mlp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_mlp: cannot open " + path);
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMlpMagic, sizeof magic) != 0)
        throw std::runtime_error("load_mlp: bad header in " + path);
    std::int32_t n = 0;
    in.read(reinterpret_cast<char*>(&n), sizeof n);
    if (n < 2 || n > 64) throw std::runtime_error("load_mlp: bad architecture in " + path);
    std::vector<int> sizes(n);
    for (auto& s : sizes) {
        std::int32_t v = 0;
        in.read(reinterpret_cast<char*>(&v), sizeof v);
        s = v;
    }
    std::int32_t act = 0;
    in.read(reinterpret_cast<char*>(&act), sizeof act);
    Rng dummy(0);
    Mlp net = Mlp::make(sizes, act == 1 ? OutputActivation::Tanh : OutputActivation::Linear, dummy);
    for (int l = 0; l < net.num_layers(); ++l) {
        Mat& w = net.weights(l);
        in.read(reinterpret_cast<char*>(w.data()),
                static_cast<std::streamsize>(sizeof(double) * w.size()));
        Vec& b = net.biases(l);
        in.read(reinterpret_cast<char*>(b.data()),
                static_cast<std::streamsize>(sizeof(double) * b.size()));
    }
    if (!in) throw std::runtime_error("load_mlp: truncated file " + path);
    return net;
}

}  // namespace irsalloc
