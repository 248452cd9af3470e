#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "irsalloc/rng.hpp"

namespace irsalloc {

// One replay record (s, a1, a2_raw, r, s').
struct Transition {
    Eigen::VectorXd s;
    std::vector<int> a1;       // per-channel user indices
    Eigen::VectorXd a2_raw;    // actor output before constraint mapping
    double r = 0.0;
    Eigen::VectorXd s_next;
};

// Fixed-capacity FIFO store with uniform sampling (with replacement).
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity = 6000) : capacity_(capacity) {
        if (capacity_ == 0) throw std::invalid_argument("ReplayBuffer: capacity must be >= 1");
    }

    void push(Transition t) {
        if (size() > 0) {
            const Transition& ref = oldest();
            if (t.s.size() != ref.s.size() || t.s_next.size() != ref.s_next.size() ||
                t.a1.size() != ref.a1.size() || t.a2_raw.size() != ref.a2_raw.size())
                throw std::invalid_argument("ReplayBuffer::push: transition dimension mismatch");
        }
        if (data_.size() < capacity_) {
            data_.push_back(std::move(t));
        } else {
            data_[next_] = std::move(t);
            next_ = (next_ + 1) % capacity_;
        }
    }

    std::size_t size() const { return data_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool ready(std::size_t batch_size) const { return size() >= batch_size; }

    // i = 0 is the oldest surviving transition
    const Transition& at(std::size_t i) const {
        if (i >= size()) throw std::out_of_range("ReplayBuffer::at");
        return data_[(next_ + i) % data_.size()];
    }

    // n uniform draws with replacement; caller must check ready() first.
    std::vector<const Transition*> sample(std::size_t n, Rng& rng) const {
        if (!ready(n)) throw std::logic_error("ReplayBuffer::sample: buffer not ready");
        std::vector<const Transition*> out;
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
            out.push_back(&data_[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(size())))]);
        return out;
    }

private:
    const Transition& oldest() const { return data_[data_.size() < capacity_ ? 0 : next_]; }

    std::size_t capacity_;
    std::size_t next_ = 0;  // slot holding the oldest entry once full
    std::vector<Transition> data_;
};

// Column-major assembly of a sampled minibatch (one sample per column).
struct Batch {
    Eigen::MatrixXd s;        // L x n
    Eigen::MatrixXd s_next;   // L x n
    Eigen::MatrixXi a1;       // C x n
    Eigen::MatrixXd a2;       // a2_dim x n
    Eigen::VectorXd r;        // n

    int size() const { return static_cast<int>(r.size()); }
};

inline Batch assemble_batch(const std::vector<const Transition*>& samples) {
    if (samples.empty()) throw std::invalid_argument("assemble_batch: empty sample");
    const int n = static_cast<int>(samples.size());
    const auto& first = *samples.front();
    Batch b;
    b.s.resize(first.s.size(), n);
    b.s_next.resize(first.s_next.size(), n);
    b.a1.resize(static_cast<int>(first.a1.size()), n);
    b.a2.resize(first.a2_raw.size(), n);
    b.r.resize(n);
    for (int i = 0; i < n; ++i) {
        const Transition& t = *samples[i];
        b.s.col(i) = t.s;
        b.s_next.col(i) = t.s_next;
        for (int c = 0; c < b.a1.rows(); ++c) b.a1(c, i) = t.a1[c];
        b.a2.col(i) = t.a2_raw;
        b.r(i) = t.r;
    }
    return b;
}

}  // namespace irsalloc
