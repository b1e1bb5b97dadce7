// Copyright (c) 2026, the pansharp authors
// SPDX-License-Identifier: Apache-2.0
//
// Minimal reverse-mode differentiation engine. Tensors are NCHW value grids
// with a lazily materialized gradient slot and an operation record for the
// reverse traversal. The backward pass visits each node exactly once in
// reverse topological order and *accumulates* into gradients, so calling
// backward twice doubles them; optimizers clear grads between steps.
//
// float instances are used for training, double instances for gradient
// checks (see gradcheck.hpp).
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "pansharp/rng.hpp"

namespace pansharp::ad {

struct Shape {
  int n = 0, c = 0, h = 0, w = 0;

  int64_t numel() const { return static_cast<int64_t>(n) * c * h * w; }
  int64_t plane() const { return static_cast<int64_t>(h) * w; }
  bool operator==(const Shape& o) const { return n == o.n && c == o.c && h == o.h && w == o.w; }
  bool operator!=(const Shape& o) const { return !(*this == o); }
  std::string str() const {
    return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," +
           std::to_string(w) + ")";
  }
};

template <typename T>
struct Node {
  Shape shape;
  std::vector<T> v;
  std::vector<T> g;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node<T>>> parents;
  std::function<void(Node<T>&)> backward;

  void ensure_grad() {
    if (g.size() != v.size()) g.assign(v.size(), T(0));
  }
};

// Graph recording can be suspended (inference, finite-difference probes).
inline thread_local bool g_grad_enabled = true;

struct NoGradGuard {
  bool prev;
  NoGradGuard() : prev(g_grad_enabled) { g_grad_enabled = false; }
  ~NoGradGuard() { g_grad_enabled = prev; }
};

template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node<T>> n) : n_(std::move(n)) {}

  static Tensor zeros(Shape s) {
    auto n = std::make_shared<Node<T>>();
    n->shape = s;
    n->v.assign(static_cast<size_t>(s.numel()), T(0));
    return Tensor(std::move(n));
  }

  static Tensor full(Shape s, T value) {
    Tensor t = zeros(s);
    for (T& x : t.node()->v) x = value;
    return t;
  }

  static Tensor from_values(Shape s, std::vector<T> values) {
    if (static_cast<int64_t>(values.size()) != s.numel())
      throw std::invalid_argument("tensor: value count does not match shape " + s.str());
    auto n = std::make_shared<Node<T>>();
    n->shape = s;
    n->v = std::move(values);
    return Tensor(std::move(n));
  }

  bool defined() const { return n_ != nullptr; }
  const Shape& shape() const { return n_->shape; }
  int64_t numel() const { return n_->shape.numel(); }
  std::vector<T>& values() { return n_->v; }
  const std::vector<T>& values() const { return n_->v; }
  std::vector<T>& grad() { return n_->g; }
  const std::vector<T>& grad() const { return n_->g; }
  bool requires_grad() const { return n_->requires_grad; }
  void set_requires_grad(bool rg) { n_->requires_grad = rg; }
  std::shared_ptr<Node<T>> node() const { return n_; }

  T item() const {
    if (numel() != 1) throw std::invalid_argument("tensor: item() on non-scalar " + shape().str());
    return n_->v[0];
  }

  // Leaf copy of the values, cut off from the graph.
  Tensor detach() const {
    auto n = std::make_shared<Node<T>>();
    n->shape = n_->shape;
    n->v = n_->v;
    return Tensor(std::move(n));
  }

  void zero_grad() { n_->g.clear(); }

 private:
  std::shared_ptr<Node<T>> n_;
};

// Creates an op node. The backward callback is only retained when gradients
// are enabled and some parent requires them.
template <typename T>
Tensor<T> make_op(Shape s, std::vector<T> values, std::vector<Tensor<T>> parents,
                  std::function<void(Node<T>&)> backward) {
  auto n = std::make_shared<Node<T>>();
  n->shape = s;
  n->v = std::move(values);
  bool rg = false;
  if (g_grad_enabled) {
    for (const auto& p : parents) rg = rg || p.requires_grad();
  }
  if (rg) {
    n->requires_grad = true;
    n->parents.reserve(parents.size());
    for (auto& p : parents) n->parents.push_back(p.node());
    n->backward = std::move(backward);
  }
  return Tensor<T>(std::move(n));
}

template <typename T>
void accumulate(Node<T>& dst, const std::vector<T>& delta) {
  dst.ensure_grad();
  for (size_t i = 0; i < delta.size(); ++i) dst.g[i] += delta[i];
}

// Reverse-mode sweep from a scalar loss. Gradients accumulate.
template <typename T>
void backward(const Tensor<T>& loss) {
  if (loss.numel() != 1) throw std::invalid_argument("backward: loss must be scalar");
  if (!loss.requires_grad()) return;

  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> seen;
  // Iterative DFS, postorder: a node is appended after everything reachable
  // from it, so the reversed list runs every consumer before its producers.
  std::vector<std::pair<Node<T>*, size_t>> stack;
  stack.emplace_back(loss.node().get(), 0);
  seen.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->parents.size()) {
      Node<T>* p = node->parents[idx++].get();
      if (p->requires_grad && !seen.count(p)) {
        seen.insert(p);
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  // Interior (op) gradients are transient per sweep; only leaves accumulate
  // across repeated backward calls.
  for (Node<T>* node : order) {
    if (node->backward) node->g.assign(node->v.size(), T(0));
  }
  loss.node()->ensure_grad();
  loss.node()->g[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* node = *it;
    if (node->backward) {
      node->ensure_grad();
      node->backward(*node);
    }
  }
}

// ---- Elementwise ops ----

template <typename T>
void check_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  if (a.shape() != b.shape())
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.shape().str() + " vs " +
                                b.shape().str());
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  check_same_shape(a, b, "add");
  std::vector<T> v(a.values());
  for (size_t i = 0; i < v.size(); ++i) v[i] += b.values()[i];
  auto an = a.node();
  auto bn = b.node();
  return make_op<T>(a.shape(), std::move(v), {a, b}, [an, bn](Node<T>& self) {
    if (an->requires_grad) accumulate(*an, self.g);
    if (bn->requires_grad) accumulate(*bn, self.g);
  });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  check_same_shape(a, b, "sub");
  std::vector<T> v(a.values());
  for (size_t i = 0; i < v.size(); ++i) v[i] -= b.values()[i];
  auto an = a.node();
  auto bn = b.node();
  return make_op<T>(a.shape(), std::move(v), {a, b}, [an, bn](Node<T>& self) {
    if (an->requires_grad) accumulate(*an, self.g);
    if (bn->requires_grad) {
      bn->ensure_grad();
      for (size_t i = 0; i < self.g.size(); ++i) bn->g[i] -= self.g[i];
    }
  });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  check_same_shape(a, b, "mul");
  std::vector<T> v(a.values());
  for (size_t i = 0; i < v.size(); ++i) v[i] *= b.values()[i];
  auto an = a.node();
  auto bn = b.node();
  return make_op<T>(a.shape(), std::move(v), {a, b}, [an, bn](Node<T>& self) {
    if (an->requires_grad) {
      an->ensure_grad();
      for (size_t i = 0; i < self.g.size(); ++i) an->g[i] += self.g[i] * bn->v[i];
    }
    if (bn->requires_grad) {
      bn->ensure_grad();
      for (size_t i = 0; i < self.g.size(); ++i) bn->g[i] += self.g[i] * an->v[i];
    }
  });
}

// Elementwise division; denominators must be nonzero (the only division on a
// backward path is the guided-filter (sigma^2 + lambda), guarded upstream).
template <typename T>
Tensor<T> div(const Tensor<T>& a, const Tensor<T>& b) {
  check_same_shape(a, b, "div");
  std::vector<T> v(a.values());
  for (size_t i = 0; i < v.size(); ++i) v[i] /= b.values()[i];
  auto an = a.node();
  auto bn = b.node();
  return make_op<T>(a.shape(), std::move(v), {a, b}, [an, bn](Node<T>& self) {
    if (an->requires_grad) {
      an->ensure_grad();
      for (size_t i = 0; i < self.g.size(); ++i) an->g[i] += self.g[i] / bn->v[i];
    }
    if (bn->requires_grad) {
      bn->ensure_grad();
      for (size_t i = 0; i < self.g.size(); ++i)
        bn->g[i] -= self.g[i] * an->v[i] / (bn->v[i] * bn->v[i]);
    }
  });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, double s) {
  std::vector<T> v(a.values());
  for (T& x : v) x = static_cast<T>(x * s);
  auto an = a.node();
  return make_op<T>(a.shape(), std::move(v), {a}, [an, s](Node<T>& self) {
    an->ensure_grad();
    for (size_t i = 0; i < self.g.size(); ++i) an->g[i] += static_cast<T>(self.g[i] * s);
  });
}

template <typename T>
Tensor<T> add_scalar(const Tensor<T>& a, double s) {
  std::vector<T> v(a.values());
  for (T& x : v) x = static_cast<T>(x + s);
  auto an = a.node();
  return make_op<T>(a.shape(), std::move(v), {a},
                    [an](Node<T>& self) { accumulate(*an, self.g); });
}

// max(x, 0); subgradient 0 at exactly 0.
template <typename T>
Tensor<T> relu(const Tensor<T>& a) {
  std::vector<T> v(a.values());
  for (T& x : v) x = x > T(0) ? x : T(0);
  auto an = a.node();
  return make_op<T>(a.shape(), std::move(v), {a}, [an](Node<T>& self) {
    an->ensure_grad();
    for (size_t i = 0; i < self.g.size(); ++i) {
      if (an->v[i] > T(0)) an->g[i] += self.g[i];
    }
  });
}

// max(x, alpha*x); derivative alpha at exactly 0 (the subdifferential there is
// [alpha,1], which excludes 0; see decisions in repo docs).
template <typename T>
Tensor<T> lrelu(const Tensor<T>& a, double alpha = 0.2) {
  std::vector<T> v(a.values());
  for (T& x : v) {
    if (x < T(0)) x = static_cast<T>(x * alpha);
  }
  auto an = a.node();
  return make_op<T>(a.shape(), std::move(v), {a}, [an, alpha](Node<T>& self) {
    an->ensure_grad();
    for (size_t i = 0; i < self.g.size(); ++i)
      an->g[i] += an->v[i] > T(0) ? self.g[i] : static_cast<T>(self.g[i] * alpha);
  });
}

template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.n != sb.n || sa.h != sb.h || sa.w != sb.w)
    throw std::invalid_argument("concat: spatial/batch mismatch " + sa.str() + " vs " + sb.str());
  Shape s{sa.n, sa.c + sb.c, sa.h, sa.w};
  std::vector<T> v(static_cast<size_t>(s.numel()));
  int64_t pl = sa.plane();
  for (int n = 0; n < sa.n; ++n) {
    const T* pa = a.values().data() + n * sa.c * pl;
    const T* pb = b.values().data() + n * sb.c * pl;
    T* pv = v.data() + n * s.c * pl;
    std::copy(pa, pa + sa.c * pl, pv);
    std::copy(pb, pb + sb.c * pl, pv + sa.c * pl);
  }
  auto an = a.node();
  auto bn = b.node();
  return make_op<T>(s, std::move(v), {a, b}, [an, bn, sa, sb, pl](Node<T>& self) {
    int ctot = sa.c + sb.c;
    if (an->requires_grad) {
      an->ensure_grad();
      for (int n = 0; n < sa.n; ++n)
        for (int64_t i = 0; i < sa.c * pl; ++i) an->g[n * sa.c * pl + i] += self.g[n * ctot * pl + i];
    }
    if (bn->requires_grad) {
      bn->ensure_grad();
      for (int n = 0; n < sa.n; ++n)
        for (int64_t i = 0; i < sb.c * pl; ++i)
          bn->g[n * sb.c * pl + i] += self.g[(n * ctot + sa.c) * pl + i];
    }
  });
}

// ---- Reductions (accumulated in double for determinism-friendly accuracy) ----

template <typename T>
Tensor<T> mean_all(const Tensor<T>& a) {
  double acc = 0.0;
  for (T x : a.values()) acc += static_cast<double>(x);
  double inv = 1.0 / static_cast<double>(a.numel());
  auto an = a.node();
  return make_op<T>({1, 1, 1, 1}, {static_cast<T>(acc * inv)}, {a}, [an, inv](Node<T>& self) {
    an->ensure_grad();
    T g = static_cast<T>(static_cast<double>(self.g[0]) * inv);
    for (size_t i = 0; i < an->g.size(); ++i) an->g[i] += g;
  });
}

// mean((a-b)^2) * weight; weight 1 gives Eq.-style MSE, 0.5 the half forms.
template <typename T>
Tensor<T> weighted_mse(const Tensor<T>& a, const Tensor<T>& b, double weight) {
  check_same_shape(a, b, "mse");
  double acc = 0.0;
  for (size_t i = 0; i < a.values().size(); ++i) {
    double d = static_cast<double>(a.values()[i]) - static_cast<double>(b.values()[i]);
    acc += d * d;
  }
  double inv = weight / static_cast<double>(a.numel());
  auto an = a.node();
  auto bn = b.node();
  return make_op<T>({1, 1, 1, 1}, {static_cast<T>(acc * inv)}, {a, b}, [an, bn, inv](Node<T>& self) {
    double g2 = 2.0 * inv * static_cast<double>(self.g[0]);
    if (an->requires_grad) {
      an->ensure_grad();
      for (size_t i = 0; i < an->g.size(); ++i)
        an->g[i] += static_cast<T>(g2 * (static_cast<double>(an->v[i]) - static_cast<double>(bn->v[i])));
    }
    if (bn->requires_grad) {
      bn->ensure_grad();
      for (size_t i = 0; i < bn->g.size(); ++i)
        bn->g[i] -= static_cast<T>(g2 * (static_cast<double>(an->v[i]) - static_cast<double>(bn->v[i])));
    }
  });
}

template <typename T>
Tensor<T> mse_mean(const Tensor<T>& a, const Tensor<T>& b) {
  return weighted_mse(a, b, 1.0);
}

// 0.5 * mean((a - label)^2) against a constant label.
template <typename T>
Tensor<T> half_mse_const(const Tensor<T>& a, double label) {
  double acc = 0.0;
  for (T x : a.values()) {
    double d = static_cast<double>(x) - label;
    acc += d * d;
  }
  double inv = 0.5 / static_cast<double>(a.numel());
  auto an = a.node();
  return make_op<T>({1, 1, 1, 1}, {static_cast<T>(acc * inv)}, {a}, [an, inv, label](Node<T>& self) {
    an->ensure_grad();
    double g2 = 2.0 * inv * static_cast<double>(self.g[0]);
    for (size_t i = 0; i < an->g.size(); ++i)
      an->g[i] += static_cast<T>(g2 * (static_cast<double>(an->v[i]) - label));
  });
}

// ---- Trainable parameters and optimizers ----

template <typename T>
struct Param {
  Tensor<T> tensor;
  std::string name;

  Param() = default;
  Param(Shape s, std::string n) : tensor(Tensor<T>::zeros(s)), name(std::move(n)) {
    tensor.set_requires_grad(true);
  }
};

// Weights from N(0, std); biases stay zero unless filled explicitly.
template <typename T>
void init_gaussian(Param<T>& p, Rng& rng, double stddev = 0.02) {
  for (T& x : p.tensor.values()) x = static_cast<T>(rng.normal(0.0, stddev));
}

template <typename T>
void zero_grads(const std::vector<Param<T>*>& params) {
  for (auto* p : params) p->tensor.zero_grad();
}

// Adam with bias correction; beta defaults follow the training setup
// (beta1 = 0.5, beta2 = 0.999, eps = 1e-8).
template <typename T>
class Adam {
 public:
  double lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
  int64_t step_count = 0;

  struct State {
    std::vector<T> m, v;
  };
  std::map<std::string, State> states;

  void step(const std::vector<Param<T>*>& params) {
    ++step_count;
    double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
    double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
    for (auto* p : params) {
      auto& s = states[p->name];
      auto& val = p->tensor.values();
      auto& grad = p->tensor.grad();
      if (s.m.size() != val.size()) {
        s.m.assign(val.size(), T(0));
        s.v.assign(val.size(), T(0));
      }
      if (grad.empty()) continue;  // zero gradient: moments decay to no-op
      if (grad.size() != val.size())
        throw std::invalid_argument("adam: grad shape mismatch for " + p->name);
      for (size_t i = 0; i < val.size(); ++i) {
        double g = static_cast<double>(grad[i]);
        double m = beta1 * static_cast<double>(s.m[i]) + (1.0 - beta1) * g;
        double v = beta2 * static_cast<double>(s.v[i]) + (1.0 - beta2) * g * g;
        s.m[i] = static_cast<T>(m);
        s.v[i] = static_cast<T>(v);
        double mhat = m / bc1;
        double vhat = v / bc2;
        val[i] = static_cast<T>(static_cast<double>(val[i]) - lr * mhat / (std::sqrt(vhat) + eps));
      }
    }
  }
};

// Plain mini-batch gradient descent (no momentum), used for discriminators.
template <typename T>
class Sgd {
 public:
  double lr = 2e-4;
  int64_t step_count = 0;

  void step(const std::vector<Param<T>*>& params) {
    ++step_count;
    for (auto* p : params) {
      auto& val = p->tensor.values();
      auto& grad = p->tensor.grad();
      if (grad.empty()) continue;
      if (grad.size() != val.size())
        throw std::invalid_argument("sgd: grad shape mismatch for " + p->name);
      for (size_t i = 0; i < val.size(); ++i)
        val[i] = static_cast<T>(static_cast<double>(val[i]) - lr * static_cast<double>(grad[i]));
    }
  }
};

}  // namespace pansharp::ad
