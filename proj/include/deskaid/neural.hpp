// Copyright 2026 The deskaid Authors.
// SPDX-License-Identifier: Apache-2.0

// Small dense / graph-convolution networks with hand-written backprop.
// Everything is templated on the scalar type so gradient checks can run in
// double while the same code serves training.

#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "deskaid/common.hpp"

namespace deskaid::nn {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using SparseMatrix = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;

enum class LayerType { kDense, kGraphConv };

// y = relu?(A x W^T + b), where A is the identity for dense layers and the
// normalized adjacency for graph layers.
template <typename Scalar>
struct Layer {
  LayerType type = LayerType::kDense;
  bool relu = true;
  Matrix<Scalar> W;  // out x in
  Vector<Scalar> b;  // out
};

template <typename Scalar>
using Network = std::vector<Layer<Scalar>>;

template <typename Scalar>
struct Trace {
  std::vector<Matrix<Scalar>> inputs;      // H_l
  std::vector<Matrix<Scalar>> aggregated;  // A H_l (graph layers only)
  std::vector<Matrix<Scalar>> pre;         // pre-activation Z_l
};

template <typename Scalar>
Scalar Sigmoid(Scalar z) {
  if (z >= 0) return Scalar(1) / (Scalar(1) + std::exp(-z));
  const Scalar e = std::exp(z);
  return e / (Scalar(1) + e);
}

// log(1 + e^z) without overflow.
template <typename Scalar>
Scalar Softplus(Scalar z) {
  return std::max(z, Scalar(0)) + std::log1p(std::exp(-std::abs(z)));
}

template <typename Scalar>
Layer<Scalar> HeLayer(Eigen::Index in, Eigen::Index out, LayerType type, bool relu, Rng& rng) {
  Layer<Scalar> layer;
  layer.type = type;
  layer.relu = relu;
  layer.W.resize(out, in);
  const double scale = std::sqrt(2.0 / static_cast<double>(in));
  for (Eigen::Index i = 0; i < out; ++i) {
    for (Eigen::Index j = 0; j < in; ++j) layer.W(i, j) = Scalar(scale * StandardNormal(rng));
  }
  layer.b = Vector<Scalar>::Zero(out);
  return layer;
}

// in -> hidden... -> 1 logit.
template <typename Scalar>
Network<Scalar> MakeMlp(Eigen::Index in, const std::vector<int>& hidden, Rng& rng) {
  Network<Scalar> net;
  Eigen::Index width = in;
  for (int h : hidden) {
    net.push_back(HeLayer<Scalar>(width, h, LayerType::kDense, true, rng));
    width = h;
  }
  net.push_back(HeLayer<Scalar>(width, 1, LayerType::kDense, false, rng));
  return net;
}

// Dense in -> width, `conv_layers` graph layers width -> width, then the
// dense head -> 1 logit.
template <typename Scalar>
Network<Scalar> MakeGcnn(Eigen::Index in, int width, int conv_layers,
                         const std::vector<int>& head, Rng& rng) {
  Network<Scalar> net;
  net.push_back(HeLayer<Scalar>(in, width, LayerType::kDense, true, rng));
  for (int k = 0; k < conv_layers; ++k) {
    net.push_back(HeLayer<Scalar>(width, width, LayerType::kGraphConv, true, rng));
  }
  Eigen::Index w = width;
  for (int h : head) {
    net.push_back(HeLayer<Scalar>(w, h, LayerType::kDense, true, rng));
    w = h;
  }
  net.push_back(HeLayer<Scalar>(w, 1, LayerType::kDense, false, rng));
  return net;
}

// Logits, one per input row. `adj` may be null when the network has no
// graph layers.
template <typename Scalar>
Vector<Scalar> Forward(const Network<Scalar>& net, const Matrix<Scalar>& X,
                       const SparseMatrix<Scalar>* adj, Trace<Scalar>* trace = nullptr) {
  Matrix<Scalar> h = X;
  if (trace) {
    trace->inputs.clear();
    trace->aggregated.clear();
    trace->pre.clear();
  }
  for (const auto& layer : net) {
    Matrix<Scalar> a;
    if (layer.type == LayerType::kGraphConv) {
      if (!adj) throw Error(ErrorCode::kInvalidArgument, "graph layer without adjacency");
      a = (*adj) * h;
    }
    const Matrix<Scalar>& in = layer.type == LayerType::kGraphConv ? a : h;
    Matrix<Scalar> z = in * layer.W.transpose();
    z.rowwise() += layer.b.transpose();
    if (trace) {
      trace->inputs.push_back(std::move(h));
      trace->aggregated.push_back(std::move(a));
      trace->pre.push_back(z);
    }
    h = layer.relu ? Matrix<Scalar>(z.cwiseMax(Scalar(0))) : z;
  }
  return h.col(0);
}

// Mean binary cross-entropy over `rows`.
template <typename Scalar>
Scalar Loss(const Vector<Scalar>& logits, const Vector<Scalar>& labels,
            const std::vector<Eigen::Index>& rows) {
  Scalar total(0);
  for (Eigen::Index r : rows) total += Softplus(logits[r]) - labels[r] * logits[r];
  return total / Scalar(rows.size());
}

template <typename Scalar>
Network<Scalar> ZerosLike(const Network<Scalar>& net) {
  Network<Scalar> g = net;
  for (auto& layer : g) {
    layer.W.setZero();
    layer.b.setZero();
  }
  return g;
}

// Loss over `rows` and its gradient with respect to every parameter.
template <typename Scalar>
Scalar LossAndGradient(const Network<Scalar>& net, const Matrix<Scalar>& X,
                       const SparseMatrix<Scalar>* adj, const Vector<Scalar>& labels,
                       const std::vector<Eigen::Index>& rows, Network<Scalar>& grad) {
  Trace<Scalar> trace;
  const Vector<Scalar> logits = Forward(net, X, adj, &trace);
  const Scalar loss = Loss(logits, labels, rows);

  grad = ZerosLike(net);
  Matrix<Scalar> dz = Matrix<Scalar>::Zero(X.rows(), 1);
  const Scalar inv_m = Scalar(1) / Scalar(rows.size());
  for (Eigen::Index r : rows) dz(r, 0) += (Sigmoid(logits[r]) - labels[r]) * inv_m;

  for (std::size_t l = net.size(); l-- > 0;) {
    const Layer<Scalar>& layer = net[l];
    const bool graph = layer.type == LayerType::kGraphConv;
    const Matrix<Scalar>& in = graph ? trace.aggregated[l] : trace.inputs[l];
    grad[l].W = dz.transpose() * in;
    grad[l].b = dz.colwise().sum().transpose();
    if (l == 0) break;
    Matrix<Scalar> dh = dz * layer.W;
    if (graph) dh = adj->transpose() * dh;
    // The input to layer l is relu(pre[l-1]).
    const Matrix<Scalar>& prev = trace.pre[l - 1];
    if (net[l - 1].relu) dh = dh.cwiseProduct((prev.array() > Scalar(0)).template cast<Scalar>().matrix());
    dz = std::move(dh);
  }
  return loss;
}

template <typename Scalar>
Eigen::Index ParameterCount(const Network<Scalar>& net) {
  Eigen::Index n = 0;
  for (const auto& layer : net) n += layer.W.size() + layer.b.size();
  return n;
}

template <typename Scalar>
Vector<Scalar> Flatten(const Network<Scalar>& net) {
  Vector<Scalar> theta(ParameterCount(net));
  Eigen::Index k = 0;
  for (const auto& layer : net) {
    theta.segment(k, layer.W.size()) = layer.W.reshaped();
    k += layer.W.size();
    theta.segment(k, layer.b.size()) = layer.b;
    k += layer.b.size();
  }
  return theta;
}

template <typename Scalar>
void Unflatten(const Vector<Scalar>& theta, Network<Scalar>& net) {
  Eigen::Index k = 0;
  for (auto& layer : net) {
    layer.W.reshaped() = theta.segment(k, layer.W.size());
    k += layer.W.size();
    layer.b = theta.segment(k, layer.b.size());
    k += layer.b.size();
  }
}

// Decoupled weight decay Adam over a flattened parameter vector.
template <typename Scalar>
class AdamW {
 public:
  AdamW(Eigen::Index n, Scalar lr, Scalar weight_decay, Scalar beta1 = Scalar(0.9),
        Scalar beta2 = Scalar(0.999), Scalar eps = Scalar(1e-8))
      : lr_(lr), wd_(weight_decay), beta1_(beta1), beta2_(beta2), eps_(eps),
        m_(Vector<Scalar>::Zero(n)), v_(Vector<Scalar>::Zero(n)) {}

  void Step(Vector<Scalar>& theta, const Vector<Scalar>& g) {
    ++t_;
    m_ = beta1_ * m_ + (Scalar(1) - beta1_) * g;
    v_ = beta2_ * v_ + (Scalar(1) - beta2_) * g.cwiseAbs2();
    const Scalar c1 = Scalar(1) - std::pow(beta1_, Scalar(t_));
    const Scalar c2 = Scalar(1) - std::pow(beta2_, Scalar(t_));
    theta *= Scalar(1) - lr_ * wd_;
    theta.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
  }

 private:
  Scalar lr_, wd_, beta1_, beta2_, eps_;
  Vector<Scalar> m_, v_;
  long t_ = 0;
};

}  // namespace deskaid::nn
