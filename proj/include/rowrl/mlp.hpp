#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "rowrl/common.hpp"

namespace rowrl {

enum class Head { logistic, identity };

// Dense feed-forward network with rectifier hidden units. Plain value object:
// weights[l] is row-major (dims[l+1] x dims[l]).
struct Mlp {
  std::vector<int> dims;
  Head head = Head::identity;
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;

  int layer_count() const { return static_cast<int>(weights.size()); }
  int input_dim() const { return dims.front(); }
  int output_dim() const { return dims.back(); }
};

inline Mlp make_mlp(std::vector<int> dims, Head head, std::mt19937_64& rng,
                    double final_layer_scale = 1.0) {
  if (dims.size() < 2) throw DomainError("make_mlp: need at least two dims");
  Mlp net;
  net.dims = std::move(dims);
  net.head = head;
  const int layers = static_cast<int>(net.dims.size()) - 1;
  for (int l = 0; l < layers; ++l) {
    const int in = net.dims[l];
    const int out = net.dims[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    const double scale = (l == layers - 1) ? final_layer_scale : 1.0;
    std::vector<double> w(static_cast<std::size_t>(out) * in);
    for (double& x : w) x = scale * uniform(rng, -bound, bound);
    net.weights.push_back(std::move(w));
    net.biases.emplace_back(out, 0.0);
  }
  return net;
}

inline double logistic(double z) {
  const double y = 1.0 / (1.0 + std::exp(-z));
  // keep actor outputs strictly inside (0,1) even when saturated
  if (y <= 0.0) return 1e-12;
  if (y >= 1.0) return 1.0 - 1e-12;
  return y;
}

// Activations per layer, kept for the backward pass. act[0] is the input,
// act[L] the network output.
struct ForwardTrace {
  std::vector<std::vector<double>> act;
};

inline std::vector<double> forward(const Mlp& net, const std::vector<double>& x,
                                   ForwardTrace* trace = nullptr) {
  if (static_cast<int>(x.size()) != net.input_dim())
    throw DomainError("forward: input dimension mismatch");
  if (trace) {
    trace->act.clear();
    trace->act.push_back(x);
  }
  std::vector<double> cur = x;
  const int layers = net.layer_count();
  for (int l = 0; l < layers; ++l) {
    const int in = net.dims[l];
    const int out = net.dims[l + 1];
    std::vector<double> next(out);
    const double* w = net.weights[l].data();
    for (int r = 0; r < out; ++r) {
      double z = net.biases[l][r];
      const double* row = w + static_cast<std::size_t>(r) * in;
      for (int c = 0; c < in; ++c) z += row[c] * cur[c];
      if (l < layers - 1) {
        next[r] = z > 0.0 ? z : 0.0;
      } else if (net.head == Head::logistic) {
        next[r] = logistic(z);
      } else {
        next[r] = z;
      }
    }
    cur = std::move(next);
    if (trace) trace->act.push_back(cur);
  }
  return cur;
}

struct GradientSet {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
  std::vector<double> input;  // d(loss)/d(x), for the actor-through-critic chain

  void scale(double f) {
    for (auto& w : weights)
      for (double& x : w) x *= f;
    for (auto& b : biases)
      for (double& x : b) x *= f;
    for (double& x : input) x *= f;
  }

  void zero() {
    for (auto& w : weights) std::fill(w.begin(), w.end(), 0.0);
    for (auto& b : biases) std::fill(b.begin(), b.end(), 0.0);
    std::fill(input.begin(), input.end(), 0.0);
  }
};

inline GradientSet zero_gradients(const Mlp& net) {
  GradientSet g;
  for (int l = 0; l < net.layer_count(); ++l) {
    g.weights.emplace_back(net.weights[l].size(), 0.0);
    g.biases.emplace_back(net.biases[l].size(), 0.0);
  }
  g.input.assign(net.input_dim(), 0.0);
  return g;
}

// Backpropagates `upstream` (d loss / d output) through a cached forward pass,
// accumulating into `grads`. Rectifier derivative at exactly 0 is 0.
inline void backward(const Mlp& net, const ForwardTrace& trace,
                     const std::vector<double>& upstream, GradientSet& grads) {
  const int layers = net.layer_count();
  if (static_cast<int>(trace.act.size()) != layers + 1)
    throw DomainError("backward: no cached forward pass");

  std::vector<double> delta = upstream;
  for (int l = layers - 1; l >= 0; --l) {
    const int in = net.dims[l];
    const int out = net.dims[l + 1];
    const std::vector<double>& a_out = trace.act[l + 1];
    // d loss / d z for this layer
    for (int r = 0; r < out; ++r) {
      if (l == layers - 1) {
        if (net.head == Head::logistic)
          delta[r] *= a_out[r] * (1.0 - a_out[r]);
      } else {
        if (a_out[r] <= 0.0) delta[r] = 0.0;
      }
    }
    const std::vector<double>& a_in = trace.act[l];
    double* gw = grads.weights[l].data();
    for (int r = 0; r < out; ++r) {
      const double d = delta[r];
      grads.biases[l][r] += d;
      double* row = gw + static_cast<std::size_t>(r) * in;
      for (int c = 0; c < in; ++c) row[c] += d * a_in[c];
    }
    std::vector<double> prev(in, 0.0);
    const double* w = net.weights[l].data();
    for (int r = 0; r < out; ++r) {
      const double d = delta[r];
      const double* row = w + static_cast<std::size_t>(r) * in;
      for (int c = 0; c < in; ++c) prev[c] += d * row[c];
    }
    delta = std::move(prev);
  }
  for (int c = 0; c < net.input_dim(); ++c) grads.input[c] += delta[c];
}

// Huber loss and its derivative at residual zeta.
inline std::pair<double, double> huber_loss(double zeta, double delta = 1.0) {
  if (delta <= 0) throw DomainError("huber_loss: delta must be positive");
  const double abs_z = std::fabs(zeta);
  if (abs_z <= delta) return {0.5 * zeta * zeta, zeta};
  return {delta * abs_z - 0.5 * delta * delta, zeta > 0 ? delta : -delta};
}

// Adaptive-moment optimizer state, shape-matched to one Mlp.
struct OptimizerState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step = 0;
  std::vector<std::vector<double>> mw, vw, mb, vb;
};

inline OptimizerState make_optimizer(const Mlp& net, double lr) {
  OptimizerState st;
  st.lr = lr;
  for (int l = 0; l < net.layer_count(); ++l) {
    st.mw.emplace_back(net.weights[l].size(), 0.0);
    st.vw.emplace_back(net.weights[l].size(), 0.0);
    st.mb.emplace_back(net.biases[l].size(), 0.0);
    st.vb.emplace_back(net.biases[l].size(), 0.0);
  }
  return st;
}

inline void optimizer_step(Mlp& net, const GradientSet& grads,
                           OptimizerState& st) {
  if (grads.weights.size() != net.weights.size())
    throw DomainError("optimizer_step: gradient shape mismatch");
  st.step += 1;
  const double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
  const double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
  auto update = [&](std::vector<double>& p, const std::vector<double>& g,
                    std::vector<double>& m, std::vector<double>& v) {
    if (p.size() != g.size())
      throw DomainError("optimizer_step: gradient shape mismatch");
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = st.beta1 * m[i] + (1.0 - st.beta1) * g[i];
      v[i] = st.beta2 * v[i] + (1.0 - st.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= st.lr * mhat / (std::sqrt(vhat) + st.epsilon);
    }
  };
  for (int l = 0; l < net.layer_count(); ++l) {
    update(net.weights[l], grads.weights[l], st.mw[l], st.vw[l]);
    update(net.biases[l], grads.biases[l], st.mb[l], st.vb[l]);
  }
}

// Polyak update: target <- (1-eta)*target + eta*online.
inline void soft_update(Mlp& target, const Mlp& online, double eta) {
  if (target.dims != online.dims || target.head != online.head)
    throw DomainError("soft_update: architecture mismatch");
  for (int l = 0; l < target.layer_count(); ++l) {
    for (std::size_t i = 0; i < target.weights[l].size(); ++i)
      target.weights[l][i] =
          (1.0 - eta) * target.weights[l][i] + eta * online.weights[l][i];
    for (std::size_t i = 0; i < target.biases[l].size(); ++i)
      target.biases[l][i] =
          (1.0 - eta) * target.biases[l][i] + eta * online.biases[l][i];
  }
}

// Plain-text checkpoint: first line "d0,d1,...,dn head", then one line of
// row-major weights and one of biases per layer, 17 significant digits.
inline std::string save_checkpoint(const Mlp& net) {
  std::string out;
  for (std::size_t i = 0; i < net.dims.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(net.dims[i]);
  }
  out += net.head == Head::logistic ? " logistic\n" : " identity\n";
  char buf[40];
  auto append_row = [&](const std::vector<double>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof buf, i ? " %.17g" : "%.17g", row[i]);
      out += buf;
    }
    out += '\n';
  };
  for (int l = 0; l < net.layer_count(); ++l) {
    append_row(net.weights[l]);
    append_row(net.biases[l]);
  }
  return out;
}

inline Mlp load_checkpoint(const std::string& text) {
  std::istringstream in(text);
  std::string header;
  if (!std::getline(in, header)) throw DomainError("checkpoint: empty file");
  const auto space = header.find(' ');
  if (space == std::string::npos)
    throw DomainError("checkpoint: malformed header");
  Mlp net;
  {
    std::istringstream dims(header.substr(0, space));
    std::string tok;
    while (std::getline(dims, tok, ',')) net.dims.push_back(std::stoi(tok));
  }
  const std::string head = header.substr(space + 1);
  if (head == "logistic")
    net.head = Head::logistic;
  else if (head == "identity")
    net.head = Head::identity;
  else
    throw DomainError("checkpoint: unknown head '" + head + "'");
  if (net.dims.size() < 2) throw DomainError("checkpoint: malformed dims");

  auto read_row = [&](std::size_t n) {
    std::string line;
    if (!std::getline(in, line)) throw DomainError("checkpoint: truncated");
    std::istringstream ls(line);
    std::vector<double> row(n);
    for (std::size_t i = 0; i < n; ++i)
      if (!(ls >> row[i])) throw DomainError("checkpoint: truncated row");
    return row;
  };
  for (std::size_t l = 0; l + 1 < net.dims.size(); ++l) {
    const std::size_t in_dim = net.dims[l];
    const std::size_t out_dim = net.dims[l + 1];
    net.weights.push_back(read_row(in_dim * out_dim));
    net.biases.push_back(read_row(out_dim));
  }
  return net;
}

}  // namespace rowrl
