// Copyright 2026 The Corridor Signal Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "corridor/mlp.h"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>

namespace corridor {
namespace {

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw std::runtime_error("truncated network data");
  return v;
}

}  // namespace

Mlp::Mlp(std::vector<int> sizes, std::uint64_t seed, double output_scale) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw std::invalid_argument("network needs an input and an output size");
  for (int s : sizes_) {
    if (s <= 0) throw std::invalid_argument("layer sizes must be positive");
  }
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    offsets_.push_back(total);
    total += static_cast<std::size_t>(sizes_[l + 1]) * (sizes_[l] + 1);
  }
  params_.assign(total, 0.0);
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    const bool last = l + 2 == sizes_.size();
    const double bound = std::sqrt(6.0 / in) * (last ? output_scale : 1.0);
    std::uniform_real_distribution<double> u(-bound, bound);
    double* w = params_.data() + offsets_[l];
    for (int k = 0; k < out * in; ++k) w[k] = u(rng);
  }
}

std::vector<double> Mlp::forward(const std::vector<double>& input) const {
  Trace trace;
  return forward(input, trace);
}

std::vector<double> Mlp::forward(const std::vector<double>& input, Trace& trace) const {
  if (static_cast<int>(input.size()) != inputs()) throw std::invalid_argument("network input has the wrong size");
  trace.activations.resize(sizes_.size());
  trace.activations[0] = input;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    const double* w = params_.data() + offsets_[l];
    const double* b = w + static_cast<std::size_t>(out) * in;
    const std::vector<double>& x = trace.activations[l];
    std::vector<double>& y = trace.activations[l + 1];
    y.assign(out, 0.0);
    const bool hidden = l + 2 < sizes_.size();
    for (int o = 0; o < out; ++o) {
      double s = b[o];
      const double* row = w + static_cast<std::size_t>(o) * in;
      for (int k = 0; k < in; ++k) s += row[k] * x[k];
      y[o] = hidden && s < 0.0 ? 0.0 : s;
    }
  }
  return trace.activations.back();
}

void Mlp::backward(const Trace& trace, const std::vector<double>& d_output, std::vector<double>& grad) const {
  if (grad.size() != params_.size()) grad.assign(params_.size(), 0.0);
  std::vector<double> delta = d_output;
  for (std::size_t l = sizes_.size() - 1; l-- > 0;) {
    const int in = sizes_[l], out = sizes_[l + 1];
    const double* w = params_.data() + offsets_[l];
    double* gw = grad.data() + offsets_[l];
    double* gb = gw + static_cast<std::size_t>(out) * in;
    const std::vector<double>& x = trace.activations[l];
    if (l + 2 < sizes_.size()) {
      const std::vector<double>& y = trace.activations[l + 1];
      for (int o = 0; o < out; ++o) {
        if (y[o] <= 0.0) delta[o] = 0.0;
      }
    }
    std::vector<double> prev(in, 0.0);
    for (int o = 0; o < out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      gb[o] += d;
      const double* row = w + static_cast<std::size_t>(o) * in;
      double* grow = gw + static_cast<std::size_t>(o) * in;
      for (int k = 0; k < in; ++k) {
        grow[k] += d * x[k];
        prev[k] += d * row[k];
      }
    }
    delta = std::move(prev);
  }
}

void Mlp::write(std::ostream& out) const {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(sizes_.size()));
  for (int s : sizes_) put<std::uint32_t>(out, static_cast<std::uint32_t>(s));
  put<std::uint64_t>(out, params_.size());
  out.write(reinterpret_cast<const char*>(params_.data()), static_cast<std::streamsize>(params_.size() * sizeof(double)));
}

Mlp Mlp::read(std::istream& in) {
  const auto layers = get<std::uint32_t>(in);
  if (layers < 2 || layers > 64) throw std::runtime_error("implausible layer count in network data");
  std::vector<int> sizes;
  for (std::uint32_t l = 0; l < layers; ++l) sizes.push_back(static_cast<int>(get<std::uint32_t>(in)));
  Mlp net(sizes, 0);
  const auto count = get<std::uint64_t>(in);
  if (count != net.params_.size()) throw std::runtime_error("network data does not match its layer shapes");
  in.read(reinterpret_cast<char*>(net.params_.data()), static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw std::runtime_error("truncated network data");
  for (double v : net.params_) {
    if (!std::isfinite(v)) throw std::runtime_error("network data contains non-finite weights");
  }
  return net;
}

std::uint64_t checksum(const std::vector<double>& params) {
  std::uint64_t h = 1469598103934665603ULL;
  for (double v : params) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof(double));
    for (unsigned char c : bytes) {
      h ^= c;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

Adam::Adam(std::size_t size, double beta1, double beta2, double eps)
    : beta1_(beta1), beta2_(beta2), eps_(eps), m_(size, 0.0), v_(size, 0.0) {}

void Adam::step(std::vector<double>& params, const std::vector<double>& grad, double lr) {
  if (params.size() != m_.size() || grad.size() != m_.size()) throw std::invalid_argument("Adam size mismatch");
  if (lr == 0.0) return;
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * grad[k];
    v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * grad[k] * grad[k];
    params[k] -= lr * (m_[k] / c1) / (std::sqrt(v_[k] / c2) + eps_);
  }
}

}  // namespace corridor
