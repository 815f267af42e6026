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

// Fully connected network with ReLU hidden layers and a linear output.
// Parameters live in one flat vector, layer by layer, each layer stored as
// a row-major weight matrix (outputs x inputs) followed by its bias.

#ifndef CORRIDOR_MLP_H_
#define CORRIDOR_MLP_H_

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace corridor {

class Mlp {
 public:
  Mlp() = default;
  // sizes = {inputs, hidden..., outputs}. Weights are drawn uniformly in
  // +-sqrt(6 / fan_in) * scale; the last layer uses output_scale instead.
  Mlp(std::vector<int> sizes, std::uint64_t seed, double output_scale = 0.01);

  // Activations of every layer for one input, kept for backprop.
  struct Trace {
    std::vector<std::vector<double>> activations;  // [0] is the input
  };

  std::vector<double> forward(const std::vector<double>& input) const;
  std::vector<double> forward(const std::vector<double>& input, Trace& trace) const;
  // Adds d(loss)/d(params) to grad given d(loss)/d(output).
  void backward(const Trace& trace, const std::vector<double>& d_output, std::vector<double>& grad) const;

  const std::vector<int>& sizes() const { return sizes_; }
  int inputs() const { return sizes_.empty() ? 0 : sizes_.front(); }
  int outputs() const { return sizes_.empty() ? 0 : sizes_.back(); }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  std::size_t num_params() const { return params_.size(); }

  void write(std::ostream& out) const;
  static Mlp read(std::istream& in);

 private:
  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }

  std::vector<int> sizes_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

// FNV-1a over the raw parameter bytes.
std::uint64_t checksum(const std::vector<double>& params);

// Adam on a flat parameter vector; minimizes.
class Adam {
 public:
  explicit Adam(std::size_t size, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void step(std::vector<double>& params, const std::vector<double>& grad, double lr);

 private:
  double beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
  std::vector<double> m_, v_;
};

}  // namespace corridor

#endif  // CORRIDOR_MLP_H_
