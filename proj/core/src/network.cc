/*
 * Copyright 2026 The MAFS Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "mafs/network.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mafs/errors.h"

namespace mafs {

void NetworkSpec::validate() const {
  if (input_dim == 0 || output_dim == 0) {
    throw ArgumentError("network input and output dims must be >= 1");
  }
  for (std::size_t h : hidden_dims) {
    if (h == 0) throw ArgumentError("hidden dims must be >= 1");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw ArgumentError("dropout_rate must lie in [0, 1)");
  }
  if (use_batchnorm.size() > hidden_dims.size()) {
    throw ArgumentError("more batchnorm flags than hidden layers");
  }
  if (!(batchnorm_eps > 0.0)) throw ArgumentError("batchnorm_eps must be > 0");
}

Network init_network(const NetworkSpec& spec, Rng& rng) {
  spec.validate();
  Network net;
  net.spec = spec;
  std::size_t fan_in = spec.input_dim;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const bool hidden = l < spec.hidden_dims.size();
    const std::size_t fan_out = hidden ? spec.hidden_dims[l] : spec.output_dim;
    LayerParams layer;
    layer.weight = Matrix(fan_in, fan_out);
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& w : layer.weight.values()) w = rng.uniform(-limit, limit);
    layer.bias.assign(fan_out, 0.0);
    if (hidden && spec.batchnorm_at(l)) {
      layer.batchnorm = true;
      layer.gamma.assign(fan_out, 1.0);
      layer.beta.assign(fan_out, 0.0);
      layer.running_mean.assign(fan_out, 0.0);
      layer.running_var.assign(fan_out, 1.0);
    }
    net.layers.push_back(std::move(layer));
    fan_in = fan_out;
  }
  return net;
}

namespace {

void add_bias(Matrix& z, const std::vector<double>& bias) {
  for (std::size_t r = 0; r < z.rows(); ++r) {
    auto row = z.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += bias[c];
  }
}

}  // namespace

ForwardResult forward(const Network& net, const Matrix& input, Mode mode,
                      Rng* rng) {
  const NetworkSpec& spec = net.spec;
  if (input.cols() != spec.input_dim) {
    throw DimensionError("forward: input has " + std::to_string(input.cols()) +
                         " columns, network expects " +
                         std::to_string(spec.input_dim));
  }
  if (!input.all_finite()) throw NumericError("forward: non-finite input");
  const bool train = mode == Mode::kTrain;
  const bool dropout = train && spec.dropout_rate > 0.0;
  if (dropout && rng == nullptr) {
    throw ContractError("forward: train-mode dropout needs a random stream");
  }
  const double keep = 1.0 - spec.dropout_rate;

  ForwardResult result;
  result.cache.version = net.version;
  result.cache.mode = mode;
  result.cache.layers.resize(net.layers.size());

  Matrix x = input;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const LayerParams& p = net.layers[l];
    LayerCache& lc = result.cache.layers[l];
    Matrix z = matmul(x, p.weight);
    add_bias(z, p.bias);
    lc.input = std::move(x);
    if (l + 1 == net.layers.size()) {
      x = std::move(z);
      break;
    }
    const std::size_t n = z.rows();
    const std::size_t width = z.cols();
    if (p.batchnorm) {
      lc.inv_std.resize(width);
      lc.normalized = Matrix(n, width);
      if (train) {
        lc.batch_mean.assign(width, 0.0);
        lc.batch_var.assign(width, 0.0);
        for (std::size_t r = 0; r < n; ++r) {
          for (std::size_t c = 0; c < width; ++c) lc.batch_mean[c] += z(r, c);
        }
        for (double& m : lc.batch_mean) m /= static_cast<double>(n);
        for (std::size_t r = 0; r < n; ++r) {
          for (std::size_t c = 0; c < width; ++c) {
            const double dev = z(r, c) - lc.batch_mean[c];
            lc.batch_var[c] += dev * dev;
          }
        }
        for (double& v : lc.batch_var) v /= static_cast<double>(n);
      }
      const auto& mean = train ? lc.batch_mean : p.running_mean;
      const auto& var = train ? lc.batch_var : p.running_var;
      for (std::size_t c = 0; c < width; ++c) {
        lc.inv_std[c] = 1.0 / std::sqrt(var[c] + spec.batchnorm_eps);
      }
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < width; ++c) {
          const double xhat = (z(r, c) - mean[c]) * lc.inv_std[c];
          lc.normalized(r, c) = xhat;
          z(r, c) = p.gamma[c] * xhat + p.beta[c];
        }
      }
    }
    lc.activated = z;
    for (double& v : z.values()) v = v > 0.0 ? v : 0.0;
    if (dropout) {
      lc.dropout_scale = Matrix(n, width);
      auto scale = lc.dropout_scale.values();
      auto vals = z.values();
      for (std::size_t i = 0; i < vals.size(); ++i) {
        scale[i] = rng->uniform() < keep ? 1.0 / keep : 0.0;
        vals[i] *= scale[i];
      }
    }
    x = std::move(z);
  }
  result.output = std::move(x);
  if (!result.output.all_finite()) {
    throw NumericError("forward: non-finite network output");
  }
  return result;
}

Matrix predict(const Network& net, const Matrix& input) {
  return forward(net, input, Mode::kEval).output;
}

BackwardResult backward(const Network& net, const ForwardCache& cache,
                        const Matrix& output_grad) {
  if (cache.version != net.version) {
    throw ContractError("backward: cache taken at parameter version " +
                        std::to_string(cache.version) +
                        ", network is at version " +
                        std::to_string(net.version));
  }
  if (cache.layers.size() != net.layers.size()) {
    throw ContractError("backward: cache does not belong to this network");
  }
  const std::size_t n = cache.layers.front().input.rows();
  if (output_grad.rows() != n || output_grad.cols() != net.spec.output_dim) {
    throw DimensionError("backward: output_grad shape mismatch");
  }
  const bool train = cache.mode == Mode::kTrain;

  BackwardResult result;
  result.params.resize(net.layers.size());
  Matrix grad = output_grad;
  for (std::size_t l = net.layers.size(); l-- > 0;) {
    const LayerParams& p = net.layers[l];
    const LayerCache& lc = cache.layers[l];
    LayerGrads& g = result.params[l];
    const bool last = l + 1 == net.layers.size();
    if (!last) {
      // grad currently holds dL/d(layer output after dropout).
      const std::size_t width = grad.cols();
      auto gv = grad.values();
      if (!lc.dropout_scale.empty()) {
        auto scale = lc.dropout_scale.values();
        for (std::size_t i = 0; i < gv.size(); ++i) gv[i] *= scale[i];
      }
      auto act = lc.activated.values();
      for (std::size_t i = 0; i < gv.size(); ++i) {
        if (!(act[i] > 0.0)) gv[i] = 0.0;
      }
      if (p.batchnorm) {
        g.gamma.assign(width, 0.0);
        g.beta.assign(width, 0.0);
        for (std::size_t r = 0; r < n; ++r) {
          for (std::size_t c = 0; c < width; ++c) {
            g.gamma[c] += grad(r, c) * lc.normalized(r, c);
            g.beta[c] += grad(r, c);
          }
        }
        if (train) {
          // dz = inv_std/N * (N*dxhat - sum(dxhat) - xhat*sum(dxhat*xhat))
          const double count = static_cast<double>(n);
          std::vector<double> sum_dxhat(width, 0.0);
          std::vector<double> sum_dxhat_xhat(width, 0.0);
          for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < width; ++c) {
              const double dxhat = grad(r, c) * p.gamma[c];
              sum_dxhat[c] += dxhat;
              sum_dxhat_xhat[c] += dxhat * lc.normalized(r, c);
            }
          }
          for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < width; ++c) {
              const double dxhat = grad(r, c) * p.gamma[c];
              grad(r, c) = lc.inv_std[c] / count *
                           (count * dxhat - sum_dxhat[c] -
                            lc.normalized(r, c) * sum_dxhat_xhat[c]);
            }
          }
        } else {
          for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < width; ++c) {
              grad(r, c) *= p.gamma[c] * lc.inv_std[c];
            }
          }
        }
      }
    }
    g.weight = matmul_tn(lc.input, grad);
    g.bias.assign(grad.cols(), 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < grad.cols(); ++c) g.bias[c] += grad(r, c);
    }
    grad = matmul_nt(grad, p.weight);
  }
  result.input_grad = std::move(grad);
  return result;
}

void update_running_stats(Network& net, const ForwardCache& cache) {
  if (cache.mode != Mode::kTrain || cache.layers.empty()) return;
  const std::size_t n = cache.layers.front().input.rows();
  if (n < 2) return;
  const double momentum = net.spec.batchnorm_momentum;
  const double unbias = static_cast<double>(n) / static_cast<double>(n - 1);
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    LayerParams& p = net.layers[l];
    const LayerCache& lc = cache.layers[l];
    if (!p.batchnorm || lc.batch_mean.empty()) continue;
    for (std::size_t c = 0; c < p.running_mean.size(); ++c) {
      p.running_mean[c] =
          momentum * p.running_mean[c] + (1.0 - momentum) * lc.batch_mean[c];
      p.running_var[c] = momentum * p.running_var[c] +
                         (1.0 - momentum) * lc.batch_var[c] * unbias;
    }
  }
}

StopDecision early_stop(TrainControl& control, double val_loss) {
  ++control.epochs_run;
  if (val_loss < control.best_val_loss) {
    control.best_val_loss = val_loss;
    control.epochs_since_improve = 0;
  } else {
    ++control.epochs_since_improve;
  }
  if (control.epochs_since_improve >= control.patience ||
      control.epochs_run >= control.max_epochs) {
    return StopDecision::kStop;
  }
  return StopDecision::kContinue;
}

std::vector<std::vector<std::size_t>> make_batches(std::size_t n,
                                                   std::size_t batch_size,
                                                   Rng& rng) {
  if (batch_size == 0) throw ArgumentError("batch_size must be >= 1");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

}  // namespace mafs
