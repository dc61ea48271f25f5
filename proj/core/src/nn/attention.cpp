#include "rumor/nn/attention.hpp"

#include <cmath>

#include "rumor/error.hpp"
#include "rumor/nn/layers.hpp"

namespace rumor::nn {
namespace {

// x (n x in) times W (in x out).
Matrix matmul(const Matrix& x, const Parameter& w) {
  Matrix y(x.rows(), w.cols);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t k = 0; k < w.rows; ++k) {
      const double xv = x(r, k);
      const double* wk = w.value.data() + k * w.cols;
      for (std::size_t c = 0; c < w.cols; ++c) y(r, c) += xv * wk[c];
    }
  }
  return y;
}

// dW += x^T dy, dx += dy W^T.
void matmul_backward(const Matrix& x, Parameter& w, const Matrix& dy, Matrix& dx) {
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t k = 0; k < w.rows; ++k) {
      const double xv = x(r, k);
      double* gk = w.grad.data() + k * w.cols;
      const double* wk = w.value.data() + k * w.cols;
      double acc = 0.0;
      for (std::size_t c = 0; c < w.cols; ++c) {
        gk[c] += xv * dy(r, c);
        acc += dy(r, c) * wk[c];
      }
      dx(r, k) += acc;
    }
  }
}

}  // namespace

AttentionParams add_attention(ParameterSet& params, const std::string& prefix, std::size_t d_in,
                              std::size_t d_model, std::size_t heads) {
  if (heads < 1 || d_model % heads != 0) {
    throw ConfigError("attention heads (" + std::to_string(heads) + ") must divide d_model (" +
                      std::to_string(d_model) + ")");
  }
  AttentionParams ids;
  ids.heads = heads;
  ids.query = params.add(prefix + ".query", d_in, d_model);
  ids.key = params.add(prefix + ".key", d_in, d_model);
  ids.value = params.add(prefix + ".value", d_in, d_model);
  ids.out_weight = params.add(prefix + ".out.weight", d_model, d_model);
  ids.out_bias = params.add(prefix + ".out.bias", d_model, 1);
  return ids;
}

Matrix multi_head_attention(const ParameterSet& params, const AttentionParams& ids, const Matrix& x,
                            AttentionCache* cache) {
  const Parameter& wq = params[ids.query];
  const Parameter& wo = params[ids.out_weight];
  const Parameter& bo = params[ids.out_bias];
  const std::size_t n = x.rows();
  const std::size_t d_model = wq.cols;
  const std::size_t d_k = d_model / ids.heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d_k));

  Matrix q = matmul(x, wq);
  Matrix k = matmul(x, params[ids.key]);
  Matrix v = matmul(x, params[ids.value]);

  Matrix concat(n, d_model);
  std::vector<Matrix> weights;
  weights.reserve(ids.heads);
  Vector scores(n);
  for (std::size_t h = 0; h < ids.heads; ++h) {
    const std::size_t off = h * d_k;
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double dot = 0.0;
        for (std::size_t c = 0; c < d_k; ++c) dot += q(i, off + c) * k(j, off + c);
        scores[j] = dot * scale;
      }
      const Vector p = softmax(scores);
      for (std::size_t j = 0; j < n; ++j) a(i, j) = p[j];
      for (std::size_t c = 0; c < d_k; ++c) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += p[j] * v(j, off + c);
        concat(i, off + c) = acc;
      }
    }
    weights.push_back(std::move(a));
  }

  Matrix out(n, d_model);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < d_model; ++c) {
      double acc = 0.0;
      for (std::size_t m = 0; m < d_model; ++m) acc += concat(i, m) * wo.at(m, c);
      out(i, c) = acc + bo.value[c];
    }
  }

  if (cache) {
    cache->input = x;
    cache->query = std::move(q);
    cache->key = std::move(k);
    cache->value = std::move(v);
    cache->concat = std::move(concat);
    cache->weights = std::move(weights);
  }
  return out;
}

Matrix multi_head_attention_backward(ParameterSet& params, const AttentionParams& ids,
                                     const AttentionCache& cache, const Matrix& d_out) {
  Parameter& wo = params[ids.out_weight];
  Parameter& bo = params[ids.out_bias];
  const std::size_t n = cache.input.rows();
  const std::size_t d_model = wo.rows;
  const std::size_t d_k = d_model / ids.heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d_k));

  // Output projection.
  Matrix d_concat(n, d_model);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < d_model; ++c) {
      const double g = d_out(i, c);
      bo.grad[c] += g;
      for (std::size_t m = 0; m < d_model; ++m) {
        wo.grad[m * d_model + c] += cache.concat(i, m) * g;
        d_concat(i, m) += g * wo.at(m, c);
      }
    }
  }

  Matrix dq(n, d_model), dk(n, d_model), dv(n, d_model);
  Vector da(n), ds(n);
  for (std::size_t h = 0; h < ids.heads; ++h) {
    const std::size_t off = h * d_k;
    const Matrix& a = cache.weights[h];
    for (std::size_t i = 0; i < n; ++i) {
      // d(weights row i) and dV.
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t c = 0; c < d_k; ++c) {
          acc += d_concat(i, off + c) * cache.value(j, off + c);
          dv(j, off + c) += a(i, j) * d_concat(i, off + c);
        }
        da[j] = acc;
      }
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += a(i, j) * da[j];
      for (std::size_t j = 0; j < n; ++j) ds[j] = a(i, j) * (da[j] - dot) * scale;
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t c = 0; c < d_k; ++c) {
          dq(i, off + c) += ds[j] * cache.key(j, off + c);
          dk(j, off + c) += ds[j] * cache.query(i, off + c);
        }
      }
    }
  }

  Matrix dx(n, cache.input.cols());
  matmul_backward(cache.input, params[ids.query], dq, dx);
  matmul_backward(cache.input, params[ids.key], dk, dx);
  matmul_backward(cache.input, params[ids.value], dv, dx);
  return dx;
}

}  // namespace rumor::nn
