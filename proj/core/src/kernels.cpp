#include "dsakt/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dsakt/error.hpp"

namespace dsakt {

std::string shape_string(Eigen::Index rows, Eigen::Index cols) {
  return "[" + std::to_string(rows) + ", " + std::to_string(cols) + "]";
}

namespace {

template <class T>
void check_inner(const Matrix<T>& x, const Matrix<T>& w) {
  if (x.cols() != w.rows())
    throw ShapeError("linear: input " + shape_string(x.rows(), x.cols()) + " does not match weight " +
                     shape_string(w.rows(), w.cols()));
}

}  // namespace

template <class T>
Matrix<T> linear(const Matrix<T>& x, const Matrix<T>& weight) {
  check_inner(x, weight);
  return x * weight;
}

template <class T>
Matrix<T> linear(const Matrix<T>& x, const Matrix<T>& weight, const Matrix<T>& bias) {
  check_inner(x, weight);
  if (bias.rows() != 1 || bias.cols() != weight.cols())
    throw ShapeError("linear: bias " + shape_string(bias.rows(), bias.cols()) + " does not match weight " +
                     shape_string(weight.rows(), weight.cols()));
  Matrix<T> y = x * weight;
  y.rowwise() += bias.row(0);
  return y;
}

template <class T>
Matrix<T> linear_backward(const Matrix<T>& x, const Matrix<T>& weight, const Matrix<T>& dy, Matrix<T>& dweight,
                          Matrix<T>* dbias) {
  dweight.noalias() += x.transpose() * dy;
  if (dbias) *dbias += dy.colwise().sum();
  return dy * weight.transpose();
}

template <class T>
Matrix<T> relu(const Matrix<T>& x) {
  return x.cwiseMax(T(0));
}

template <class T>
Matrix<T> relu_backward(const Matrix<T>& x, const Matrix<T>& dy) {
  return (x.array() > T(0)).select(dy, Matrix<T>::Zero(dy.rows(), dy.cols()));
}

template <class T>
T sigmoid(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T z = std::exp(x);
  return z / (T(1) + z);
}

template <class T>
Matrix<T> sigmoid(const Matrix<T>& x) {
  return x.unaryExpr([](T v) { return sigmoid(v); });
}

template <class T>
Matrix<T> softmax_masked(const Matrix<T>& scores, const Mask& mask) {
  if (scores.rows() != mask.rows() || scores.cols() != mask.cols())
    throw ShapeError("softmax_masked: scores " + shape_string(scores.rows(), scores.cols()) + " vs mask " +
                     shape_string(mask.rows(), mask.cols()));
  Matrix<T> out = Matrix<T>::Zero(scores.rows(), scores.cols());
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    T peak = -std::numeric_limits<T>::infinity();
    for (Eigen::Index c = 0; c < scores.cols(); ++c)
      if (mask(r, c)) peak = std::max(peak, scores(r, c));
    if (peak == -std::numeric_limits<T>::infinity())
      throw NumericError("softmax_masked: row " + std::to_string(r) + " has no allowed entry");
    T total = 0;
    for (Eigen::Index c = 0; c < scores.cols(); ++c) {
      if (!mask(r, c)) continue;
      out(r, c) = std::exp(scores(r, c) - peak);
      total += out(r, c);
    }
    out.row(r) /= total;
  }
  return out;
}

template <class T>
Matrix<T> softmax_masked_backward(const Matrix<T>& probs, const Matrix<T>& dprobs) {
  // dS = P * (dP - rowsum(P * dP)); masked entries have P == 0.
  Vector<T> inner = (probs.array() * dprobs.array()).rowwise().sum();
  Matrix<T> ds = probs.array() * (dprobs.colwise() - inner).array();
  return ds;
}

template <class T>
Matrix<T> layer_norm(const Matrix<T>& x, const Matrix<T>& gamma, const Matrix<T>& beta, T eps,
                     LayerNormCache<T>* cache) {
  if (gamma.cols() != x.cols() || beta.cols() != x.cols() || gamma.rows() != 1 || beta.rows() != 1)
    throw ShapeError("layer_norm: input " + shape_string(x.rows(), x.cols()) + " vs gamma " +
                     shape_string(gamma.rows(), gamma.cols()) + " / beta " + shape_string(beta.rows(), beta.cols()));
  const auto d = static_cast<T>(x.cols());
  Vector<T> mean = x.rowwise().sum() / d;
  Matrix<T> centered = x.colwise() - mean;
  Vector<T> var = centered.array().square().rowwise().sum() / d;
  Vector<T> inv_std = (var.array() + eps).rsqrt();
  Matrix<T> normalized = centered.array().colwise() * inv_std.array();
  Matrix<T> y = normalized.array().rowwise() * gamma.row(0).array();
  y.rowwise() += beta.row(0);
  if (cache) {
    cache->normalized = std::move(normalized);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

template <class T>
Matrix<T> layer_norm_backward(const LayerNormCache<T>& cache, const Matrix<T>& gamma, const Matrix<T>& dy,
                              Matrix<T>& dgamma, Matrix<T>& dbeta) {
  const auto& xhat = cache.normalized;
  dgamma += (dy.array() * xhat.array()).colwise().sum().matrix();
  dbeta += dy.colwise().sum();
  Matrix<T> dxhat = dy.array().rowwise() * gamma.row(0).array();
  const auto d = static_cast<T>(dy.cols());
  Vector<T> mean_dxhat = dxhat.rowwise().sum() / d;
  Vector<T> mean_dxhat_xhat = (dxhat.array() * xhat.array()).rowwise().sum() / d;
  Matrix<T> dx = dxhat.colwise() - mean_dxhat;
  dx -= (xhat.array().colwise() * mean_dxhat_xhat.array()).matrix();
  dx = dx.array().colwise() * cache.inv_std.array();
  return dx;
}

namespace {

template <class T>
std::size_t check_loss_inputs(std::span<const T> pred, std::span<const std::uint8_t> target,
                              std::span<const std::uint8_t> valid) {
  if (pred.size() != target.size() || pred.size() != valid.size())
    throw ShapeError("bce_masked: pred/target/valid lengths " + std::to_string(pred.size()) + "/" +
                     std::to_string(target.size()) + "/" + std::to_string(valid.size()));
  std::size_t n = 0;
  for (auto v : valid) n += v != 0;
  if (n == 0) throw NumericError("bce_masked: no valid position");
  return n;
}

}  // namespace

template <class T>
T bce_masked(std::span<const T> pred, std::span<const std::uint8_t> target, std::span<const std::uint8_t> valid,
             T clip) {
  const std::size_t n = check_loss_inputs(pred, target, valid);
  T total = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!valid[i]) continue;
    const T p = std::clamp(pred[i], clip, T(1) - clip);
    total -= target[i] ? std::log(p) : std::log(T(1) - p);
  }
  return total / static_cast<T>(n);
}

template <class T>
std::vector<T> bce_masked_backward(std::span<const T> pred, std::span<const std::uint8_t> target,
                                   std::span<const std::uint8_t> valid, T clip) {
  const std::size_t n = check_loss_inputs(pred, target, valid);
  std::vector<T> grad(pred.size(), T(0));
  const T scale = T(1) / static_cast<T>(n);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!valid[i]) continue;
    const T p = pred[i];
    if (p < clip || p > T(1) - clip) continue;
    grad[i] = target[i] ? -scale / p : scale / (T(1) - p);
  }
  return grad;
}

#define DSAKT_INSTANTIATE_KERNELS(T)                                                                              \
  template Matrix<T> linear<T>(const Matrix<T>&, const Matrix<T>&);                                              \
  template Matrix<T> linear<T>(const Matrix<T>&, const Matrix<T>&, const Matrix<T>&);                            \
  template Matrix<T> linear_backward<T>(const Matrix<T>&, const Matrix<T>&, const Matrix<T>&, Matrix<T>&,        \
                                        Matrix<T>*);                                                             \
  template Matrix<T> relu<T>(const Matrix<T>&);                                                                  \
  template Matrix<T> relu_backward<T>(const Matrix<T>&, const Matrix<T>&);                                       \
  template T sigmoid<T>(T);                                                                                      \
  template Matrix<T> sigmoid<T>(const Matrix<T>&);                                                               \
  template Matrix<T> softmax_masked<T>(const Matrix<T>&, const Mask&);                                           \
  template Matrix<T> softmax_masked_backward<T>(const Matrix<T>&, const Matrix<T>&);                             \
  template Matrix<T> layer_norm<T>(const Matrix<T>&, const Matrix<T>&, const Matrix<T>&, T, LayerNormCache<T>*); \
  template Matrix<T> layer_norm_backward<T>(const LayerNormCache<T>&, const Matrix<T>&, const Matrix<T>&,        \
                                            Matrix<T>&, Matrix<T>&);                                             \
  template T bce_masked<T>(std::span<const T>, std::span<const std::uint8_t>, std::span<const std::uint8_t>, T); \
  template std::vector<T> bce_masked_backward<T>(std::span<const T>, std::span<const std::uint8_t>,              \
                                                 std::span<const std::uint8_t>, T);

DSAKT_INSTANTIATE_KERNELS(float)
DSAKT_INSTANTIATE_KERNELS(double)

#undef DSAKT_INSTANTIATE_KERNELS

}  // namespace dsakt
