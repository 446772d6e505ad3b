#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace dsakt {

/// Row-major dense matrix; rows index sequence positions, columns features.
template <class T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <class T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

/// mask(t, s) == true: query t may attend key s.
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double kLayerNormEps = 1e-5;
inline constexpr double kProbabilityClip = 1e-7;

std::string shape_string(Eigen::Index rows, Eigen::Index cols);

// -- linear -----------------------------------------------------------------

/// y = x W (+ b). `bias` is a 1 x n_out row.
template <class T>
Matrix<T> linear(const Matrix<T>& x, const Matrix<T>& weight);
template <class T>
Matrix<T> linear(const Matrix<T>& x, const Matrix<T>& weight, const Matrix<T>& bias);

/// Accumulates dW (and db when given) and returns dL/dx.
template <class T>
Matrix<T> linear_backward(const Matrix<T>& x, const Matrix<T>& weight, const Matrix<T>& dy, Matrix<T>& dweight,
                          Matrix<T>* dbias = nullptr);

// -- activations ------------------------------------------------------------

template <class T>
Matrix<T> relu(const Matrix<T>& x);
/// dy masked by x > 0, where x is the relu input.
template <class T>
Matrix<T> relu_backward(const Matrix<T>& x, const Matrix<T>& dy);

/// Stable for large |x|: never forms exp of a positive argument.
template <class T>
T sigmoid(T x);
template <class T>
Matrix<T> sigmoid(const Matrix<T>& x);

// -- masked softmax ---------------------------------------------------------

/// Row-wise softmax over allowed entries; masked entries are exactly zero.
/// Throws NumericError for a row with no allowed entry, ShapeError on mismatch.
template <class T>
Matrix<T> softmax_masked(const Matrix<T>& scores, const Mask& mask);

/// Given the softmax output p and dL/dp, returns dL/dscores. Masked entries get zero.
template <class T>
Matrix<T> softmax_masked_backward(const Matrix<T>& probs, const Matrix<T>& dprobs);

// -- layer norm -------------------------------------------------------------

template <class T>
struct LayerNormCache {
  Matrix<T> normalized;  // (x - mean) / sqrt(var + eps)
  Vector<T> inv_std;
};

/// Per-row normalization with biased variance, then gamma * xhat + beta (gamma, beta are 1 x d).
template <class T>
Matrix<T> layer_norm(const Matrix<T>& x, const Matrix<T>& gamma, const Matrix<T>& beta, T eps = T(kLayerNormEps),
                     LayerNormCache<T>* cache = nullptr);

/// Accumulates dgamma, dbeta and returns dL/dx.
template <class T>
Matrix<T> layer_norm_backward(const LayerNormCache<T>& cache, const Matrix<T>& gamma, const Matrix<T>& dy,
                              Matrix<T>& dgamma, Matrix<T>& dbeta);

// -- loss -------------------------------------------------------------------

/// Mean binary cross-entropy over positions with valid == 1. Predictions are clamped to
/// [clip, 1 - clip] first. Throws NumericError when no position is valid.
template <class T>
T bce_masked(std::span<const T> pred, std::span<const std::uint8_t> target, std::span<const std::uint8_t> valid,
             T clip = T(kProbabilityClip));

/// dL/dpred of bce_masked. Zero at invalid positions and where the clamp is active.
template <class T>
std::vector<T> bce_masked_backward(std::span<const T> pred, std::span<const std::uint8_t> target,
                                   std::span<const std::uint8_t> valid, T clip = T(kProbabilityClip));

}  // namespace dsakt
