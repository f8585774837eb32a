#include "fzsl/losses.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace fzsl {

SoftmaxXentResult softmax_cross_entropy(const Matrix& logits,
                                        std::span<const int> labels) {
  if (logits.rows == 0 || logits.cols == 0)
    throw std::invalid_argument("softmax_cross_entropy: empty logits");
  if (static_cast<int>(labels.size()) != logits.rows)
    throw std::invalid_argument("softmax_cross_entropy: label count mismatch");
  const int batch = logits.rows;
  const int classes = logits.cols;
  for (int lab : labels)
    if (lab < 0 || lab >= classes)
      throw std::invalid_argument("softmax_cross_entropy: label " +
                                  std::to_string(lab) + " out of range [0," +
                                  std::to_string(classes) + ")");

  SoftmaxXentResult r;
  r.logit_grads = Matrix(batch, classes);
  const float inv_batch = 1.0f / static_cast<float>(batch);
  float loss = 0.0f;
  for (int i = 0; i < batch; ++i) {
    const float* z = logits.row(i);
    float zmax = z[0];
    for (int c = 1; c < classes; ++c) zmax = std::max(zmax, z[c]);
    float denom = 0.0f;
    for (int c = 0; c < classes; ++c) denom += std::exp(z[c] - zmax);
    float log_denom = std::log(denom);
    loss += -(z[labels[i]] - zmax - log_denom) * inv_batch;
    for (int c = 0; c < classes; ++c) {
      float p = std::exp(z[c] - zmax) / denom;
      r.logit_grads.at(i, c) =
          (p - (c == labels[i] ? 1.0f : 0.0f)) * inv_batch;
    }
  }
  r.loss = loss;
  return r;
}

WassersteinResult wasserstein_losses(std::span<const float> d_real,
                                     std::span<const float> d_fake) {
  if (d_real.empty() || d_fake.empty())
    throw std::invalid_argument("wasserstein_losses: empty critic outputs");
  float mean_real = 0.0f;
  for (float v : d_real) mean_real += v;
  mean_real /= static_cast<float>(d_real.size());
  float mean_fake = 0.0f;
  for (float v : d_fake) mean_fake += v;
  mean_fake /= static_cast<float>(d_fake.size());
  return WassersteinResult{mean_fake - mean_real, -mean_fake};
}

GradientPenaltyResult gradient_penalty(const MlpParams& critic,
                                       const Matrix& x_real,
                                       const Matrix& x_fake, const Matrix& cond,
                                       RngStream& rng) {
  std::vector<float> eps(static_cast<size_t>(x_real.rows));
  for (float& e : eps) e = rng.next_uniform();
  return gradient_penalty_at(critic, x_real, x_fake, cond, eps);
}

// With a piecewise-linear hidden activation the critic's input gradient on
// row i is g_i[k] = sum_j w2[0,j] * s_ij * w1[j,k] over the feature columns
// k, where s_ij is the activation slope at z1_ij. The slopes are locally
// constant, so the penalty's parameter gradients close over w1 and w2 only:
//   d/dw2[0,j] = coef_i * s_ij * <g_i, w1[j, 0:d]>
//   d/dw1[j,k] = coef_i * w2[0,j] * s_ij * g_i[k]   (feature columns only)
// with coef_i = 2*(||g_i|| - 1)/||g_i||, averaged over the batch.
GradientPenaltyResult gradient_penalty_at(const MlpParams& critic,
                                          const Matrix& x_real,
                                          const Matrix& x_fake,
                                          const Matrix& cond,
                                          std::span<const float> eps) {
  critic.validate();
  if (critic.out_dim() != 1)
    throw std::invalid_argument("gradient_penalty: critic must be scalar");
  if (critic.output_act != Activation::None)
    throw std::invalid_argument(
        "gradient_penalty: critic output activation must be none");
  if (!x_real.same_shape(x_fake))
    throw std::invalid_argument("gradient_penalty: real/fake shape mismatch");
  if (cond.rows != x_real.rows)
    throw std::invalid_argument("gradient_penalty: condition rows mismatch");
  if (x_real.cols + cond.cols != critic.in_dim())
    throw std::invalid_argument(
        "gradient_penalty: feature+condition width != critic input");
  if (static_cast<int>(eps.size()) != x_real.rows)
    throw std::invalid_argument("gradient_penalty: eps count mismatch");

  const int batch = x_real.rows;
  const int d = x_real.cols;
  const int hid = critic.hidden_dim();
  const float inv_batch = 1.0f / static_cast<float>(batch);

  GradientPenaltyResult r;
  r.critic_grads = MlpGrads::zeros_like(critic);

  std::vector<float> u(static_cast<size_t>(critic.in_dim()));
  std::vector<float> slope(static_cast<size_t>(hid));
  std::vector<float> g(static_cast<size_t>(d));

  float penalty = 0.0f;
  for (int i = 0; i < batch; ++i) {
    const float e = eps[i];
    for (int k = 0; k < d; ++k)
      u[k] = e * x_real.at(i, k) + (1.0f - e) * x_fake.at(i, k);
    for (int k = 0; k < cond.cols; ++k) u[d + k] = cond.at(i, k);

    for (int j = 0; j < hid; ++j) {
      float z = critic.b1.at(0, j);
      const float* w1j = critic.w1.row(j);
      for (int k = 0; k < critic.in_dim(); ++k) z += w1j[k] * u[k];
      switch (critic.hidden_act) {
        case Activation::Relu:
          slope[j] = z > 0.0f ? 1.0f : 0.0f;
          break;
        case Activation::LeakyRelu:
          slope[j] = z > 0.0f ? 1.0f : critic.leaky_slope;
          break;
        case Activation::None:
          slope[j] = 1.0f;
          break;
        case Activation::Sigmoid:
          throw std::invalid_argument(
              "gradient_penalty: sigmoid hidden activation unsupported");
      }
    }

    for (int k = 0; k < d; ++k) {
      float s = 0.0f;
      for (int j = 0; j < hid; ++j)
        s += critic.w2.at(0, j) * slope[j] * critic.w1.at(j, k);
      g[k] = s;
    }

    float norm_sq = 0.0f;
    for (int k = 0; k < d; ++k) norm_sq += g[k] * g[k];
    float norm = std::sqrt(norm_sq);
    float gap = norm - 1.0f;
    penalty += gap * gap * inv_batch;

    if (norm < 1e-12f) continue;  // non-differentiable point; skip a.e.-zero term
    float coef = 2.0f * gap / norm * inv_batch;
    for (int j = 0; j < hid; ++j) {
      if (slope[j] == 0.0f) continue;
      float dot = 0.0f;
      const float* w1j = critic.w1.row(j);
      for (int k = 0; k < d; ++k) dot += g[k] * w1j[k];
      r.critic_grads.w2.at(0, j) += coef * slope[j] * dot;
      float c2 = coef * critic.w2.at(0, j) * slope[j];
      for (int k = 0; k < d; ++k) r.critic_grads.w1.at(j, k) += c2 * g[k];
    }
  }
  r.penalty = penalty;
  return r;
}

}  // namespace fzsl
