#include "fzsl/mlp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fzsl {

namespace {

inline float activate(Activation a, float z, float slope) {
  switch (a) {
    case Activation::None:
      return z;
    case Activation::Relu:
      return z > 0.0f ? z : 0.0f;
    case Activation::LeakyRelu:
      return z > 0.0f ? z : slope * z;
    case Activation::Sigmoid:
      return 1.0f / (1.0f + std::exp(-z));
  }
  return z;
}

inline float activate_grad(Activation a, float z, float slope) {
  switch (a) {
    case Activation::None:
      return 1.0f;
    case Activation::Relu:
      return z > 0.0f ? 1.0f : 0.0f;
    case Activation::LeakyRelu:
      return z > 0.0f ? 1.0f : slope;
    case Activation::Sigmoid: {
      float s = 1.0f / (1.0f + std::exp(-z));
      return s * (1.0f - s);
    }
  }
  return 1.0f;
}

// z = x * w^T + b, row-wise.
Matrix affine(const Matrix& x, const Matrix& w, const Matrix& b) {
  Matrix z(x.rows, w.rows);
  for (int i = 0; i < x.rows; ++i) {
    const float* xi = x.row(i);
    for (int j = 0; j < w.rows; ++j) {
      float s = b.at(0, j);
      const float* wj = w.row(j);
      for (int k = 0; k < w.cols; ++k) s += wj[k] * xi[k];
      z.at(i, j) = s;
    }
  }
  return z;
}

}  // namespace

int64_t MlpParams::param_count() const {
  return static_cast<int64_t>(w1.size()) + b1.size() + w2.size() + b2.size();
}

void MlpParams::validate() const {
  if (w1.rows <= 0 || w1.cols <= 0 || w2.rows <= 0 || w2.cols <= 0)
    throw std::invalid_argument("mlp: dimensions must be positive");
  if (b1.rows != 1 || b1.cols != w1.rows)
    throw std::invalid_argument("mlp: layer1 bias shape mismatch");
  if (w2.cols != w1.rows)
    throw std::invalid_argument("mlp: layer2 input width != hidden width");
  if (b2.rows != 1 || b2.cols != w2.rows)
    throw std::invalid_argument("mlp: layer2 bias shape mismatch");
  if (!w1.all_finite() || !b1.all_finite() || !w2.all_finite() ||
      !b2.all_finite())
    throw std::invalid_argument("mlp: parameters contain non-finite values");
}

MlpGrads MlpGrads::zeros_like(const MlpParams& p) {
  return MlpGrads{Matrix(p.w1.rows, p.w1.cols), Matrix(p.b1.rows, p.b1.cols),
                  Matrix(p.w2.rows, p.w2.cols), Matrix(p.b2.rows, p.b2.cols)};
}

void MlpGrads::add_scaled(const MlpGrads& o, float scale) {
  auto add = [scale](Matrix& a, const Matrix& b) {
    for (size_t i = 0; i < a.data.size(); ++i) a.data[i] += scale * b.data[i];
  };
  add(w1, o.w1);
  add(b1, o.b1);
  add(w2, o.w2);
  add(b2, o.b2);
}

bool MlpGrads::all_finite() const {
  return w1.all_finite() && b1.all_finite() && w2.all_finite() &&
         b2.all_finite();
}

MlpParams mlp_init(int in, int hidden, int out, Activation hidden_act,
                   Activation output_act, RngStream& rng, float leaky_slope) {
  if (in <= 0 || hidden <= 0 || out <= 0)
    throw std::invalid_argument("mlp_init: dimensions must be positive");
  MlpParams p;
  p.w1 = Matrix(hidden, in);
  p.b1 = Matrix(1, hidden);
  p.w2 = Matrix(out, hidden);
  p.b2 = Matrix(1, out);
  p.hidden_act = hidden_act;
  p.output_act = output_act;
  p.leaky_slope = leaky_slope;
  float s1 = 1.0f / std::sqrt(static_cast<float>(in));
  for (float& v : p.w1.data) v = s1 * rng.next_normal();
  float s2 = 1.0f / std::sqrt(static_cast<float>(hidden));
  for (float& v : p.w2.data) v = s2 * rng.next_normal();
  return p;
}

Matrix mlp_forward(const MlpParams& p, const Matrix& input) {
  p.validate();
  if (input.cols != p.in_dim())
    throw std::invalid_argument("mlp_forward: input width " +
                                std::to_string(input.cols) + " != " +
                                std::to_string(p.in_dim()));
  if (!input.all_finite())
    throw std::invalid_argument("mlp_forward: non-finite input");
  Matrix z1 = affine(input, p.w1, p.b1);
  for (float& v : z1.data) v = activate(p.hidden_act, v, p.leaky_slope);
  Matrix z2 = affine(z1, p.w2, p.b2);
  for (float& v : z2.data) v = activate(p.output_act, v, p.leaky_slope);
  return z2;
}

MlpBackwardResult mlp_backward(const MlpParams& p, const Matrix& input,
                               const Matrix& output_grad) {
  p.validate();
  if (input.cols != p.in_dim())
    throw std::invalid_argument("mlp_backward: input width mismatch");
  if (output_grad.rows != input.rows || output_grad.cols != p.out_dim())
    throw std::invalid_argument("mlp_backward: output_grad shape mismatch");

  const int batch = input.rows;
  const int hid = p.hidden_dim();
  const int out = p.out_dim();
  const int in = p.in_dim();

  Matrix z1 = affine(input, p.w1, p.b1);
  Matrix h(batch, hid);
  for (int i = 0; i < batch; ++i)
    for (int j = 0; j < hid; ++j)
      h.at(i, j) = activate(p.hidden_act, z1.at(i, j), p.leaky_slope);
  Matrix z2 = affine(h, p.w2, p.b2);

  MlpBackwardResult r;
  r.grads = MlpGrads::zeros_like(p);
  r.input_grad = Matrix(batch, in);

  Matrix dz2(batch, out);
  for (int i = 0; i < batch; ++i)
    for (int j = 0; j < out; ++j)
      dz2.at(i, j) = output_grad.at(i, j) *
                     activate_grad(p.output_act, z2.at(i, j), p.leaky_slope);

  for (int j = 0; j < out; ++j) {
    for (int k = 0; k < hid; ++k) {
      float s = 0.0f;
      for (int i = 0; i < batch; ++i) s += dz2.at(i, j) * h.at(i, k);
      r.grads.w2.at(j, k) = s;
    }
    float s = 0.0f;
    for (int i = 0; i < batch; ++i) s += dz2.at(i, j);
    r.grads.b2.at(0, j) = s;
  }

  Matrix dz1(batch, hid);
  for (int i = 0; i < batch; ++i) {
    for (int k = 0; k < hid; ++k) {
      float s = 0.0f;
      for (int j = 0; j < out; ++j) s += dz2.at(i, j) * p.w2.at(j, k);
      dz1.at(i, k) =
          s * activate_grad(p.hidden_act, z1.at(i, k), p.leaky_slope);
    }
  }

  for (int k = 0; k < hid; ++k) {
    for (int c = 0; c < in; ++c) {
      float s = 0.0f;
      for (int i = 0; i < batch; ++i) s += dz1.at(i, k) * input.at(i, c);
      r.grads.w1.at(k, c) = s;
    }
    float s = 0.0f;
    for (int i = 0; i < batch; ++i) s += dz1.at(i, k);
    r.grads.b1.at(0, k) = s;
  }

  for (int i = 0; i < batch; ++i)
    for (int c = 0; c < in; ++c) {
      float s = 0.0f;
      for (int k = 0; k < hid; ++k) s += dz1.at(i, k) * p.w1.at(k, c);
      r.input_grad.at(i, c) = s;
    }

  return r;
}

}  // namespace fzsl
