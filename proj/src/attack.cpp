#include "fzsl/attack.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fzsl/adam.hpp"
#include "fzsl/errors.hpp"
#include "fzsl/losses.hpp"

namespace fzsl {

namespace {

float sum_sq_diff(const Matrix& a, const Matrix& b) {
  float s = 0.0f;
  for (size_t i = 0; i < a.data.size(); ++i) {
    float d = a.data[i] - b.data[i];
    s += d * d;
  }
  return s;
}

float bundle_residual(const MlpGrads& a, const MlpGrads& b) {
  return sum_sq_diff(a.w1, b.w1) + sum_sq_diff(a.b1, b.b1) +
         sum_sq_diff(a.w2, b.w2) + sum_sq_diff(a.b2, b.b2);
}

int log_stride(int steps) { return std::max(1, steps / 100); }

}  // namespace

float cosine_similarity(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("cosine_similarity: length mismatch");
  double dot = 0, na = 0, nb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0 || nb == 0) return 0.0f;
  return static_cast<float>(dot / (std::sqrt(na) * std::sqrt(nb)));
}

GradientBundle capture_gradients(const MlpParams& critic,
                                 const Matrix& features, const Matrix& cond,
                                 float loss_scale) {
  if (features.rows == 0 || features.rows > kMaxAttackBatch)
    throw std::invalid_argument(
        "capture_gradients: batch must have 1.." +
        std::to_string(kMaxAttackBatch) + " rows");
  if (cond.rows != features.rows)
    throw std::invalid_argument("capture_gradients: condition rows mismatch");
  Matrix input = hcat(features, cond);
  Matrix dy(features.rows, critic.out_dim(),
            loss_scale / static_cast<float>(features.rows));
  GradientBundle b;
  b.grads = mlp_backward(critic, input, dy).grads;
  b.feature_dim = features.cols;
  b.cond_dim = cond.cols;
  b.batch = features.rows;
  return b;
}

ClassifierGradientBundle capture_classifier_gradients(
    const LinearClassifier& clf, const Matrix& features,
    std::span<const int> labels) {
  if (features.rows == 0 || features.rows > kMaxAttackBatch)
    throw std::invalid_argument(
        "capture_classifier_gradients: batch must have 1.." +
        std::to_string(kMaxAttackBatch) + " rows");
  Matrix logits = clf.logits(features);
  SoftmaxXentResult ce = softmax_cross_entropy(logits, labels);
  ClassifierGradientBundle b;
  b.w_grads = Matrix(clf.num_classes(), clf.feature_dim());
  b.b_grads = Matrix(1, clf.num_classes());
  for (int c = 0; c < clf.num_classes(); ++c) {
    for (int k = 0; k < clf.feature_dim(); ++k) {
      float s = 0.0f;
      for (int i = 0; i < features.rows; ++i)
        s += ce.logit_grads.at(i, c) * features.at(i, k);
      b.w_grads.at(c, k) = s;
    }
    float s = 0.0f;
    for (int i = 0; i < features.rows; ++i) s += ce.logit_grads.at(i, c);
    b.b_grads.at(0, c) = s;
  }
  b.batch = features.rows;
  return b;
}

// The critic has piecewise-linear activations, so with slopes s_ij frozen at
// the current dummy input the transmitted bundle is affine in the input and
// the matching residual has the closed-form gradient
//   dR/du_ik = (2/B) * sum_j s_ij * (dW2_j * w1[j,k] + dW1[j,k] * w2_j).
InversionResult dlg_invert(const GradientBundle& observed,
                           const MlpParams& critic_arch, int steps,
                           RngStream& rng) {
  critic_arch.validate();
  if (critic_arch.out_dim() != 1)
    throw std::invalid_argument("dlg_invert: critic must be scalar");
  if (observed.feature_dim + observed.cond_dim != critic_arch.in_dim())
    throw std::invalid_argument("dlg_invert: bundle width != critic input");
  if (!observed.grads.w1.same_shape(
          Matrix(critic_arch.hidden_dim(), critic_arch.in_dim())))
    throw std::invalid_argument("dlg_invert: bundle shape mismatch");

  const int batch = observed.batch;
  const int width = critic_arch.in_dim();
  const int hid = critic_arch.hidden_dim();
  const float inv_b = 1.0f / static_cast<float>(batch);

  Matrix dummy(batch, width);
  for (float& v : dummy.data) v = rng.next_normal();

  Matrix* params[] = {&dummy};
  const Matrix* views[] = {&dummy};
  AdamState opt = AdamState::init(views, AdamConfig{0.05f, 0.9f, 0.999f});

  auto current_residual = [&](const Matrix& u, MlpGrads& out_grads) {
    Matrix dy(batch, 1, inv_b);
    out_grads = mlp_backward(critic_arch, u, dy).grads;
    return bundle_residual(out_grads, observed.grads);
  };

  MlpGrads cur;
  float residual = current_residual(dummy, cur);
  if (!std::isfinite(residual))
    throw NumericError("dlg_invert: non-finite residual");

  InversionResult result;
  result.initial_residual = residual;
  float best = residual;
  Matrix best_dummy = dummy;
  result.residual_log.push_back(best);

  const int stride = log_stride(steps);
  for (int it = 0; it < steps; ++it) {
    // slopes at the current dummy
    Matrix du(batch, width);
    for (int i = 0; i < batch; ++i) {
      for (int j = 0; j < hid; ++j) {
        float z = critic_arch.b1.at(0, j);
        const float* w1j = critic_arch.w1.row(j);
        const float* ui = dummy.row(i);
        for (int k = 0; k < width; ++k) z += w1j[k] * ui[k];
        float s;
        switch (critic_arch.hidden_act) {
          case Activation::Relu:
            s = z > 0.0f ? 1.0f : 0.0f;
            break;
          case Activation::LeakyRelu:
            s = z > 0.0f ? 1.0f : critic_arch.leaky_slope;
            break;
          default:
            s = 1.0f;
            break;
        }
        if (s == 0.0f) continue;
        float dw2 = cur.w2.at(0, j) - observed.grads.w2.at(0, j);
        float w2j = critic_arch.w2.at(0, j);
        float c1 = 2.0f * inv_b * s;
        for (int k = 0; k < width; ++k) {
          float dw1 = cur.w1.at(j, k) - observed.grads.w1.at(j, k);
          du.at(i, k) += c1 * (dw2 * w1j[k] + dw1 * w2j);
        }
      }
    }
    const Matrix* gs[] = {&du};
    adam_step(params, gs, opt);
    residual = current_residual(dummy, cur);
    if (!std::isfinite(residual))
      throw NumericError("dlg_invert: non-finite residual");
    if (residual < best) {
      best = residual;
      best_dummy = dummy;
    }
    if ((it + 1) % stride == 0 || it + 1 == steps)
      result.residual_log.push_back(best);
  }

  result.final_residual = best;
  result.iterations = steps;
  result.recovered_features = slice_cols(best_dummy, 0, observed.feature_dim);
  result.recovered_condition =
      slice_cols(best_dummy, observed.feature_dim, width);
  return result;
}

InversionResult dlg_invert_classifier(const ClassifierGradientBundle& observed,
                                      const LinearClassifier& clf_arch,
                                      int steps, RngStream& rng) {
  const int batch = observed.batch;
  const int d = clf_arch.feature_dim();
  const int classes = clf_arch.num_classes();
  const float inv_b = 1.0f / static_cast<float>(batch);

  Matrix dummy_x(batch, d);
  Matrix dummy_logits(batch, classes);  // soft-label parameters
  for (float& v : dummy_x.data) v = rng.next_normal();
  for (float& v : dummy_logits.data) v = 0.1f * rng.next_normal();

  Matrix* params[] = {&dummy_x, &dummy_logits};
  const Matrix* views[] = {&dummy_x, &dummy_logits};
  AdamState opt = AdamState::init(views, AdamConfig{0.05f, 0.9f, 0.999f});

  auto softmax_rows = [](const Matrix& z) {
    Matrix p(z.rows, z.cols);
    for (int i = 0; i < z.rows; ++i) {
      float zmax = z.at(i, 0);
      for (int c = 1; c < z.cols; ++c) zmax = std::max(zmax, z.at(i, c));
      float denom = 0.0f;
      for (int c = 0; c < z.cols; ++c) denom += std::exp(z.at(i, c) - zmax);
      for (int c = 0; c < z.cols; ++c)
        p.at(i, c) = std::exp(z.at(i, c) - zmax) / denom;
    }
    return p;
  };

  Matrix dw(classes, d), db(1, classes), r(batch, classes);
  auto compute = [&](float& residual) {
    Matrix pred = softmax_rows(clf_arch.logits(dummy_x));
    Matrix q = softmax_rows(dummy_logits);
    for (int i = 0; i < batch; ++i)
      for (int c = 0; c < classes; ++c)
        r.at(i, c) = (pred.at(i, c) - q.at(i, c)) * inv_b;
    for (int c = 0; c < classes; ++c) {
      for (int k = 0; k < d; ++k) {
        float s = 0.0f;
        for (int i = 0; i < batch; ++i) s += r.at(i, c) * dummy_x.at(i, k);
        dw.at(c, k) = s - observed.w_grads.at(c, k);
      }
      float s = 0.0f;
      for (int i = 0; i < batch; ++i) s += r.at(i, c);
      db.at(0, c) = s - observed.b_grads.at(0, c);
    }
    residual = 0.0f;
    for (float v : dw.data) residual += v * v;
    for (float v : db.data) residual += v * v;
    return std::pair<Matrix, Matrix>{pred, q};
  };

  float residual = 0.0f;
  compute(residual);
  if (!std::isfinite(residual))
    throw NumericError("dlg_invert_classifier: non-finite residual");

  InversionResult result;
  result.initial_residual = residual;
  float best = residual;
  Matrix best_x = dummy_x, best_q = softmax_rows(dummy_logits);
  result.residual_log.push_back(best);

  const int stride = log_stride(steps);
  for (int it = 0; it < steps; ++it) {
    auto [pred, q] = compute(residual);
    // S_i = dR/dr_i
    Matrix s_mat(batch, classes);
    for (int i = 0; i < batch; ++i)
      for (int c = 0; c < classes; ++c) {
        float s = db.at(0, c);
        for (int k = 0; k < d; ++k) s += dw.at(c, k) * dummy_x.at(i, k);
        s_mat.at(i, c) = 2.0f * s;
      }
    Matrix gx(batch, d);
    Matrix gl(batch, classes);
    for (int i = 0; i < batch; ++i) {
      // explicit x term plus the softmax(W x + b) jacobian term
      for (int k = 0; k < d; ++k) {
        float s = 0.0f;
        for (int c = 0; c < classes; ++c) s += dw.at(c, k) * 2.0f * r.at(i, c);
        gx.at(i, k) = s;
      }
      float dot_p = 0.0f;
      for (int c = 0; c < classes; ++c)
        dot_p += pred.at(i, c) * s_mat.at(i, c);
      for (int c = 0; c < classes; ++c) {
        float jp = pred.at(i, c) * (s_mat.at(i, c) - dot_p) * inv_b;
        for (int k = 0; k < d; ++k)
          gx.at(i, k) += jp * clf_arch.weights.at(c, k);
      }
      float dot_q = 0.0f;
      for (int c = 0; c < classes; ++c) dot_q += q.at(i, c) * s_mat.at(i, c);
      for (int c = 0; c < classes; ++c)
        gl.at(i, c) = -q.at(i, c) * (s_mat.at(i, c) - dot_q) * inv_b;
    }
    const Matrix* gs[] = {&gx, &gl};
    adam_step(params, gs, opt);
    compute(residual);
    if (!std::isfinite(residual))
      throw NumericError("dlg_invert_classifier: non-finite residual");
    if (residual < best) {
      best = residual;
      best_x = dummy_x;
      best_q = softmax_rows(dummy_logits);
    }
    if ((it + 1) % stride == 0 || it + 1 == steps)
      result.residual_log.push_back(best);
  }

  result.final_residual = best;
  result.iterations = steps;
  result.recovered_features = best_x;
  result.recovered_condition = best_q;
  return result;
}

LeakageReport run_leakage_demo(const LeakageDemoSpec& spec) {
  LeakageReport report;
  report.kind = spec.kind;
  RngStream model_rng(spec.seed, "attack/model");
  RngStream data_rng(spec.seed, "attack/data");
  RngStream invert_rng(spec.seed, "attack/invert");

  if (spec.kind == TargetKind::FeatureAndAttribute) {
    MlpParams critic =
        mlp_init(spec.feature_dim + spec.cond_dim, spec.hidden_dim, 1,
                 Activation::LeakyRelu, Activation::None, model_rng);
    for (float& v : critic.b1.data) v = 0.1f * model_rng.next_normal();
    Matrix x(1, spec.feature_dim);
    for (float& v : x.data) v = data_rng.next_normal();
    Matrix a(1, spec.cond_dim);
    for (float& v : a.data) v = data_rng.next_uniform();
    GradientBundle bundle = capture_gradients(critic, x, a);
    InversionResult inv = dlg_invert(bundle, critic, spec.steps, invert_rng);
    report.feature_cosine =
        cosine_similarity(inv.recovered_features.data, x.data);
    report.condition_cosine =
        cosine_similarity(inv.recovered_condition.data, a.data);
    report.initial_residual = inv.initial_residual;
    report.final_residual = inv.final_residual;
    report.residual_log = inv.residual_log;
    report.iterations = inv.iterations;
  } else {
    LinearClassifier clf;
    clf.weights = Matrix(spec.cond_dim, spec.feature_dim);
    clf.bias = Matrix(1, spec.cond_dim);
    for (float& v : clf.weights.data) v = 0.5f * model_rng.next_normal();
    Matrix x(1, spec.feature_dim);
    for (float& v : x.data) v = data_rng.next_normal();
    std::vector<int> label{static_cast<int>(
        data_rng.next_below(static_cast<uint64_t>(spec.cond_dim)))};
    ClassifierGradientBundle bundle =
        capture_classifier_gradients(clf, x, label);
    InversionResult inv =
        dlg_invert_classifier(bundle, clf, spec.steps, invert_rng);
    report.feature_cosine =
        cosine_similarity(inv.recovered_features.data, x.data);
    std::vector<float> onehot(static_cast<size_t>(spec.cond_dim), 0.0f);
    onehot[static_cast<size_t>(label[0])] = 1.0f;
    report.condition_cosine =
        cosine_similarity(inv.recovered_condition.data, onehot);
    report.initial_residual = inv.initial_residual;
    report.final_residual = inv.final_residual;
    report.residual_log = inv.residual_log;
    report.iterations = inv.iterations;
  }
  return report;
}

}  // namespace fzsl
