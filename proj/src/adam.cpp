#include "fzsl/adam.hpp"

#include <cmath>
#include <stdexcept>

#include "fzsl/errors.hpp"

namespace fzsl {

AdamState AdamState::init(std::span<const Matrix* const> params,
                          AdamConfig cfg) {
  AdamState s;
  s.config = cfg;
  for (const Matrix* p : params) {
    s.first_moment.emplace_back(p->rows, p->cols);
    s.second_moment.emplace_back(p->rows, p->cols);
  }
  return s;
}

void adam_step(std::span<Matrix* const> params,
               std::span<const Matrix* const> grads, AdamState& state,
               std::span<const char* const> names) {
  if (params.size() != grads.size() ||
      params.size() != state.first_moment.size())
    throw std::invalid_argument("adam_step: tensor count mismatch");
  for (size_t t = 0; t < params.size(); ++t) {
    if (!params[t]->same_shape(*grads[t]) ||
        !params[t]->same_shape(state.first_moment[t]))
      throw std::invalid_argument("adam_step: shape mismatch");
    if (!grads[t]->all_finite()) {
      std::string name = t < names.size() ? names[t] : std::to_string(t);
      throw NumericError("adam_step: non-finite gradient in tensor " + name);
    }
  }

  state.step_count += 1;
  const AdamConfig& c = state.config;
  const float bc1 =
      1.0f - std::pow(c.beta1, static_cast<float>(state.step_count));
  const float bc2 =
      1.0f - std::pow(c.beta2, static_cast<float>(state.step_count));

  for (size_t t = 0; t < params.size(); ++t) {
    Matrix& p = *params[t];
    const Matrix& g = *grads[t];
    Matrix& m = state.first_moment[t];
    Matrix& v = state.second_moment[t];
    for (size_t i = 0; i < p.data.size(); ++i) {
      m.data[i] = c.beta1 * m.data[i] + (1.0f - c.beta1) * g.data[i];
      v.data[i] =
          c.beta2 * v.data[i] + (1.0f - c.beta2) * g.data[i] * g.data[i];
      float m_hat = m.data[i] / bc1;
      float v_hat = v.data[i] / bc2;
      p.data[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
  }
}

AdamState adam_state_for(const MlpParams& p, AdamConfig cfg) {
  const Matrix* ps[] = {&p.w1, &p.b1, &p.w2, &p.b2};
  return AdamState::init(ps, cfg);
}

void adam_step(MlpParams& params, const MlpGrads& grads, AdamState& state) {
  Matrix* ps[] = {&params.w1, &params.b1, &params.w2, &params.b2};
  const Matrix* gs[] = {&grads.w1, &grads.b1, &grads.w2, &grads.b2};
  static constexpr const char* kNames[] = {"w1", "b1", "w2", "b2"};
  adam_step(ps, gs, state, kNames);
}

}  // namespace fzsl
