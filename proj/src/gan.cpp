#include "fzsl/gan.hpp"

#include <stdexcept>

namespace fzsl {

void GanModel::validate(int feature_dim, int attr_dim, int cond_dim) const {
  generator.validate();
  discriminator.validate();
  if (noise_dim <= 0)
    throw std::invalid_argument("gan: noise_dim must be positive");
  if (generator.in_dim() != noise_dim + cond_dim)
    throw std::invalid_argument("gan: generator input width != noise + cond");
  if (generator.out_dim() != feature_dim)
    throw std::invalid_argument("gan: generator output width != feature dim");
  if (discriminator.in_dim() != feature_dim + attr_dim)
    throw std::invalid_argument(
        "gan: discriminator input width != feature + attribute");
  if (discriminator.out_dim() != 1)
    throw std::invalid_argument("gan: discriminator must output one score");
}

GanModel gan_init(int feature_dim, int attr_dim, int cond_dim, int noise_dim,
                  int hidden_dim, RngStream& generator_rng,
                  RngStream& discriminator_rng) {
  GanModel m;
  m.noise_dim = noise_dim;
  m.generator = mlp_init(noise_dim + cond_dim, hidden_dim, feature_dim,
                         Activation::LeakyRelu, Activation::Relu,
                         generator_rng);
  m.discriminator =
      mlp_init(feature_dim + attr_dim, hidden_dim, 1, Activation::LeakyRelu,
               Activation::None, discriminator_rng);
  m.validate(feature_dim, attr_dim, cond_dim);
  return m;
}

}  // namespace fzsl
