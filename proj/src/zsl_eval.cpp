#include "fzsl/zsl_eval.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

namespace fzsl {

uint64_t mlp_digest(const MlpParams& p) {
  uint64_t h = fnv1a64(p.w1.data.data(), p.w1.data.size() * sizeof(float));
  h = fnv1a64(p.b1.data.data(), p.b1.data.size() * sizeof(float), h);
  h = fnv1a64(p.w2.data.data(), p.w2.data.size() * sizeof(float), h);
  h = fnv1a64(p.b2.data.data(), p.b2.data.size() * sizeof(float), h);
  return h;
}

PseudoSet synthesize_features(const MlpParams& generator, int noise_dim,
                              const Dataset& ds,
                              const EmbeddingTable* embeddings, int per_class,
                              const SkaConfig& ska, RngStream& rng) {
  if (per_class <= 0)
    throw std::invalid_argument("synthesize: per_class must be positive");
  if (noise_dim <= 0)
    throw std::invalid_argument("synthesize: noise_dim must be positive");
  if (ds.unseen_classes.empty())
    throw std::invalid_argument("synthesize: dataset has no unseen classes");
  const int m = ds.attr_dim();
  const int cond_dim = ska.enabled ? embeddings->embed_dim() + m : m;
  if (ska.enabled && embeddings == nullptr)
    throw std::invalid_argument("synthesize: ska requires embeddings");
  if (generator.in_dim() != noise_dim + cond_dim)
    throw std::invalid_argument(
        "synthesize: generator input width != noise + condition width");

  const int classes = static_cast<int>(ds.unseen_classes.size());
  PseudoSet out;
  out.features = Matrix(classes * per_class, generator.out_dim());
  out.labels.reserve(static_cast<size_t>(classes) * per_class);
  out.generator_digest = mlp_digest(generator);
  out.ska = ska.enabled;
  out.gamma = ska.enabled ? ska.gamma : 0.0f;
  out.per_class = per_class;
  out.seed = rng.seed();
  out.rng_label = rng.label();

  int row = 0;
  for (int c : ds.unseen_classes) {
    const float* attr = ds.attributes.row(c);
    std::vector<float> attr_vec(attr, attr + m);
    const std::vector<float>* emb = nullptr;
    if (ska.enabled) {
      emb = embeddings->find(ds.class_names[static_cast<size_t>(c)]);
      if (!emb)
        throw std::invalid_argument(
            "synthesize: missing embedding for unseen class '" +
            ds.class_names[static_cast<size_t>(c)] + "'");
    }

    Matrix gen_in(per_class, noise_dim + cond_dim);
    std::vector<float> shared_cond;
    if (ska.enabled && !ska.resample_per_draw)
      shared_cond = augment_attribute(*emb, attr_vec, ska, rng);
    for (int s = 0; s < per_class; ++s) {
      std::vector<float> cond;
      if (!ska.enabled) {
        cond = attr_vec;
      } else if (ska.resample_per_draw) {
        cond = augment_attribute(*emb, attr_vec, ska, rng);
      } else {
        cond = shared_cond;
      }
      float* dst = gen_in.row(s);
      for (int k = 0; k < noise_dim; ++k) dst[k] = rng.next_normal();
      std::copy(cond.begin(), cond.end(), dst + noise_dim);
    }
    Matrix fake = mlp_forward(generator, gen_in);
    for (int s = 0; s < per_class; ++s, ++row) {
      std::copy(fake.row(s), fake.row(s) + fake.cols, out.features.row(row));
      out.labels.push_back(c);
    }
  }
  return out;
}

LinearClassifier train_softmax_classifier(const PseudoSet& pseudo,
                                          const std::vector<int>& class_set,
                                          int epochs, float learning_rate) {
  if (pseudo.features.rows == 0)
    throw std::invalid_argument("train_softmax_classifier: empty pseudo set");
  std::unordered_map<int, int> index;
  for (size_t i = 0; i < class_set.size(); ++i)
    index[class_set[i]] = static_cast<int>(i);
  std::vector<int> mapped(pseudo.labels.size());
  for (size_t i = 0; i < pseudo.labels.size(); ++i) {
    auto it = index.find(pseudo.labels[i]);
    if (it == index.end())
      throw std::invalid_argument(
          "train_softmax_classifier: pseudo label outside the class set");
    mapped[i] = it->second;
  }
  return train_linear_classifier(pseudo.features, mapped,
                                 static_cast<int>(class_set.size()), epochs,
                                 learning_rate);
}

double per_class_top1_from_predictions(std::span<const int> predicted,
                                       std::span<const int> labels,
                                       std::span<const int> class_set) {
  if (predicted.size() != labels.size())
    throw std::invalid_argument("per_class_top1: prediction count mismatch");
  std::unordered_map<int, std::pair<int64_t, int64_t>> per_class;  // hit, total
  for (int c : class_set) per_class[c] = {0, 0};
  for (size_t i = 0; i < labels.size(); ++i) {
    auto it = per_class.find(labels[i]);
    if (it == per_class.end())
      throw std::invalid_argument("per_class_top1: test label " +
                                  std::to_string(labels[i]) +
                                  " outside the class set");
    it->second.second += 1;
    if (predicted[i] == labels[i]) it->second.first += 1;
  }
  double sum = 0.0;
  for (int c : class_set) {
    auto [hit, total] = per_class[c];
    if (total == 0)
      throw std::invalid_argument("per_class_top1: class " +
                                  std::to_string(c) + " has no test rows");
    sum += static_cast<double>(hit) / static_cast<double>(total);
  }
  return sum / static_cast<double>(class_set.size());
}

double per_class_top1(const LinearClassifier& clf, const Matrix& features,
                      std::span<const int> labels,
                      std::span<const int> class_set) {
  std::vector<int> idx = clf.predict(features);
  std::vector<int> predicted(idx.size());
  for (size_t i = 0; i < idx.size(); ++i)
    predicted[i] = class_set[static_cast<size_t>(idx[i])];
  return per_class_top1_from_predictions(predicted, labels, class_set);
}

EvalReport evaluate_unseen(const MlpParams& generator, const Dataset& ds,
                           const EmbeddingTable* embeddings,
                           const EvalConfig& config, RngStream& rng) {
  std::vector<int> test_rows = ds.unseen_rows();
  if (test_rows.empty())
    throw std::invalid_argument("evaluate_unseen: dataset has no unseen rows");

  const int m = ds.attr_dim();
  const int cond_dim =
      config.ska.enabled ? embeddings->embed_dim() + m : m;
  const int noise_dim = generator.in_dim() - cond_dim;

  PseudoSet pseudo = synthesize_features(generator, noise_dim, ds, embeddings,
                                         config.per_class, config.ska, rng);
  LinearClassifier clf = train_softmax_classifier(
      pseudo, ds.unseen_classes, config.epochs, config.learning_rate);

  Matrix x(static_cast<int>(test_rows.size()), ds.feature_dim());
  std::vector<int> y(test_rows.size());
  for (size_t i = 0; i < test_rows.size(); ++i) {
    const float* src = ds.features.row(test_rows[i]);
    std::copy(src, src + ds.feature_dim(), x.row(static_cast<int>(i)));
    y[i] = ds.labels[static_cast<size_t>(test_rows[i])];
  }

  std::vector<int> idx = clf.predict(x);
  std::vector<int> predicted(idx.size());
  for (size_t i = 0; i < idx.size(); ++i)
    predicted[i] = ds.unseen_classes[static_cast<size_t>(idx[i])];

  EvalReport report;
  report.generator_digest = pseudo.generator_digest;
  report.synthesized_per_class = config.per_class;
  report.top1 =
      per_class_top1_from_predictions(predicted, y, ds.unseen_classes);
  report.per_class.resize(ds.unseen_classes.size(), 0.0);
  for (size_t ci = 0; ci < ds.unseen_classes.size(); ++ci) {
    int cls = ds.unseen_classes[ci];
    int64_t hit = 0, total = 0;
    for (size_t i = 0; i < y.size(); ++i) {
      if (y[i] != cls) continue;
      ++total;
      if (predicted[i] == cls) ++hit;
    }
    report.per_class[ci] =
        total ? static_cast<double>(hit) / static_cast<double>(total) : 0.0;
  }
  return report;
}

}  // namespace fzsl
