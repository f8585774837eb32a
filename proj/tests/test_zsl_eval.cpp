#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "fzsl/zsl_eval.hpp"

using namespace fzsl;

namespace {

Dataset fixture(uint64_t seed, int seen = 4, int unseen = 5,
                int rows_per_class = 10, int attr_dim = 3,
                int feature_dim = 6) {
  SyntheticSpec spec;
  spec.seen_count = seen;
  spec.unseen_count = unseen;
  spec.attr_dim = attr_dim;
  spec.feature_dim = feature_dim;
  spec.rows_per_class = rows_per_class;
  spec.noise_scale = 0.02f;
  RngStream rng(seed, "fixture");
  return make_synthetic(spec, rng).dataset;
}

MlpParams zero_generator(int noise_dim, int cond_dim, int out_dim,
                         float bias_value) {
  MlpParams g;
  g.w1 = Matrix(4, noise_dim + cond_dim);
  g.b1 = Matrix(1, 4);
  g.w2 = Matrix(out_dim, 4);
  g.b2 = Matrix(1, out_dim, bias_value);
  g.hidden_act = Activation::LeakyRelu;
  g.output_act = Activation::Relu;
  return g;
}

}  // namespace

TEST_CASE("synthesize_features draws exactly per_class rows per unseen class") {
  Dataset ds = fixture(1);
  RngStream rng(2, "synth");
  MlpParams gen = zero_generator(3, 3, 6, 0.5f);
  SkaConfig off;
  PseudoSet ps = synthesize_features(gen, 3, ds, nullptr, 1, off, rng);
  CHECK(ps.features.rows == 5);
  CHECK(ps.labels == ds.unseen_classes);

  RngStream rng2(3, "synth");
  PseudoSet ps7 = synthesize_features(gen, 3, ds, nullptr, 7, off, rng2);
  CHECK(ps7.features.rows == 35);
  for (size_t i = 0; i < ps7.labels.size(); ++i)
    CHECK(ps7.labels[i] == ds.unseen_classes[i / 7]);
}

TEST_CASE("zero-weight generator emits relu(bias) everywhere") {
  Dataset ds = fixture(4);
  RngStream rng(5, "synth");
  MlpParams gen = zero_generator(3, 3, 6, -1.25f);
  gen.b2.at(0, 0) = 2.5f;  // one positive, rest negative
  SkaConfig off;
  PseudoSet ps = synthesize_features(gen, 3, ds, nullptr, 3, off, rng);
  for (int i = 0; i < ps.features.rows; ++i) {
    CHECK(ps.features.at(i, 0) == 2.5f);
    for (int k = 1; k < 6; ++k) CHECK(ps.features.at(i, k) == 0.0f);
  }
}

TEST_CASE("ska conditions are fresh per draw and shared when disabled") {
  Dataset ds = fixture(6);
  EmbeddingTable emb = make_pseudo_embedding_table(ds.class_names, 4, 9);
  // generator passes its condition block straight through
  MlpParams gen;
  const int noise = 2, cond = 4 + 3;
  gen.w1 = Matrix(cond, noise + cond);
  for (int j = 0; j < cond; ++j) gen.w1.at(j, noise + j) = 1.0f;
  gen.b1 = Matrix(1, cond);
  gen.w2 = Matrix(cond, cond);
  for (int j = 0; j < cond; ++j) gen.w2.at(j, j) = 1.0f;
  gen.b2 = Matrix(1, cond);
  gen.hidden_act = Activation::None;
  gen.output_act = Activation::None;

  SUBCASE("resampled noise makes every condition distinct") {
    SkaConfig ska{true, 0.2f, true};
    RngStream rng(7, "synth");
    PseudoSet ps = synthesize_features(gen, noise, ds, &emb, 4, ska, rng);
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) {
        bool differ = false;
        for (int k = 0; k < 4; ++k)
          if (ps.features.at(a, k) != ps.features.at(b, k)) differ = true;
        CHECK(differ);
      }
  }
  SUBCASE("one draw per class when resample_per_draw is off") {
    SkaConfig ska{true, 0.2f, false};
    RngStream rng(8, "synth");
    PseudoSet ps = synthesize_features(gen, noise, ds, &emb, 4, ska, rng);
    for (int s = 1; s < 4; ++s)
      for (int k = 0; k < cond; ++k)
        CHECK(ps.features.at(s, k) == ps.features.at(0, k));
  }
  SUBCASE("missing unseen embedding is rejected") {
    EmbeddingTable partial(4, "partial");
    for (int c : ds.seen_classes)
      partial.add(ds.class_names[static_cast<size_t>(c)],
                  *emb.find(ds.class_names[static_cast<size_t>(c)]));
    SkaConfig ska{true, 0.2f, true};
    RngStream rng(9, "synth");
    CHECK_THROWS_AS(synthesize_features(gen, noise, ds, &partial, 2, ska, rng),
                    std::invalid_argument);
  }
}

TEST_CASE("classifier trained on separated pseudo clusters is near perfect") {
  PseudoSet ps;
  ps.per_class = 20;
  ps.features = Matrix(60, 2);
  std::vector<int> class_set{3, 7, 9};
  RngStream rng(11, "clusters");
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 20; ++i) {
      int row = c * 20 + i;
      ps.features.at(row, 0) = 3.0f * c + 0.1f * rng.next_normal();
      ps.features.at(row, 1) = -2.0f * c + 0.1f * rng.next_normal();
      ps.labels.push_back(class_set[static_cast<size_t>(c)]);
    }
  LinearClassifier clf = train_softmax_classifier(ps, class_set, 100, 0.05f);
  std::vector<int> idx = clf.predict(ps.features);
  int hits = 0;
  for (size_t i = 0; i < idx.size(); ++i)
    hits += class_set[static_cast<size_t>(idx[i])] == ps.labels[i];
  CHECK(static_cast<double>(hits) / idx.size() >= 0.99);
}

TEST_CASE("training on an empty pseudo set is rejected") {
  PseudoSet ps;
  CHECK_THROWS_AS(train_softmax_classifier(ps, {0}, 10, 0.1f),
                  std::invalid_argument);
}

TEST_CASE("per-class top1 averages classes, not rows") {
  std::vector<int> class_set{0, 1};

  SUBCASE("oracle predictions give 1") {
    std::vector<int> labels{0, 0, 1, 1, 1};
    CHECK(per_class_top1_from_predictions(labels, labels, class_set) == 1.0);
  }
  SUBCASE("constant predictor gives 1/C") {
    std::vector<int> labels{0, 0, 1, 1};
    std::vector<int> pred{0, 0, 0, 0};
    CHECK(per_class_top1_from_predictions(pred, labels, class_set) == 0.5);
  }
  SUBCASE("90 correct rows of one class and 10 wrong of another average 0.5") {
    std::vector<int> labels, pred;
    for (int i = 0; i < 90; ++i) {
      labels.push_back(0);
      pred.push_back(0);
    }
    for (int i = 0; i < 10; ++i) {
      labels.push_back(1);
      pred.push_back(0);
    }
    CHECK(per_class_top1_from_predictions(pred, labels, class_set) == 0.5);
  }
  SUBCASE("row permutation and class duplication leave the metric fixed") {
    std::vector<int> labels{0, 0, 1, 1, 1, 1};
    std::vector<int> pred{0, 1, 1, 1, 0, 0};
    double base = per_class_top1_from_predictions(pred, labels, class_set);
    std::vector<size_t> perm{5, 3, 0, 2, 4, 1};
    std::vector<int> labels_p, pred_p;
    for (size_t i : perm) {
      labels_p.push_back(labels[i]);
      pred_p.push_back(pred[i]);
    }
    CHECK(per_class_top1_from_predictions(pred_p, labels_p, class_set) ==
          base);
    // duplicate every row of class 0
    std::vector<int> labels_d = labels, pred_d = pred;
    for (size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == 0) {
        labels_d.push_back(labels[i]);
        pred_d.push_back(pred[i]);
      }
    CHECK(per_class_top1_from_predictions(pred_d, labels_d, class_set) ==
          base);
  }
  SUBCASE("a class without test rows is an error naming the class") {
    std::vector<int> labels{0, 0};
    std::vector<int> pred{0, 0};
    try {
      per_class_top1_from_predictions(pred, labels, class_set);
      FAIL("expected invalid_argument");
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find("1") != std::string::npos);
    }
  }
  SUBCASE("test labels outside the class set are rejected") {
    std::vector<int> labels{0, 2};
    std::vector<int> pred{0, 0};
    CHECK_THROWS_AS(per_class_top1_from_predictions(pred, labels, class_set),
                    std::invalid_argument);
  }
}

TEST_CASE("single unseen class evaluates to exactly 1") {
  Dataset ds = fixture(12, 4, 1, 8);
  RngStream g_rng(13, "gen");
  RngStream d_rng(13, "disc");
  GanModel model = gan_init(ds.feature_dim(), ds.attr_dim(), ds.attr_dim(),
                            ds.attr_dim(), 8, g_rng, d_rng);
  EvalConfig ec;
  ec.per_class = 10;
  ec.epochs = 5;
  RngStream rng(14, "eval");
  EvalReport report = evaluate_unseen(model.generator, ds, nullptr, ec, rng);
  CHECK(report.top1 == 1.0);
  REQUIRE(report.per_class.size() == 1);
  CHECK(report.per_class[0] == 1.0);
}

TEST_CASE("evaluation is deterministic under a fixed stream") {
  Dataset ds = fixture(15);
  RngStream g_rng(16, "gen");
  RngStream d_rng(16, "disc");
  GanModel model = gan_init(ds.feature_dim(), ds.attr_dim(), ds.attr_dim(),
                            ds.attr_dim(), 8, g_rng, d_rng);
  EvalConfig ec;
  ec.per_class = 20;
  ec.epochs = 30;
  RngStream r1(17, "eval");
  RngStream r2(17, "eval");
  EvalReport a = evaluate_unseen(model.generator, ds, nullptr, ec, r1);
  EvalReport b = evaluate_unseen(model.generator, ds, nullptr, ec, r2);
  CHECK(a.top1 == b.top1);
  CHECK(a.per_class == b.per_class);
  CHECK(a.generator_digest == b.generator_digest);
}

TEST_CASE("an untrained generator scores at chance level") {
  Dataset ds = fixture(18, 4, 5, 12);
  EvalConfig ec;
  ec.per_class = 30;
  ec.epochs = 60;
  double sum = 0;
  const int runs = 20;
  for (int s = 0; s < runs; ++s) {
    RngStream g_rng(100 + static_cast<uint64_t>(s), "gen");
    RngStream d_rng(100 + static_cast<uint64_t>(s), "disc");
    GanModel model = gan_init(ds.feature_dim(), ds.attr_dim(), ds.attr_dim(),
                              ds.attr_dim(), 8, g_rng, d_rng);
    RngStream rng(200 + static_cast<uint64_t>(s), "eval");
    EvalReport r = evaluate_unseen(model.generator, ds, nullptr, ec, rng);
    CHECK(r.top1 >= 0.0);
    CHECK(r.top1 <= 1.0);
    sum += r.top1;
  }
  double mean = sum / runs;
  CHECK(std::abs(mean - 0.2) <= 0.1);
}

TEST_CASE("doubling per_class keeps the metric a valid probability") {
  Dataset ds = fixture(19);
  RngStream g_rng(20, "gen");
  RngStream d_rng(20, "disc");
  GanModel model = gan_init(ds.feature_dim(), ds.attr_dim(), ds.attr_dim(),
                            ds.attr_dim(), 8, g_rng, d_rng);
  EvalConfig ec;
  ec.per_class = 15;
  ec.epochs = 30;
  RngStream r1(21, "eval");
  EvalReport a = evaluate_unseen(model.generator, ds, nullptr, ec, r1);
  ec.per_class = 30;
  RngStream r2(21, "eval");
  EvalReport b = evaluate_unseen(model.generator, ds, nullptr, ec, r2);
  CHECK(b.top1 >= 0.0);
  CHECK(b.top1 <= 1.0);
  CHECK(b.synthesized_per_class == 30);
  CHECK(a.synthesized_per_class == 15);
}
