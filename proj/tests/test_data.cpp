#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "fzsl/dataset.hpp"
#include "fzsl/errors.hpp"
#include "fzsl/textio.hpp"

using namespace fzsl;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "fzsl_test_data" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& body) {
  std::ofstream out(p);
  out << body;
}

// 3 classes, Y_u = {2}
struct ToyFiles {
  fs::path features, attrs, splits;
};

ToyFiles toy_fixture(const fs::path& dir, bool unseen_row_in_features) {
  ToyFiles f{dir / "features.txt", dir / "attributes.txt", dir / "split.txt"};
  write_file(f.attrs,
             "fzsl.attrs v1 c=3 m=2\n"
             "cat,0.1,0.9\n"
             "dog,0.8,0.2\n"
             "fox,0.5,0.5\n");
  write_file(f.splits, "fzsl.split v1\nseen:0,1\nunseen:2\n");
  std::string feats = "fzsl.features v1 n=3 d=2\n0,1,2\n1,3,4\n";
  feats += unseen_row_in_features ? "2,5,6\n" : "0,5,6\n";
  write_file(f.features, feats);
  return f;
}

}  // namespace

TEST_CASE("loader rejects unseen-labeled rows in a train view") {
  auto dir = temp_dir("trainview");
  ToyFiles f = toy_fixture(dir, true);
  CHECK_THROWS_AS(
      load_dataset(f.features.string(), f.attrs.string(), f.splits.string(),
                   DatasetView::TrainOnly),
      ParseError);
  // the same file loads as a full view
  Dataset ds = load_dataset(f.features.string(), f.attrs.string(),
                            f.splits.string(), DatasetView::Full);
  CHECK(ds.num_rows() == 3);
  CHECK(ds.unseen_rows() == std::vector<int>{2});
}

TEST_CASE("loader echoes declared shapes") {
  auto dir = temp_dir("shapes");
  std::string attrs = "fzsl.attrs v1 c=5 m=4\n";
  for (int c = 0; c < 5; ++c)
    attrs += "c" + std::to_string(c) + ",1,2,3,4\n";
  write_file(dir / "attributes.txt", attrs);
  write_file(dir / "split.txt", "fzsl.split v1\nseen:0,1,2\nunseen:3,4\n");
  std::string feats = "fzsl.features v1 n=20 d=6\n";
  for (int i = 0; i < 20; ++i)
    feats += std::to_string(i % 5) + ",1,2,3,4,5,6\n";
  write_file(dir / "features.txt", feats);
  Dataset ds = load_dataset((dir / "features.txt").string(),
                            (dir / "attributes.txt").string(),
                            (dir / "split.txt").string());
  CHECK(ds.num_classes() == 5);
  CHECK(ds.attr_dim() == 4);
  CHECK(ds.num_rows() == 20);
  CHECK(ds.feature_dim() == 6);
}

TEST_CASE("loader errors carry file and 1-based line numbers") {
  auto dir = temp_dir("errors");
  ToyFiles f = toy_fixture(dir, false);

  SUBCASE("label out of range") {
    write_file(f.features, "fzsl.features v1 n=1 d=2\n7,1,2\n");
    try {
      load_dataset(f.features.string(), f.attrs.string(), f.splits.string());
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      std::string msg = e.what();
      CHECK(msg.find("features.txt:2") != std::string::npos);
      CHECK(msg.find("out of range") != std::string::npos);
    }
  }
  SUBCASE("malformed row") {
    write_file(f.features, "fzsl.features v1 n=1 d=2\n0,1\n");
    CHECK_THROWS_AS(load_dataset(f.features.string(), f.attrs.string(),
                                 f.splits.string()),
                    ParseError);
  }
  SUBCASE("class in both splits") {
    write_file(f.splits, "fzsl.split v1\nseen:0,1\nunseen:1,2\n");
    try {
      load_dataset(f.features.string(), f.attrs.string(), f.splits.string());
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("both seen and unseen") !=
            std::string::npos);
    }
  }
  SUBCASE("trailing garbage") {
    write_file(f.features, "fzsl.features v1 n=2 d=2\n0,1,2\n1,3,4\n0,5,6\n");
    CHECK_THROWS_AS(load_dataset(f.features.string(), f.attrs.string(),
                                 f.splits.string()),
                    ParseError);
  }
  SUBCASE("duplicate class name") {
    write_file(f.attrs,
               "fzsl.attrs v1 c=3 m=2\ncat,1,2\ncat,3,4\nfox,5,6\n");
    CHECK_THROWS_AS(load_dataset(f.features.string(), f.attrs.string(),
                                 f.splits.string()),
                    ParseError);
  }
}

TEST_CASE("dataset write/reload round-trips bit-identically") {
  RngStream rng(5, "roundtrip");
  SyntheticSpec spec;
  spec.seen_count = 6;
  spec.unseen_count = 2;
  spec.attr_dim = 5;
  spec.feature_dim = 7;
  spec.rows_per_class = 3;
  spec.noise_scale = 0.3f;
  Dataset ds = make_synthetic(spec, rng).dataset;

  auto dir = temp_dir("roundtrip");
  save_dataset(ds, (dir / "f.txt").string(), (dir / "a.txt").string(),
               (dir / "s.txt").string());
  Dataset back = load_dataset((dir / "f.txt").string(),
                              (dir / "a.txt").string(),
                              (dir / "s.txt").string());
  CHECK(back.features == ds.features);
  CHECK(back.attributes == ds.attributes);
  CHECK(back.labels == ds.labels);
  CHECK(back.class_names == ds.class_names);
  CHECK(back.seen_classes == ds.seen_classes);
  CHECK(back.unseen_classes == ds.unseen_classes);
}

TEST_CASE("make_synthetic with zero noise gives exact class rows") {
  RngStream rng(9, "noiseless");
  SyntheticSpec spec;
  spec.seen_count = 3;
  spec.unseen_count = 1;
  spec.attr_dim = 4;
  spec.feature_dim = 5;
  spec.rows_per_class = 4;
  spec.noise_scale = 0.0f;
  SyntheticDataset synth = make_synthetic(spec, rng);
  const Dataset& ds = synth.dataset;

  for (int cls = 0; cls < ds.num_classes(); ++cls) {
    std::vector<float> expected(static_cast<size_t>(ds.feature_dim()));
    for (int k = 0; k < ds.feature_dim(); ++k) {
      float s = 0.0f;
      for (int a = 0; a < ds.attr_dim(); ++a)
        s += synth.w_true.at(k, a) * ds.attributes.at(cls, a);
      expected[static_cast<size_t>(k)] = s;
    }
    for (int i = 0; i < ds.num_rows(); ++i) {
      if (ds.labels[static_cast<size_t>(i)] != cls) continue;
      for (int k = 0; k < ds.feature_dim(); ++k)
        CHECK(ds.features.at(i, k) == expected[static_cast<size_t>(k)]);
    }
  }

  // distinct attributes -> distinct class means
  for (int a = 0; a < ds.num_classes(); ++a)
    for (int b = a + 1; b < ds.num_classes(); ++b) {
      bool differ = false;
      for (int k = 0; k < ds.attr_dim(); ++k)
        if (ds.attributes.at(a, k) != ds.attributes.at(b, k)) differ = true;
      CHECK(differ);
    }
}

TEST_CASE("make_synthetic is bit-reproducible for a fixed seed") {
  SyntheticSpec spec;
  RngStream r1(77, "gen");
  RngStream r2(77, "gen");
  SyntheticDataset a = make_synthetic(spec, r1);
  SyntheticDataset b = make_synthetic(spec, r2);
  CHECK(a.dataset.features == b.dataset.features);
  CHECK(a.w_true == b.w_true);
}

TEST_CASE("least squares on class means recovers the mixing matrix") {
  RngStream rng(13, "ridge");
  SyntheticSpec spec;
  spec.seen_count = 20;
  spec.unseen_count = 5;
  spec.attr_dim = 8;
  spec.feature_dim = 12;
  spec.rows_per_class = 50;
  spec.noise_scale = 0.01f;
  SyntheticDataset synth = make_synthetic(spec, rng);
  const Dataset& ds = synth.dataset;
  const int c = ds.num_classes(), m = ds.attr_dim(), d = ds.feature_dim();

  // class means
  std::vector<std::vector<double>> mean(
      static_cast<size_t>(c), std::vector<double>(static_cast<size_t>(d), 0));
  std::vector<int> count(static_cast<size_t>(c), 0);
  for (int i = 0; i < ds.num_rows(); ++i) {
    int lab = ds.labels[static_cast<size_t>(i)];
    count[static_cast<size_t>(lab)] += 1;
    for (int k = 0; k < d; ++k)
      mean[static_cast<size_t>(lab)][static_cast<size_t>(k)] +=
          ds.features.at(i, k);
  }
  for (int cls = 0; cls < c; ++cls)
    for (int k = 0; k < d; ++k)
      mean[static_cast<size_t>(cls)][static_cast<size_t>(k)] /=
          count[static_cast<size_t>(cls)];

  // normal equations A w_k = b_k with A = sum a a^T (shared across k)
  std::vector<std::vector<double>> a_mat(
      static_cast<size_t>(m), std::vector<double>(static_cast<size_t>(m), 0));
  for (int cls = 0; cls < c; ++cls)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        a_mat[static_cast<size_t>(i)][static_cast<size_t>(j)] +=
            static_cast<double>(ds.attributes.at(cls, i)) *
            ds.attributes.at(cls, j);

  double err_sq = 0, ref_sq = 0;
  for (int k = 0; k < d; ++k) {
    std::vector<double> b(static_cast<size_t>(m), 0);
    for (int cls = 0; cls < c; ++cls)
      for (int i = 0; i < m; ++i)
        b[static_cast<size_t>(i)] +=
            static_cast<double>(ds.attributes.at(cls, i)) *
            mean[static_cast<size_t>(cls)][static_cast<size_t>(k)];
    // gaussian elimination on a copy
    auto a_copy = a_mat;
    std::vector<double> x = b;
    for (int col = 0; col < m; ++col) {
      int pivot = col;
      for (int r = col + 1; r < m; ++r)
        if (std::abs(a_copy[static_cast<size_t>(r)][static_cast<size_t>(col)]) >
            std::abs(
                a_copy[static_cast<size_t>(pivot)][static_cast<size_t>(col)]))
          pivot = r;
      std::swap(a_copy[static_cast<size_t>(col)],
                a_copy[static_cast<size_t>(pivot)]);
      std::swap(x[static_cast<size_t>(col)], x[static_cast<size_t>(pivot)]);
      for (int r = col + 1; r < m; ++r) {
        double f = a_copy[static_cast<size_t>(r)][static_cast<size_t>(col)] /
                   a_copy[static_cast<size_t>(col)][static_cast<size_t>(col)];
        for (int cc = col; cc < m; ++cc)
          a_copy[static_cast<size_t>(r)][static_cast<size_t>(cc)] -=
              f * a_copy[static_cast<size_t>(col)][static_cast<size_t>(cc)];
        x[static_cast<size_t>(r)] -= f * x[static_cast<size_t>(col)];
      }
    }
    std::vector<double> w(static_cast<size_t>(m));
    for (int r = m - 1; r >= 0; --r) {
      double s = x[static_cast<size_t>(r)];
      for (int cc = r + 1; cc < m; ++cc)
        s -= a_copy[static_cast<size_t>(r)][static_cast<size_t>(cc)] *
             w[static_cast<size_t>(cc)];
      w[static_cast<size_t>(r)] =
          s / a_copy[static_cast<size_t>(r)][static_cast<size_t>(r)];
    }
    for (int a = 0; a < m; ++a) {
      double ref = synth.w_true.at(k, a);
      double diff = w[static_cast<size_t>(a)] - ref;
      err_sq += diff * diff;
      ref_sq += ref * ref;
    }
  }
  CHECK(std::sqrt(err_sq / ref_sq) < 0.05);
}

TEST_CASE("partition_even deals disjoint near-equal subsets") {
  RngStream gen_rng(21, "pe");
  SyntheticSpec spec;
  spec.seen_count = 40;
  spec.unseen_count = 5;
  spec.rows_per_class = 2;
  Dataset ds = make_synthetic(spec, gen_rng).dataset;

  RngStream rng(1, "deal");
  auto parts = partition_even(ds, 4, rng);
  REQUIRE(parts.size() == 4);
  std::set<int> all;
  for (const auto& p : parts) {
    CHECK(p.class_subset.size() == 10);
    all.insert(p.class_subset.begin(), p.class_subset.end());
  }
  CHECK(all.size() == 40);
  validate_partitions(ds, parts);

  RngStream rng1(2, "deal");
  auto one = partition_even(ds, 1, rng1);
  REQUIRE(one.size() == 1);
  CHECK(one[0].class_subset == ds.seen_classes);

  CHECK_THROWS_AS(partition_even(ds, 41, rng), std::invalid_argument);
}

TEST_CASE("partition_even splits 10 classes over 4 clients as 3/3/2/2") {
  RngStream gen_rng(22, "pe10");
  SyntheticSpec spec;
  spec.seen_count = 10;
  spec.unseen_count = 2;
  spec.rows_per_class = 1;
  Dataset ds = make_synthetic(spec, gen_rng).dataset;
  RngStream rng(3, "deal");
  auto parts = partition_even(ds, 4, rng);
  std::multiset<size_t> sizes;
  for (const auto& p : parts) sizes.insert(p.class_subset.size());
  CHECK(sizes == std::multiset<size_t>{2, 2, 3, 3});
}

TEST_CASE("partition_uneven respects the one-eighth floor") {
  RngStream gen_rng(23, "pu");
  SyntheticSpec spec;
  spec.seen_count = 40;
  spec.unseen_count = 5;
  spec.rows_per_class = 2;
  Dataset ds = make_synthetic(spec, gen_rng).dataset;

  RngStream rng(4, "deal");
  auto parts = partition_uneven(ds, 4, rng);
  for (const auto& p : parts) CHECK(p.class_subset.size() >= 5);
  validate_partitions(ds, parts);

  RngStream rng1(5, "deal");
  auto one = partition_uneven(ds, 1, rng1);
  CHECK(one[0].class_subset == ds.seen_classes);

  // 16 classes, floor = 2, N = 9 needs 18 > 16
  SyntheticSpec spec16 = spec;
  spec16.seen_count = 16;
  RngStream gen2(24, "pu16");
  Dataset ds16 = make_synthetic(spec16, gen2).dataset;
  RngStream rng2(6, "deal");
  CHECK_THROWS_AS(partition_uneven(ds16, 9, rng2), std::invalid_argument);
}

TEST_CASE("partition_uneven floor holds over 1000 seeded draws") {
  RngStream gen_rng(25, "pu1000");
  SyntheticSpec spec;
  spec.seen_count = 16;
  spec.unseen_count = 2;
  spec.rows_per_class = 1;
  Dataset ds = make_synthetic(spec, gen_rng).dataset;
  size_t min_size = 100;
  for (int seed = 0; seed < 1000; ++seed) {
    RngStream rng(static_cast<uint64_t>(seed), "draw");
    auto parts = partition_uneven(ds, 2, rng);
    for (const auto& p : parts)
      min_size = std::min(min_size, p.class_subset.size());
  }
  CHECK(min_size >= 2);
}

TEST_CASE("partitioner invariants hold across a 100-seed sweep") {
  RngStream gen_rng(26, "sweep");
  SyntheticSpec spec;
  spec.seen_count = 40;
  spec.unseen_count = 4;
  spec.rows_per_class = 2;
  Dataset ds = make_synthetic(spec, gen_rng).dataset;
  for (int n : {2, 4, 10}) {
    for (int seed = 0; seed < 100; ++seed) {
      RngStream re(static_cast<uint64_t>(seed), "even");
      validate_partitions(ds, partition_even(ds, n, re));
      RngStream ru(static_cast<uint64_t>(seed), "uneven");
      validate_partitions(ds, partition_uneven(ds, n, ru));
    }
  }
}

TEST_CASE("partition_skew hits the documented anchors") {
  // tiny 2-seen-class dataset assembled by hand
  Dataset ds;
  ds.features = Matrix(4, 1);
  ds.labels = {0, 0, 1, 1};
  ds.class_names = {"a", "b"};
  ds.attributes = Matrix(2, 1);
  ds.seen_classes = {0, 1};

  SUBCASE("disjoint subsets give exactly 1") {
    std::vector<ClientPartition> parts(2);
    parts[0] = {0, {0}, {0, 1}};
    parts[1] = {1, {1}, {2, 3}};
    CHECK(partition_skew(parts, ds) == 1.0);
  }
  SUBCASE("identical distributions give exactly 0") {
    std::vector<ClientPartition> parts(2);
    parts[0] = {0, {0, 1}, {0, 2}};
    parts[1] = {1, {0, 1}, {1, 3}};
    CHECK(partition_skew(parts, ds) == 0.0);
  }
  SUBCASE("half-overlapping mass gives 0.5") {
    std::vector<ClientPartition> parts(2);
    parts[0] = {0, {0}, {0}};
    parts[1] = {1, {0, 1}, {1, 2}};
    CHECK(partition_skew(parts, ds) == 0.5);
  }
  SUBCASE("single partition is rejected") {
    std::vector<ClientPartition> parts(1);
    parts[0] = {0, {0, 1}, {0, 1, 2, 3}};
    CHECK_THROWS_AS(partition_skew(parts, ds), std::invalid_argument);
  }
}

TEST_CASE("partition_skew is order-symmetric and relabeling-invariant") {
  RngStream gen_rng(27, "skewinv");
  SyntheticSpec spec;
  spec.seen_count = 12;
  spec.unseen_count = 2;
  spec.rows_per_class = 3;
  Dataset ds = make_synthetic(spec, gen_rng).dataset;
  RngStream rng(7, "deal");
  auto parts = partition_uneven(ds, 3, rng);
  double base = partition_skew(parts, ds);

  auto swapped = parts;
  std::swap(swapped[0], swapped[2]);
  CHECK(partition_skew(swapped, ds) == base);

  // relabel classes by reversing the seen order, applied to all clients
  Dataset relabeled = ds;
  const int c = ds.num_classes();
  std::vector<int> perm(static_cast<size_t>(c));
  for (int i = 0; i < 12; ++i) perm[static_cast<size_t>(i)] = 11 - i;
  for (int i = 12; i < c; ++i) perm[static_cast<size_t>(i)] = i;
  for (auto& lab : relabeled.labels) lab = perm[static_cast<size_t>(lab)];
  auto relabeled_parts = parts;
  for (auto& p : relabeled_parts) {
    for (auto& cls : p.class_subset) cls = perm[static_cast<size_t>(cls)];
    std::sort(p.class_subset.begin(), p.class_subset.end());
  }
  CHECK(partition_skew(relabeled_parts, relabeled) == doctest::Approx(base));
}

TEST_CASE("synthetic spec validation") {
  SyntheticSpec spec;
  spec.unseen_count = 0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec.unseen_count = 5;
  spec.rows_per_class = -1;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}
