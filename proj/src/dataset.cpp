#include "fzsl/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "fzsl/errors.hpp"
#include "fzsl/textio.hpp"

namespace fzsl {

namespace {

// Splits into lines; a single trailing newline is not an extra line.
std::vector<std::string_view> file_lines(std::string_view body) {
  std::vector<std::string_view> lines;
  size_t start = 0;
  while (start <= body.size()) {
    size_t pos = body.find('\n', start);
    if (pos == std::string_view::npos) {
      if (start < body.size()) lines.push_back(body.substr(start));
      break;
    }
    lines.push_back(body.substr(start, pos - start));
    start = pos + 1;
  }
  return lines;
}

int parse_header_field(const std::string& path, std::string_view tok,
                       std::string_view key) {
  if (tok.size() <= key.size() + 1 || tok.substr(0, key.size()) != key ||
      tok[key.size()] != '=')
    throw ParseError(path, 1, "expected " + std::string(key) + "=<int>");
  int v = 0;
  if (!parse_int(tok.substr(key.size() + 1), v) || v < 0)
    throw ParseError(path, 1, "bad value in " + std::string(tok));
  return v;
}

void expect_line_count(const std::string& path,
                       const std::vector<std::string_view>& lines,
                       size_t expected) {
  if (lines.size() < expected)
    throw ParseError(path, static_cast<int>(lines.size()) + 1,
                     "unexpected end of file");
  if (lines.size() > expected)
    throw ParseError(path, static_cast<int>(expected) + 1,
                     "trailing garbage after declared content");
}

std::vector<int> parse_id_list(const std::string& path, int line_no,
                               std::string_view body, int num_classes) {
  std::vector<int> ids;
  if (body.empty()) return ids;
  for (auto tok : split(body, ',')) {
    int v = 0;
    if (!parse_int(tok, v))
      throw ParseError(path, line_no, "bad class index '" + std::string(tok) +
                                          "'");
    if (v < 0 || v >= num_classes)
      throw ParseError(path, line_no,
                       "class index " + std::to_string(v) + " out of range");
    ids.push_back(v);
  }
  return ids;
}

}  // namespace

bool Dataset::is_seen(int class_id) const {
  return std::binary_search(seen_classes.begin(), seen_classes.end(),
                            class_id);
}

int Dataset::seen_index(int class_id) const {
  auto it =
      std::lower_bound(seen_classes.begin(), seen_classes.end(), class_id);
  if (it == seen_classes.end() || *it != class_id) return -1;
  return static_cast<int>(it - seen_classes.begin());
}

std::vector<int> Dataset::seen_rows() const {
  std::vector<int> out;
  for (int i = 0; i < num_rows(); ++i)
    if (is_seen(labels[i])) out.push_back(i);
  return out;
}

std::vector<int> Dataset::unseen_rows() const {
  std::vector<int> out;
  for (int i = 0; i < num_rows(); ++i)
    if (!is_seen(labels[i])) out.push_back(i);
  return out;
}

void Dataset::validate() const {
  const int c = num_classes();
  if (c <= 0) throw std::invalid_argument("dataset: no classes");
  if (static_cast<int>(class_names.size()) != c)
    throw std::invalid_argument("dataset: class name count != attribute rows");
  if (static_cast<int>(labels.size()) != features.rows)
    throw std::invalid_argument("dataset: label count != feature rows");
  if (!attributes.all_finite())
    throw std::invalid_argument("dataset: non-finite attribute");
  if (!features.all_finite())
    throw std::invalid_argument("dataset: non-finite feature");
  auto check_sorted = [](const std::vector<int>& v, const char* what) {
    if (!std::is_sorted(v.begin(), v.end()) ||
        std::adjacent_find(v.begin(), v.end()) != v.end())
      throw std::invalid_argument(std::string("dataset: ") + what +
                                  " classes not strictly ascending");
  };
  check_sorted(seen_classes, "seen");
  check_sorted(unseen_classes, "unseen");
  std::unordered_set<int> seen_set(seen_classes.begin(), seen_classes.end());
  for (int u : unseen_classes)
    if (seen_set.count(u))
      throw std::invalid_argument("dataset: class " + std::to_string(u) +
                                  " is both seen and unseen");
  std::unordered_set<int> all(seen_classes.begin(), seen_classes.end());
  all.insert(unseen_classes.begin(), unseen_classes.end());
  for (int id : seen_classes)
    if (id < 0 || id >= c)
      throw std::invalid_argument("dataset: seen class out of range");
  for (int id : unseen_classes)
    if (id < 0 || id >= c)
      throw std::invalid_argument("dataset: unseen class out of range");
  for (int lab : labels)
    if (lab < 0 || lab >= c || !all.count(lab))
      throw std::invalid_argument("dataset: row label " + std::to_string(lab) +
                                  " not in seen or unseen set");
}

Dataset load_dataset(const std::string& features_path,
                     const std::string& attributes_path,
                     const std::string& split_path, DatasetView view) {
  Dataset ds;

  // Attributes first: they define the class universe.
  {
    std::string body = read_text_file(attributes_path);
    auto lines = file_lines(body);
    if (lines.empty()) throw ParseError(attributes_path, 1, "empty file");
    auto head = split(lines[0], ' ');
    if (head.size() != 4 || head[0] != "fzsl.attrs" || head[1] != "v1")
      throw ParseError(attributes_path, 1,
                       "expected header 'fzsl.attrs v1 c=<C> m=<m>'");
    int c = parse_header_field(attributes_path, head[2], "c");
    int m = parse_header_field(attributes_path, head[3], "m");
    if (c <= 0 || m <= 0)
      throw ParseError(attributes_path, 1, "class/attribute counts must be positive");
    expect_line_count(attributes_path, lines, static_cast<size_t>(c) + 1);
    ds.attributes = Matrix(c, m);
    std::unordered_set<std::string> names;
    for (int i = 0; i < c; ++i) {
      int line_no = i + 2;
      auto fields = split(lines[i + 1], ',');
      if (static_cast<int>(fields.size()) != m + 1)
        throw ParseError(attributes_path, line_no,
                         "expected <class_name> plus " + std::to_string(m) +
                             " values");
      std::string name(fields[0]);
      if (name.empty())
        throw ParseError(attributes_path, line_no, "empty class name");
      if (!names.insert(name).second)
        throw ParseError(attributes_path, line_no,
                         "duplicate class name '" + name + "'");
      ds.class_names.push_back(std::move(name));
      for (int k = 0; k < m; ++k) {
        float v = 0;
        if (!parse_float(fields[k + 1], v) || !std::isfinite(v))
          throw ParseError(attributes_path, line_no,
                           "bad attribute value '" + std::string(fields[k + 1]) +
                               "'");
        ds.attributes.at(i, k) = v;
      }
    }
  }

  // Split file.
  {
    std::string body = read_text_file(split_path);
    auto lines = file_lines(body);
    if (lines.empty()) throw ParseError(split_path, 1, "empty file");
    if (lines[0] != "fzsl.split v1")
      throw ParseError(split_path, 1, "expected header 'fzsl.split v1'");
    expect_line_count(split_path, lines, 3);
    auto parse_side = [&](int line_no, std::string_view prefix) {
      std::string_view line = lines[line_no - 1];
      if (line.substr(0, prefix.size()) != prefix)
        throw ParseError(split_path, line_no,
                         "expected '" + std::string(prefix) + "<ids>'");
      return parse_id_list(split_path, line_no, line.substr(prefix.size()),
                           ds.num_classes());
    };
    ds.seen_classes = parse_side(2, "seen:");
    ds.unseen_classes = parse_side(3, "unseen:");
    std::sort(ds.seen_classes.begin(), ds.seen_classes.end());
    std::sort(ds.unseen_classes.begin(), ds.unseen_classes.end());
    for (int u : ds.unseen_classes)
      if (std::binary_search(ds.seen_classes.begin(), ds.seen_classes.end(),
                             u))
        throw ParseError(split_path, 3,
                         "class " + std::to_string(u) +
                             " appears in both seen and unseen");
  }

  // Feature rows.
  {
    std::string body = read_text_file(features_path);
    auto lines = file_lines(body);
    if (lines.empty()) throw ParseError(features_path, 1, "empty file");
    auto head = split(lines[0], ' ');
    if (head.size() != 4 || head[0] != "fzsl.features" || head[1] != "v1")
      throw ParseError(features_path, 1,
                       "expected header 'fzsl.features v1 n=<n> d=<d>'");
    int n = parse_header_field(features_path, head[2], "n");
    int d = parse_header_field(features_path, head[3], "d");
    if (d <= 0)
      throw ParseError(features_path, 1, "feature width must be positive");
    expect_line_count(features_path, lines, static_cast<size_t>(n) + 1);
    ds.features = Matrix(n, d);
    ds.labels.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      int line_no = i + 2;
      auto fields = split(lines[i + 1], ',');
      if (static_cast<int>(fields.size()) != d + 1)
        throw ParseError(features_path, line_no,
                         "expected <label> plus " + std::to_string(d) +
                             " values");
      int lab = 0;
      if (!parse_int(fields[0], lab))
        throw ParseError(features_path, line_no,
                         "bad label '" + std::string(fields[0]) + "'");
      if (lab < 0 || lab >= ds.num_classes())
        throw ParseError(features_path, line_no,
                         "label " + std::to_string(lab) + " out of range [0," +
                             std::to_string(ds.num_classes()) + ")");
      if (view == DatasetView::TrainOnly && !ds.is_seen(lab))
        throw ParseError(features_path, line_no,
                         "row labeled with unseen class " +
                             std::to_string(lab) + " in a train view");
      ds.labels[i] = lab;
      for (int k = 0; k < d; ++k) {
        float v = 0;
        if (!parse_float(fields[k + 1], v) || !std::isfinite(v))
          throw ParseError(features_path, line_no,
                           "bad feature value '" +
                               std::string(fields[k + 1]) + "'");
        ds.features.at(i, k) = v;
      }
    }
  }

  ds.validate();
  return ds;
}

void save_dataset(const Dataset& ds, const std::string& features_path,
                  const std::string& attributes_path,
                  const std::string& split_path) {
  ds.validate();
  {
    std::string body = "fzsl.attrs v1 c=" + std::to_string(ds.num_classes()) +
                       " m=" + std::to_string(ds.attr_dim()) + "\n";
    for (int c = 0; c < ds.num_classes(); ++c) {
      body += ds.class_names[c];
      for (int k = 0; k < ds.attr_dim(); ++k)
        body += "," + format_float(ds.attributes.at(c, k));
      body += "\n";
    }
    write_text_file(attributes_path, body);
  }
  {
    std::string body = "fzsl.split v1\nseen:";
    for (size_t i = 0; i < ds.seen_classes.size(); ++i)
      body += (i ? "," : "") + std::to_string(ds.seen_classes[i]);
    body += "\nunseen:";
    for (size_t i = 0; i < ds.unseen_classes.size(); ++i)
      body += (i ? "," : "") + std::to_string(ds.unseen_classes[i]);
    body += "\n";
    write_text_file(split_path, body);
  }
  {
    std::string body = "fzsl.features v1 n=" + std::to_string(ds.num_rows()) +
                       " d=" + std::to_string(ds.feature_dim()) + "\n";
    for (int i = 0; i < ds.num_rows(); ++i) {
      body += std::to_string(ds.labels[i]);
      for (int k = 0; k < ds.feature_dim(); ++k)
        body += "," + format_float(ds.features.at(i, k));
      body += "\n";
    }
    write_text_file(features_path, body);
  }
}

void SyntheticSpec::validate() const {
  if (seen_count <= 0 || unseen_count <= 0)
    throw std::invalid_argument("synthetic: class counts must be positive");
  if (attr_dim <= 0 || feature_dim <= 0)
    throw std::invalid_argument("synthetic: dimensions must be positive");
  if (rows_per_class <= 0)
    throw std::invalid_argument("synthetic: rows_per_class must be positive");
  if (!(noise_scale >= 0.0f))
    throw std::invalid_argument("synthetic: noise_scale must be >= 0");
}

SyntheticDataset make_synthetic(const SyntheticSpec& spec, RngStream& rng) {
  spec.validate();
  const int c = spec.seen_count + spec.unseen_count;
  const int m = spec.attr_dim;
  const int d = spec.feature_dim;

  SyntheticDataset out;
  Dataset& ds = out.dataset;

  // Non-negative mixing matrix so true features live in the generator's
  // ReLU output range.
  out.w_true = Matrix(d, m);
  const float w_scale = 1.0f / std::sqrt(static_cast<float>(m));
  for (float& v : out.w_true.data) v = w_scale * rng.next_uniform();

  ds.attributes = Matrix(c, m);
  for (float& v : ds.attributes.data) v = rng.next_uniform();

  ds.class_names.reserve(static_cast<size_t>(c));
  for (int i = 0; i < c; ++i) {
    std::string idx = std::to_string(i);
    while (idx.size() < 3) idx.insert(idx.begin(), '0');
    ds.class_names.push_back("class_" + idx);
  }

  const int n = c * spec.rows_per_class;
  ds.features = Matrix(n, d);
  ds.labels.resize(static_cast<size_t>(n));
  std::vector<float> mean(static_cast<size_t>(d));
  int row = 0;
  for (int cls = 0; cls < c; ++cls) {
    for (int k = 0; k < d; ++k) {
      float s = 0.0f;
      for (int a = 0; a < m; ++a)
        s += out.w_true.at(k, a) * ds.attributes.at(cls, a);
      mean[k] = s;
    }
    for (int r = 0; r < spec.rows_per_class; ++r, ++row) {
      ds.labels[row] = cls;
      for (int k = 0; k < d; ++k)
        ds.features.at(row, k) = mean[k] + spec.noise_scale * rng.next_normal();
    }
  }

  ds.seen_classes.resize(static_cast<size_t>(spec.seen_count));
  std::iota(ds.seen_classes.begin(), ds.seen_classes.end(), 0);
  ds.unseen_classes.resize(static_cast<size_t>(spec.unseen_count));
  std::iota(ds.unseen_classes.begin(), ds.unseen_classes.end(),
            spec.seen_count);

  ds.validate();
  return out;
}

namespace {

void shuffle_ints(std::vector<int>& v, RngStream& rng) {
  for (size_t i = v.size(); i > 1; --i) {
    size_t j = rng.next_below(i);
    std::swap(v[i - 1], v[j]);
  }
}

std::vector<ClientPartition> build_partitions(
    const Dataset& ds, const std::vector<std::vector<int>>& subsets) {
  std::vector<ClientPartition> parts(subsets.size());
  for (size_t i = 0; i < subsets.size(); ++i) {
    parts[i].client_id = static_cast<int>(i);
    parts[i].class_subset = subsets[i];
    std::sort(parts[i].class_subset.begin(), parts[i].class_subset.end());
  }
  for (int r = 0; r < ds.num_rows(); ++r) {
    int lab = ds.labels[r];
    if (!ds.is_seen(lab)) continue;
    for (auto& p : parts)
      if (std::binary_search(p.class_subset.begin(), p.class_subset.end(),
                             lab)) {
        p.row_indices.push_back(r);
        break;
      }
  }
  return parts;
}

}  // namespace

std::vector<ClientPartition> partition_even(const Dataset& ds, int num_clients,
                                            RngStream& rng) {
  const int ns = static_cast<int>(ds.seen_classes.size());
  if (num_clients <= 0)
    throw std::invalid_argument("partition_even: client count must be positive");
  if (num_clients > ns)
    throw std::invalid_argument("partition_even: more clients than seen classes");
  std::vector<int> order = ds.seen_classes;
  shuffle_ints(order, rng);
  std::vector<std::vector<int>> subsets(static_cast<size_t>(num_clients));
  for (int i = 0; i < ns; ++i)
    subsets[static_cast<size_t>(i % num_clients)].push_back(order[i]);
  return build_partitions(ds, subsets);
}

std::vector<ClientPartition> partition_uneven(const Dataset& ds,
                                              int num_clients,
                                              RngStream& rng) {
  const int ns = static_cast<int>(ds.seen_classes.size());
  if (num_clients <= 0)
    throw std::invalid_argument(
        "partition_uneven: client count must be positive");
  const int floor_classes = (ns + 7) / 8;
  if (num_clients * floor_classes > ns)
    throw std::invalid_argument(
        "partition_uneven: cannot give every client at least " +
        std::to_string(floor_classes) + " of " + std::to_string(ns) +
        " classes");

  // Uniform composition of the surplus via stars and bars: choose N-1 bar
  // positions among surplus+N-1 slots.
  const int surplus = ns - num_clients * floor_classes;
  std::vector<int> sizes(static_cast<size_t>(num_clients), floor_classes);
  if (num_clients > 1 && surplus > 0) {
    const int slots = surplus + num_clients - 1;
    std::vector<int> pos(static_cast<size_t>(slots));
    std::iota(pos.begin(), pos.end(), 1);
    for (int i = 0; i < num_clients - 1; ++i) {
      size_t j = i + rng.next_below(static_cast<uint64_t>(slots - i));
      std::swap(pos[static_cast<size_t>(i)], pos[j]);
    }
    std::vector<int> bars(pos.begin(), pos.begin() + num_clients - 1);
    std::sort(bars.begin(), bars.end());
    int prev = 0;
    for (int i = 0; i < num_clients - 1; ++i) {
      sizes[static_cast<size_t>(i)] += bars[static_cast<size_t>(i)] - prev - 1;
      prev = bars[static_cast<size_t>(i)];
    }
    sizes[static_cast<size_t>(num_clients - 1)] += slots - prev;
  } else if (num_clients == 1) {
    sizes[0] = ns;
  }

  std::vector<int> order = ds.seen_classes;
  shuffle_ints(order, rng);
  std::vector<std::vector<int>> subsets(static_cast<size_t>(num_clients));
  int cursor = 0;
  for (int i = 0; i < num_clients; ++i)
    for (int k = 0; k < sizes[static_cast<size_t>(i)]; ++k)
      subsets[static_cast<size_t>(i)].push_back(order[cursor++]);
  return build_partitions(ds, subsets);
}

void validate_partitions(const Dataset& ds,
                         const std::vector<ClientPartition>& parts) {
  std::unordered_set<int> covered;
  size_t total = 0;
  for (const auto& p : parts) {
    for (int cls : p.class_subset) {
      if (!ds.is_seen(cls))
        throw std::invalid_argument("partition: class " + std::to_string(cls) +
                                    " is not a seen class");
      if (!covered.insert(cls).second)
        throw std::invalid_argument("partition: class " + std::to_string(cls) +
                                    " assigned to two clients");
    }
    total += p.class_subset.size();
    for (int r : p.row_indices) {
      if (r < 0 || r >= ds.num_rows())
        throw std::invalid_argument("partition: row index out of range");
      if (!std::binary_search(p.class_subset.begin(), p.class_subset.end(),
                              ds.labels[static_cast<size_t>(r)]))
        throw std::invalid_argument(
            "partition: row " + std::to_string(r) +
            " labeled outside the client's class subset");
    }
  }
  if (total != ds.seen_classes.size())
    throw std::invalid_argument("partition: clients do not cover the seen set");
}

double partition_skew(const std::vector<ClientPartition>& parts,
                      const Dataset& ds) {
  if (parts.size() < 2)
    throw std::invalid_argument("partition_skew: need at least two clients");
  const int ns = static_cast<int>(ds.seen_classes.size());
  std::vector<std::vector<double>> dist(parts.size(),
                                        std::vector<double>(ns, 0.0));
  for (size_t i = 0; i < parts.size(); ++i) {
    double total = 0.0;
    for (int r : parts[i].row_indices) {
      int idx = ds.seen_index(ds.labels[static_cast<size_t>(r)]);
      if (idx < 0)
        throw std::invalid_argument("partition_skew: unseen-labeled row");
      dist[i][static_cast<size_t>(idx)] += 1.0;
      total += 1.0;
    }
    if (total > 0.0)
      for (double& v : dist[i]) v /= total;
  }
  double sum = 0.0;
  int pairs = 0;
  for (size_t i = 0; i < parts.size(); ++i)
    for (size_t j = i + 1; j < parts.size(); ++j) {
      double gap = 0.0;
      for (int c = 0; c < ns; ++c)
        gap += std::abs(dist[i][static_cast<size_t>(c)] -
                        dist[j][static_cast<size_t>(c)]);
      sum += 0.5 * gap;
      ++pairs;
    }
  return sum / pairs;
}

}  // namespace fzsl
