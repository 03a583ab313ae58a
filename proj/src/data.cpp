#include "unlearn/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "unlearn/error.hpp"
#include "unlearn/rng.hpp"

namespace unlearn {

namespace {

using nlohmann::json;

// Uniform direction on the unit sphere in R^d.
Vector sphere_point(Rng& rng, Eigen::Index dim) {
  Vector v(dim);
  double norm = 0.0;
  do {
    for (Eigen::Index i = 0; i < dim; ++i) v(i) = rng.normal();
    norm = v.norm();
  } while (norm < 1e-12);
  return v / norm;
}

std::vector<Vector> blob_centers(const BlobConfig& cfg) {
  Rng rng = Rng(cfg.seed).child("centers");
  std::vector<Vector> centers;
  centers.reserve(static_cast<std::size_t>(cfg.classes));
  for (int k = 0; k < cfg.classes; ++k) {
    centers.push_back(cfg.center_scale * sphere_point(rng, cfg.dim));
  }
  return centers;
}

Matrix sample_blob_points(const BlobConfig& cfg, const std::vector<Vector>& centers,
                          int per_class, Rng rng) {
  Matrix x(static_cast<Eigen::Index>(cfg.classes) * per_class, cfg.dim);
  Eigen::Index row = 0;
  for (int k = 0; k < cfg.classes; ++k) {
    for (int i = 0; i < per_class; ++i, ++row) {
      for (Eigen::Index j = 0; j < cfg.dim; ++j) {
        x(row, j) = centers[static_cast<std::size_t>(k)](j) + rng.normal(0.0, cfg.sigma);
      }
    }
  }
  return x;
}

Labels block_labels(int classes, int per_class) {
  Labels y(static_cast<std::size_t>(classes) * per_class);
  for (int k = 0; k < classes; ++k) {
    std::fill(y.begin() + static_cast<std::size_t>(k) * per_class,
              y.begin() + static_cast<std::size_t>(k + 1) * per_class, k);
  }
  return y;
}

void validate_blob_config(const BlobConfig& cfg) {
  if (cfg.classes < 2) throw ConfigError("blobs need at least 2 classes");
  if (cfg.per_class < 1) throw ConfigError("blobs need at least 1 sample per class");
  if (cfg.dim < 1) throw ConfigError("blob dimension must be positive");
  if (cfg.sigma < 0.0 || cfg.center_scale < 0.0) {
    throw ConfigError("blob sigma and center_scale must be nonnegative");
  }
}

// Affine map fit on the reference matrix sending each column into [0, 1].
struct ColumnScaler {
  Vector lo;
  Vector range;

  explicit ColumnScaler(const Matrix& ref) {
    lo = ref.colwise().minCoeff().transpose();
    Vector hi = ref.colwise().maxCoeff().transpose();
    range = hi - lo;
    for (Eigen::Index j = 0; j < range.size(); ++j) {
      if (range(j) <= 0.0) range(j) = 1.0;  // constant column stays put
    }
  }

  void apply(Matrix& x) const {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      x.col(j) = (x.col(j).array() - lo(j)) / range(j);
    }
  }
};

std::vector<std::vector<std::uint8_t>> pattern_templates(const PatternConfig& cfg) {
  const Eigen::Index pixels = cfg.edge * cfg.edge;
  const double min_hamming = 0.2 * static_cast<double>(pixels);
  Rng rng = Rng(cfg.seed).child("templates");
  std::vector<std::vector<std::uint8_t>> templates;
  templates.reserve(static_cast<std::size_t>(cfg.classes));
  for (int k = 0; k < cfg.classes; ++k) {
    for (int attempt = 0;; ++attempt) {
      if (attempt > 10000) throw ConfigError("pattern templates: rejection sampling stalled");
      std::vector<std::uint8_t> t(static_cast<std::size_t>(pixels));
      for (auto& bit : t) bit = rng.uniform() < 0.5 ? 0 : 1;
      bool ok = true;
      for (const auto& prev : templates) {
        Eigen::Index dist = 0;
        for (std::size_t i = 0; i < t.size(); ++i) dist += (t[i] != prev[i]);
        if (static_cast<double>(dist) < min_hamming) {
          ok = false;
          break;
        }
      }
      if (ok) {
        templates.push_back(std::move(t));
        break;
      }
    }
  }
  return templates;
}

Matrix sample_pattern_points(const PatternConfig& cfg,
                             const std::vector<std::vector<std::uint8_t>>& templates,
                             int per_class, Rng rng) {
  const Eigen::Index pixels = cfg.edge * cfg.edge;
  Matrix x(static_cast<Eigen::Index>(cfg.classes) * per_class, pixels);
  Eigen::Index row = 0;
  for (int k = 0; k < cfg.classes; ++k) {
    const auto& t = templates[static_cast<std::size_t>(k)];
    for (int i = 0; i < per_class; ++i, ++row) {
      for (Eigen::Index j = 0; j < pixels; ++j) {
        const double v = static_cast<double>(t[static_cast<std::size_t>(j)]) +
                         rng.normal(0.0, cfg.noise_sigma);
        x(row, j) = std::clamp(v, 0.0, 1.0);
      }
    }
  }
  return x;
}

void validate_pattern_config(const PatternConfig& cfg) {
  if (cfg.classes < 2) throw ConfigError("patterns need at least 2 classes");
  if (cfg.edge < 4) throw ConfigError("pattern edge must be at least 4");
  if (cfg.per_class < 1) throw ConfigError("patterns need at least 1 sample per class");
  if (cfg.noise_sigma < 0.0) throw ConfigError("pattern noise_sigma must be nonnegative");
}

}  // namespace

LabeledDataset make_blobs(const BlobConfig& cfg) {
  validate_blob_config(cfg);
  const auto centers = blob_centers(cfg);
  LabeledDataset data;
  data.features = sample_blob_points(cfg, centers, cfg.per_class, Rng(cfg.seed).child("points"));
  data.labels = block_labels(cfg.classes, cfg.per_class);
  data.class_count = cfg.classes;
  ColumnScaler(data.features).apply(data.features);
  return data;
}

std::pair<LabeledDataset, LabeledDataset> make_blob_pair(const BlobConfig& cfg,
                                                         int test_per_class) {
  validate_blob_config(cfg);
  if (test_per_class < 1) throw ConfigError("test_per_class must be at least 1");
  const auto centers = blob_centers(cfg);
  LabeledDataset train;
  train.features = sample_blob_points(cfg, centers, cfg.per_class, Rng(cfg.seed).child("points"));
  train.labels = block_labels(cfg.classes, cfg.per_class);
  train.class_count = cfg.classes;
  LabeledDataset test;
  test.features =
      sample_blob_points(cfg, centers, test_per_class, Rng(cfg.seed).child("test-points"));
  test.labels = block_labels(cfg.classes, test_per_class);
  test.class_count = cfg.classes;
  const ColumnScaler scaler(train.features);
  scaler.apply(train.features);
  scaler.apply(test.features);
  return {std::move(train), std::move(test)};
}

LabeledDataset make_patterns(const PatternConfig& cfg) {
  validate_pattern_config(cfg);
  const auto templates = pattern_templates(cfg);
  LabeledDataset data;
  data.features =
      sample_pattern_points(cfg, templates, cfg.per_class, Rng(cfg.seed).child("points"));
  data.labels = block_labels(cfg.classes, cfg.per_class);
  data.class_count = cfg.classes;
  data.image_shape = {{cfg.edge, cfg.edge, 1}};
  return data;
}

std::pair<LabeledDataset, LabeledDataset> make_pattern_pair(const PatternConfig& cfg,
                                                            int test_per_class) {
  validate_pattern_config(cfg);
  if (test_per_class < 1) throw ConfigError("test_per_class must be at least 1");
  const auto templates = pattern_templates(cfg);
  LabeledDataset train = make_patterns(cfg);
  LabeledDataset test;
  test.features =
      sample_pattern_points(cfg, templates, test_per_class, Rng(cfg.seed).child("test-points"));
  test.labels = block_labels(cfg.classes, test_per_class);
  test.class_count = cfg.classes;
  test.image_shape = train.image_shape;
  return {std::move(train), std::move(test)};
}

ForgetSplit split_forget_retain(const LabeledDataset& data, const SplitSpec& spec) {
  ForgetSplit split;
  split.spec = spec;
  const Eigen::Index n = data.size();
  std::vector<bool> is_forget(static_cast<std::size_t>(n), false);

  if (spec.kind == SplitSpec::Kind::ClassWise) {
    if (spec.target_class < 0 || spec.target_class >= data.class_count) {
      throw InputError("class-wise split: class " + std::to_string(spec.target_class) +
                       " outside dataset range");
    }
    bool found = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (data.labels[static_cast<std::size_t>(i)] == spec.target_class) {
        is_forget[static_cast<std::size_t>(i)] = true;
        found = true;
      }
    }
    if (!found) {
      throw InputError("class-wise split: class " + std::to_string(spec.target_class) +
                       " absent from dataset");
    }
  } else {
    if (spec.ratio <= 0.0 || spec.ratio >= 1.0) {
      throw ConfigError("random split ratio must lie in (0, 1)");
    }
    std::vector<Eigen::Index> pool;
    if (spec.restrict_classes.empty()) {
      pool.resize(static_cast<std::size_t>(n));
      std::iota(pool.begin(), pool.end(), 0);
    } else {
      for (Eigen::Index i = 0; i < n; ++i) {
        const int y = data.labels[static_cast<std::size_t>(i)];
        if (std::find(spec.restrict_classes.begin(), spec.restrict_classes.end(), y) !=
            spec.restrict_classes.end()) {
          pool.push_back(i);
        }
      }
      if (pool.empty()) throw InputError("random split: restricted classes absent from dataset");
    }
    const auto count = static_cast<std::size_t>(
        std::llround(spec.ratio * static_cast<double>(pool.size())));
    if (count == 0 || count >= pool.size()) {
      throw ConfigError("random split ratio leaves an empty forget or retain side");
    }
    Rng rng = Rng(spec.seed).child("split");
    rng.shuffle(pool);
    for (std::size_t i = 0; i < count; ++i) is_forget[static_cast<std::size_t>(pool[i])] = true;
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    (is_forget[static_cast<std::size_t>(i)] ? split.forget_indices : split.retain_indices)
        .push_back(i);
  }
  if (split.retain_indices.empty()) throw InputError("split leaves the retain set empty");
  return split;
}

Matrix take_rows(const Matrix& x, const std::vector<Eigen::Index>& idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    out.row(i) = x.row(idx[static_cast<std::size_t>(i)]);
  }
  return out;
}

Labels take_labels(const Labels& y, const std::vector<Eigen::Index>& idx) {
  Labels out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = y[static_cast<std::size_t>(idx[i])];
  return out;
}

LabeledDataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open CSV file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty CSV file: " + path);

  Eigen::Index dim = -1;
  std::vector<double> values;
  Labels labels;
  int max_label = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError("CSV parse failure in " + path + ": '" + cell + "'");
      }
    }
    if (row.size() < 2) throw IoError("CSV row with fewer than 2 columns in " + path);
    if (dim < 0) dim = static_cast<Eigen::Index>(row.size()) - 1;
    if (static_cast<Eigen::Index>(row.size()) - 1 != dim) {
      throw IoError("CSV rows have inconsistent widths in " + path);
    }
    const int label = static_cast<int>(std::llround(row[0]));
    if (label < 0) throw IoError("CSV negative label in " + path);
    labels.push_back(label);
    max_label = std::max(max_label, label);
    values.insert(values.end(), row.begin() + 1, row.end());
  }
  if (labels.empty()) throw IoError("CSV file has no data rows: " + path);

  LabeledDataset data;
  data.features.resize(static_cast<Eigen::Index>(labels.size()), dim);
  for (Eigen::Index i = 0; i < data.features.rows(); ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      data.features(i, j) = values[static_cast<std::size_t>(i * dim + j)];
    }
  }
  data.labels = std::move(labels);
  data.class_count = max_label + 1;
  return data;
}

void save_csv(const LabeledDataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write CSV file: " + path);
  out << "label";
  for (Eigen::Index j = 0; j < data.dim(); ++j) out << ",f" << j;
  out << "\n";
  char buf[64];
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    out << data.labels[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < data.dim(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", data.features(i, j));
      out << ',' << buf;
    }
    out << "\n";
  }
  if (!out) throw IoError("write failure on CSV file: " + path);
}

void save_split(const ForgetSplit& split, const std::string& path) {
  json spec;
  if (split.spec.kind == SplitSpec::Kind::ClassWise) {
    spec["kind"] = "class";
    spec["target_class"] = split.spec.target_class;
  } else {
    spec["kind"] = "random";
    spec["ratio"] = split.spec.ratio;
    if (!split.spec.restrict_classes.empty()) spec["classes"] = split.spec.restrict_classes;
  }
  json doc;
  doc["spec"] = spec;
  doc["seed"] = split.spec.seed;
  doc["forget_indices"] = split.forget_indices;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write split file: " + path);
  out << doc.dump(2) << "\n";
}

ForgetSplit load_split(const std::string& path, Eigen::Index total_rows) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open split file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw IoError("split file parse failure: " + std::string(e.what()));
  }
  ForgetSplit split;
  try {
    const json& spec = doc.at("spec");
    const std::string kind = spec.at("kind").get<std::string>();
    if (kind == "class") {
      split.spec.kind = SplitSpec::Kind::ClassWise;
      split.spec.target_class = spec.at("target_class").get<int>();
    } else if (kind == "random") {
      split.spec.kind = SplitSpec::Kind::Random;
      split.spec.ratio = spec.at("ratio").get<double>();
      if (spec.contains("classes")) {
        split.spec.restrict_classes = spec.at("classes").get<std::vector<int>>();
      }
    } else {
      throw IoError("split file: unknown spec kind '" + kind + "'");
    }
    split.spec.seed = doc.at("seed").get<std::uint64_t>();
    split.forget_indices = doc.at("forget_indices").get<std::vector<Eigen::Index>>();
  } catch (const json::exception& e) {
    throw IoError("split file schema failure: " + std::string(e.what()));
  }
  std::vector<bool> is_forget(static_cast<std::size_t>(total_rows), false);
  for (Eigen::Index i : split.forget_indices) {
    if (i < 0 || i >= total_rows) throw IoError("split file index out of range");
    is_forget[static_cast<std::size_t>(i)] = true;
  }
  for (Eigen::Index i = 0; i < total_rows; ++i) {
    if (!is_forget[static_cast<std::size_t>(i)]) split.retain_indices.push_back(i);
  }
  return split;
}

}  // namespace unlearn
