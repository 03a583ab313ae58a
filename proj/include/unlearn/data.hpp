#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "unlearn/nn.hpp"

namespace unlearn {

struct LabeledDataset {
  Matrix features;
  Labels labels;
  int class_count = 0;
  // Present for image-like data: (height, width, channels). Pixel values
  // live in [0, 1] and perturbation generators clip to that range.
  std::optional<std::array<Eigen::Index, 3>> image_shape;

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }
  bool image_like() const { return image_shape.has_value(); }
};

struct SplitSpec {
  enum class Kind { ClassWise, Random };
  Kind kind = Kind::ClassWise;
  int target_class = 0;             // ClassWise
  double ratio = 0.1;               // Random
  std::vector<int> restrict_classes;  // Random: optional class filter
  std::uint64_t seed = 0;
};

struct ForgetSplit {
  SplitSpec spec;
  std::vector<Eigen::Index> forget_indices;
  std::vector<Eigen::Index> retain_indices;
};

struct BlobConfig {
  int classes = 5;
  Eigen::Index dim = 16;
  int per_class = 200;
  double center_scale = 3.0;
  double sigma = 0.3;
  std::uint64_t seed = 0;
};

struct PatternConfig {
  int classes = 10;
  Eigen::Index edge = 16;
  int per_class = 100;
  double noise_sigma = 0.1;
  std::uint64_t seed = 0;
};

// Isotropic Gaussian clusters around centers drawn once from a seeded sphere,
// affinely rescaled into [0, 1] per feature. Not image-like (no clipping).
LabeledDataset make_blobs(const BlobConfig& cfg);

// Train/test pair sharing the same centers and the train-fit rescaling.
std::pair<LabeledDataset, LabeledDataset> make_blob_pair(const BlobConfig& cfg, int test_per_class);

// Per-class seeded binary templates on an edge x edge grid plus Gaussian
// pixel noise, clipped to [0, 1]. Templates are rejection-sampled until all
// pairwise Hamming distances reach 0.2 * edge^2.
LabeledDataset make_patterns(const PatternConfig& cfg);

std::pair<LabeledDataset, LabeledDataset> make_pattern_pair(const PatternConfig& cfg,
                                                            int test_per_class);

ForgetSplit split_forget_retain(const LabeledDataset& data, const SplitSpec& spec);

Matrix take_rows(const Matrix& x, const std::vector<Eigen::Index>& idx);
Labels take_labels(const Labels& y, const std::vector<Eigen::Index>& idx);

// CSV format: header "label,f0,...,f{d-1}", one sample per row.
LabeledDataset load_csv(const std::string& path);
void save_csv(const LabeledDataset& data, const std::string& path);

// Split file: JSON {spec, seed, forget_indices}; retain side is rebuilt as
// the complement over [0, total_rows).
void save_split(const ForgetSplit& split, const std::string& path);
ForgetSplit load_split(const std::string& path, Eigen::Index total_rows);

}  // namespace unlearn
