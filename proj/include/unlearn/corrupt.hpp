#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "unlearn/data.hpp"
#include "unlearn/nn.hpp"

namespace unlearn {

// Parameters for one evaluation-set corruption. Elastic values are
// interpreted at a 224-pixel reference edge and rescaled internally.
struct CorruptionSpec {
  enum class Kind { Gaussian, Elastic };
  Kind kind = Kind::Gaussian;
  double sigma = 0.0;       // Gaussian: per-entry noise std in feature units
  double intensity = 0.0;   // Elastic
  double smoothing = 0.0;   // Elastic
  double offset = 0.0;      // Elastic
  std::uint64_t seed = 0;
};

inline CorruptionSpec gn1_spec(std::uint64_t seed) { return {CorruptionSpec::Kind::Gaussian, 0.08, 0, 0, 0, seed}; }
inline CorruptionSpec gn2_spec(std::uint64_t seed) { return {CorruptionSpec::Kind::Gaussian, 0.2, 0, 0, 0, seed}; }
inline CorruptionSpec et1_spec(std::uint64_t seed) { return {CorruptionSpec::Kind::Elastic, 0, 488.0, 170.8, 24.4, seed}; }
inline CorruptionSpec et2_spec(std::uint64_t seed) { return {CorruptionSpec::Kind::Elastic, 0, 488.0, 19.52, 48.8, seed}; }

struct PgdConfig {
  double epsilon = 8.0 / 255.0;
  int steps = 7;
  double step_size = 0.0;  // <= 0 selects the 2.5 * epsilon / steps schedule
  std::uint64_t seed = 0;
};

// out = clip(x + N(0, sigma^2)); clipping to [0,1] only when clip01 is set.
// Row i draws from a stream derived from (seed, i), so per-sample results do
// not depend on batch composition order.
Matrix gaussian_corrupt(const Matrix& x, double sigma, std::uint64_t seed, bool clip01);

// Smoothed random displacement field plus a corner-jitter warp, bilinear
// resampling with edge clamping. Requires image-shaped rows.
Matrix elastic_transform(const Matrix& x, const std::array<Eigen::Index, 3>& image_shape,
                         double intensity, double smoothing, double offset, std::uint64_t seed);

// Dispatch on spec.kind; clipping and image shape taken from the dataset.
Matrix corrupt(const LabeledDataset& data, const Matrix& x, const CorruptionSpec& spec);

// K-step l-infinity PGD on softmax cross-entropy, starting at x:
//   x_{t+1} = project_{||.-x||_inf <= eps}(x_t + alpha * sign(grad_x CE)).
Matrix pgd_attack(const ClassifierModel& model, const Matrix& x, const Labels& labels,
                  const PgdConfig& cfg, bool clip01);

}  // namespace unlearn
