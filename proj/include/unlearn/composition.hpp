#pragma once

#include <string>
#include <utility>
#include <vector>

#include "unlearn/data.hpp"
#include "unlearn/forget_vector.hpp"
#include "unlearn/nn.hpp"

namespace unlearn {

// Precomputed class-wise forget vectors, index k = class k. The fingerprint
// pins the bank to the model the vectors were optimized against.
struct ClassVectorBank {
  std::vector<ForgetVector> vectors;
  std::string model_fingerprint;

  int class_count() const { return static_cast<int>(vectors.size()); }
};

struct CompositionWeights {
  std::vector<double> w;
};

// Runs optimize_forget_vector once per class with a class-wise split.
ClassVectorBank build_class_bank(const ClassifierModel& model, const LabeledDataset& data,
                                 const ForgetVectorConfig& cfg);

// delta(w) = sum_k w_k * delta_k. Fingerprint must match the target model.
ForgetVector compose(const ClassVectorBank& bank, const CompositionWeights& weights,
                     const ClassifierModel& model);

struct WeightOptimResult {
  CompositionWeights weights;
  ForgetVector vector;
  std::vector<OptimIterate> trace;
};

// Minimizes margin(delta(w)) + lambda1 * CE(retain) + lambda2 * |w|^2 over
// the K coefficients only, via the same SGD-with-momentum loop. The
// chain-rule gradient is dL/dw_k = <dL/ddelta, delta_k> + 2 * lambda2 * w_k.
WeightOptimResult optimize_weights(const ClassifierModel& model, const ClassVectorBank& bank,
                                   const LabeledDataset& data, const ForgetSplit& split,
                                   const ForgetVectorConfig& cfg);

struct GridSpec {
  double lo = -0.2;
  double hi = 0.2;
  double step = 0.05;
};

struct GridCell {
  double w_a = 0.0;
  double w_b = 0.0;
  double ua_gap = 0.0;
  double ra_gap = 0.0;
  double avg_gap = 0.0;  // mean of |ua_gap| and |ra_gap|
};

struct GridSweepResult {
  std::vector<GridCell> cells;  // row-major over (w_a, w_b)
  Eigen::Index axis_points = 0;
  GridCell best;  // argmin of avg_gap, lexicographic (w_a, w_b) on ties
};

// Fig.-3-style sweep: combine the two class vectors delta_a, delta_b over a
// square weight grid and report UA/RA gaps against the retrain reference.
GridSweepResult grid_sweep_2d(const ClassifierModel& model, const ClassVectorBank& bank,
                              std::pair<int, int> classes, const LabeledDataset& data,
                              const ForgetSplit& split, const GridSpec& grid,
                              double retrain_ua, double retrain_ra);

void save_grid_csv(const GridSweepResult& result, const std::string& path);

}  // namespace unlearn
