#pragma once

#include <cstdint>
#include <vector>

#include "unlearn/data.hpp"
#include "unlearn/error.hpp"
#include "unlearn/nn.hpp"

namespace unlearn {

struct ForgetVectorConfig {
  double tau = 1.0;      // margin threshold, >= 0
  double lambda1 = 3.0;  // retain cross-entropy weight
  double lambda2 = 1.0;  // squared-norm penalty weight
  double lr0 = 0.1;
  double momentum = 0.9;
  double decay = 0.9;  // per-iteration multiplicative learning-rate factor
  int batch_size = 256;
  int max_iterations = 40;
  std::uint64_t seed = 0;
};

// Universal additive input perturbation. Applying it to the forget set flips
// predictions while the frozen model keeps its behavior on retained data.
struct ForgetVector {
  enum class Provenance { Direct, Composed };
  Vector delta;
  Provenance provenance = Provenance::Direct;
  std::vector<double> weights;  // composition coefficients when Composed
  ForgetVectorConfig config;
};

struct OptimIterate {
  int iteration = 0;
  double loss = 0.0;
  double forget_accuracy = 0.0;  // UA = 100 - this
  double retain_accuracy = 0.0;
  double learning_rate = 0.0;
};

struct OptimResult {
  ForgetVector vector;
  std::vector<OptimIterate> trace;
};

// Raised when the objective turns non-finite; carries the last finite state.
class OptimizationError : public NumericError {
 public:
  OptimizationError(const std::string& msg, ForgetVector last, std::vector<OptimIterate> trace)
      : NumericError(msg), last_iterate(std::move(last)), trace(std::move(trace)) {}
  ForgetVector last_iterate;
  std::vector<OptimIterate> trace;
};

// Mean margin loss on perturbed inputs (inputs are already shifted by delta).
double margin_loss(const ClassifierModel& model, const Matrix& x_perturbed, const Labels& labels,
                   double tau);

struct Objective {
  double loss = 0.0;
  Vector grad;  // d(loss)/d(delta)
};

// Full objective on one batch pair:
//   margin(forget + delta) + lambda1 * CE(retain + delta) + lambda2 * |delta|^2.
// The retain batch may be empty only when lambda1 == 0.
Objective unlearn_objective(const ClassifierModel& model, const Vector& delta,
                            const Matrix& forget_x, const Labels& forget_y,
                            const Matrix& retain_x, const Labels& retain_y,
                            const ForgetVectorConfig& cfg);

// SGD with momentum on delta against the frozen model. One iteration is one
// epoch over the forget rows with freshly sampled retain batches; the
// learning rate decays by cfg.decay each iteration.
OptimResult optimize_forget_vector(const ClassifierModel& model, const LabeledDataset& data,
                                   const ForgetSplit& split, const ForgetVectorConfig& cfg);

// out = x + delta broadcast over rows; clamps to [0, 1] when requested.
Matrix apply_perturbation(const Matrix& x, const ForgetVector& fv, bool clamp = false);

}  // namespace unlearn
