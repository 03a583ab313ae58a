#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace unlearn {

// Rows are samples, columns are input features.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Labels = std::vector<int>;

struct TrainConfig {
  int epochs = 40;
  double learning_rate = 0.1;
  double momentum = 0.9;
  int batch_size = 32;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;
};

// Fully connected rectified-linear network ending in raw class logits.
// weights[i] has shape dims[i+1] x dims[i]; biases[i] has length dims[i+1].
struct ClassifierModel {
  std::vector<Eigen::Index> layer_dims;
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  std::uint64_t seed = 0;

  Eigen::Index input_dim() const { return layer_dims.front(); }
  Eigen::Index class_count() const { return layer_dims.back(); }
};

// Scalar loss selector for input-space gradients.
//   CrossEntropy: mean softmax cross-entropy over all rows.
//   Margin:       mean of max(f_y - max_{k != y} f_k, -tau) over all rows.
//   Composite:    margin over rows [0, forget_rows) plus lambda1 * cross-entropy
//                 over the remaining rows (each term mean-normalized separately).
struct LossSpec {
  enum class Kind { CrossEntropy, Margin, Composite };
  Kind kind = Kind::CrossEntropy;
  Labels labels;
  double tau = 1.0;
  double lambda1 = 0.0;
  Eigen::Index forget_rows = 0;
};

ClassifierModel init_model(const std::vector<Eigen::Index>& layer_dims, std::uint64_t seed);

Matrix forward_logits(const ClassifierModel& model, const Matrix& x);

// Row-wise softmax with max-shift stabilization; rows sum to 1.
Matrix softmax(const Matrix& logits);

double softmax_ce(const Matrix& logits, const Labels& labels);

// Mean margin loss max(f_y - max_{k != y} f_k, -tau); tau >= 0.
double margin_loss_from_logits(const Matrix& logits, const Labels& labels, double tau);

double loss_value(const ClassifierModel& model, const Matrix& x, const LossSpec& spec);

// Analytic d(loss)/dx, same shape as x.
Matrix input_gradient(const ClassifierModel& model, const Matrix& x, const LossSpec& spec);

// Mini-batch SGD with momentum on softmax cross-entropy. Reproducible for
// a fixed cfg.seed; epochs = 0 returns the seeded initialization unchanged.
ClassifierModel train_classifier(const Matrix& x, const Labels& y, Eigen::Index class_count,
                                 const std::vector<Eigen::Index>& hidden_dims,
                                 const TrainConfig& cfg);

// Continue SGD from an existing model. loss_sign = -1 ascends the loss.
void train_sgd_inplace(ClassifierModel& model, const Matrix& x, const Labels& y,
                       const TrainConfig& cfg, double loss_sign = 1.0);

// Argmax over logits; ties resolve to the lowest class index.
Labels predict(const ClassifierModel& model, const Matrix& x);

long long param_count(const ClassifierModel& model);

}  // namespace unlearn
