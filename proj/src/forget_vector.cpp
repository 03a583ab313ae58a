#include "unlearn/forget_vector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "unlearn/rng.hpp"

namespace unlearn {

namespace {

void validate_config(const ForgetVectorConfig& cfg) {
  if (cfg.tau < 0.0) throw ConfigError("forget vector: tau must be nonnegative");
  if (cfg.lambda1 < 0.0 || cfg.lambda2 < 0.0) {
    throw ConfigError("forget vector: lambda weights must be nonnegative");
  }
  if (cfg.decay <= 0.0 || cfg.decay > 1.0) throw ConfigError("forget vector: decay must lie in (0, 1]");
  if (cfg.max_iterations < 1) throw ConfigError("forget vector: max_iterations must be at least 1");
  if (cfg.batch_size < 1) throw ConfigError("forget vector: batch_size must be at least 1");
  if (cfg.momentum < 0.0 || cfg.momentum >= 1.0) {
    throw ConfigError("forget vector: momentum must lie in [0, 1)");
  }
}

double batch_accuracy(const ClassifierModel& model, const Matrix& x, const Labels& y) {
  const Labels pred = predict(model, x);
  Eigen::Index hits = 0;
  for (std::size_t i = 0; i < y.size(); ++i) hits += (pred[i] == y[i]);
  return 100.0 * static_cast<double>(hits) / static_cast<double>(y.size());
}

}  // namespace

double margin_loss(const ClassifierModel& model, const Matrix& x_perturbed, const Labels& labels,
                   double tau) {
  if (model.class_count() < 2) throw ConfigError("margin loss needs at least 2 classes");
  return margin_loss_from_logits(forward_logits(model, x_perturbed), labels, tau);
}

Objective unlearn_objective(const ClassifierModel& model, const Vector& delta,
                            const Matrix& forget_x, const Labels& forget_y,
                            const Matrix& retain_x, const Labels& retain_y,
                            const ForgetVectorConfig& cfg) {
  validate_config(cfg);
  if (forget_x.rows() == 0) throw InputError("unlearn objective: forget batch is empty");
  if (delta.size() != forget_x.cols()) {
    throw ShapeError("unlearn objective: delta dimension does not match inputs");
  }
  if (retain_x.rows() == 0 && cfg.lambda1 > 0.0) {
    throw InputError("unlearn objective: retain batch empty while lambda1 > 0");
  }

  Objective obj;
  obj.grad = Vector::Zero(delta.size());

  Matrix fx = forget_x;
  fx.rowwise() += delta.transpose();
  LossSpec margin_spec;
  margin_spec.kind = LossSpec::Kind::Margin;
  margin_spec.labels = forget_y;
  margin_spec.tau = cfg.tau;
  obj.loss = loss_value(model, fx, margin_spec);
  obj.grad += input_gradient(model, fx, margin_spec).colwise().sum().transpose();

  if (cfg.lambda1 > 0.0 && retain_x.rows() > 0) {
    Matrix rx = retain_x;
    rx.rowwise() += delta.transpose();
    LossSpec ce_spec;
    ce_spec.kind = LossSpec::Kind::CrossEntropy;
    ce_spec.labels = retain_y;
    obj.loss += cfg.lambda1 * loss_value(model, rx, ce_spec);
    obj.grad += cfg.lambda1 * input_gradient(model, rx, ce_spec).colwise().sum().transpose();
  }

  obj.loss += cfg.lambda2 * delta.squaredNorm();
  obj.grad += 2.0 * cfg.lambda2 * delta;
  return obj;
}

OptimResult optimize_forget_vector(const ClassifierModel& model, const LabeledDataset& data,
                                   const ForgetSplit& split, const ForgetVectorConfig& cfg) {
  validate_config(cfg);
  if (split.forget_indices.empty()) throw InputError("forget vector: forget set is empty");
  if (split.retain_indices.empty() && cfg.lambda1 > 0.0) {
    throw InputError("forget vector: retain set empty while lambda1 > 0");
  }

  const Matrix forget_x = take_rows(data.features, split.forget_indices);
  const Labels forget_y = take_labels(data.labels, split.forget_indices);
  const Matrix retain_x = take_rows(data.features, split.retain_indices);
  const Labels retain_y = take_labels(data.labels, split.retain_indices);

  OptimResult result;
  result.vector.delta = Vector::Zero(data.dim());
  result.vector.config = cfg;
  Vector velocity = Vector::Zero(data.dim());

  Rng rng(cfg.seed);
  Rng shuffle_rng = rng.child("forget-shuffle");
  Rng retain_rng = rng.child("retain-sample");

  std::vector<Eigen::Index> order(split.forget_indices.size());
  std::iota(order.begin(), order.end(), 0);

  double lr = cfg.lr0;
  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    shuffle_rng.shuffle(order);
    double iter_loss = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      std::vector<Eigen::Index> batch(order.begin() + start, order.begin() + stop);
      const Matrix bf = take_rows(forget_x, batch);
      Labels by(batch.size());
      for (std::size_t i = 0; i < batch.size(); ++i) {
        by[i] = forget_y[static_cast<std::size_t>(batch[i])];
      }

      // Paired retain batch drawn uniformly from the retain rows.
      Matrix br;
      Labels bry;
      if (cfg.lambda1 > 0.0) {
        const std::size_t want = std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size),
                                                       retain_y.size());
        br.resize(static_cast<Eigen::Index>(want), data.dim());
        bry.resize(want);
        for (std::size_t i = 0; i < want; ++i) {
          const auto pick = static_cast<Eigen::Index>(retain_rng.uniform_index(retain_y.size()));
          br.row(static_cast<Eigen::Index>(i)) = retain_x.row(pick);
          bry[i] = retain_y[static_cast<std::size_t>(pick)];
        }
      }

      const Objective obj =
          unlearn_objective(model, result.vector.delta, bf, by, br, bry, cfg);
      if (!std::isfinite(obj.loss)) {
        throw OptimizationError(
            "forget vector optimization diverged at iteration " + std::to_string(iter),
            result.vector, result.trace);
      }
      velocity = cfg.momentum * velocity + obj.grad;
      result.vector.delta -= lr * velocity;
      iter_loss += obj.loss;
      ++batches;
    }
    if (!result.vector.delta.allFinite()) {
      throw OptimizationError(
          "forget vector iterate turned non-finite at iteration " + std::to_string(iter),
          result.vector, result.trace);
    }

    OptimIterate it;
    it.iteration = iter;
    it.loss = iter_loss / std::max(1, batches);
    {
      Matrix fx = forget_x;
      fx.rowwise() += result.vector.delta.transpose();
      it.forget_accuracy = batch_accuracy(model, fx, forget_y);
      Matrix rx = retain_x;
      rx.rowwise() += result.vector.delta.transpose();
      it.retain_accuracy = batch_accuracy(model, rx, retain_y);
    }
    it.learning_rate = lr;
    result.trace.push_back(it);
    lr *= cfg.decay;
  }
  return result;
}

Matrix apply_perturbation(const Matrix& x, const ForgetVector& fv, bool clamp) {
  if (x.cols() != fv.delta.size()) {
    throw ShapeError("apply_perturbation: delta dimension does not match inputs");
  }
  Matrix out = x;
  out.rowwise() += fv.delta.transpose();
  if (clamp) out = out.cwiseMax(0.0).cwiseMin(1.0);
  return out;
}

}  // namespace unlearn
