#pragma once

#include <cstdint>

#include "unlearn/data.hpp"
#include "unlearn/nn.hpp"

namespace unlearn {

// Budget for the approximate methods (fine-tune, random-label, ascent).
struct UnlearnMethodConfig {
  int epochs = 10;
  double learning_rate = 0.05;
  double momentum = 0.9;
  int batch_size = 32;
  std::uint64_t seed = 0;
};

// Exact unlearning: fresh training on the retain rows only, same pipeline as
// the original model.
ClassifierModel retrain(const LabeledDataset& data, const ForgetSplit& split,
                        const std::vector<Eigen::Index>& hidden_dims, const TrainConfig& cfg);

// Continue SGD on the retain rows, inducing forgetting of the rest.
ClassifierModel finetune(const ClassifierModel& origin, const LabeledDataset& data,
                         const ForgetSplit& split, const UnlearnMethodConfig& cfg);

// Assign each forget sample a seeded incorrect label, then fine-tune on the
// relabeled forget rows together with the retain rows.
ClassifierModel random_label(const ClassifierModel& origin, const LabeledDataset& data,
                             const ForgetSplit& split, const UnlearnMethodConfig& cfg);

// SGD on the negated cross-entropy over the forget rows.
ClassifierModel gradient_ascent(const ClassifierModel& origin, const LabeledDataset& data,
                                const ForgetSplit& split, const UnlearnMethodConfig& cfg);

// The random relabeling used by random_label: a uniform draw over the K-1
// incorrect classes per forget row.
Labels relabel_forget(const Labels& labels, const std::vector<Eigen::Index>& forget_indices,
                      int class_count, std::uint64_t seed);

}  // namespace unlearn
