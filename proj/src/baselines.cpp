#include "unlearn/baselines.hpp"

#include "unlearn/error.hpp"
#include "unlearn/rng.hpp"

namespace unlearn {

namespace {

TrainConfig as_train_config(const UnlearnMethodConfig& cfg) {
  TrainConfig t;
  t.epochs = cfg.epochs;
  t.learning_rate = cfg.learning_rate;
  t.momentum = cfg.momentum;
  t.batch_size = cfg.batch_size;
  t.weight_decay = 0.0;
  t.seed = cfg.seed;
  return t;
}

}  // namespace

ClassifierModel retrain(const LabeledDataset& data, const ForgetSplit& split,
                        const std::vector<Eigen::Index>& hidden_dims, const TrainConfig& cfg) {
  if (split.retain_indices.empty()) throw InputError("retrain: retain set is empty");
  const Matrix x = take_rows(data.features, split.retain_indices);
  const Labels y = take_labels(data.labels, split.retain_indices);
  return train_classifier(x, y, data.class_count, hidden_dims, cfg);
}

ClassifierModel finetune(const ClassifierModel& origin, const LabeledDataset& data,
                         const ForgetSplit& split, const UnlearnMethodConfig& cfg) {
  if (split.retain_indices.empty()) throw InputError("finetune: retain set is empty");
  ClassifierModel model = origin;
  if (cfg.epochs == 0) return model;
  const Matrix x = take_rows(data.features, split.retain_indices);
  const Labels y = take_labels(data.labels, split.retain_indices);
  train_sgd_inplace(model, x, y, as_train_config(cfg));
  return model;
}

Labels relabel_forget(const Labels& labels, const std::vector<Eigen::Index>& forget_indices,
                      int class_count, std::uint64_t seed) {
  if (class_count < 2) throw ConfigError("relabeling needs at least 2 classes");
  Rng rng = Rng(seed).child("relabel");
  Labels out;
  out.reserve(forget_indices.size());
  for (Eigen::Index idx : forget_indices) {
    const int original = labels[static_cast<std::size_t>(idx)];
    // Draw over K-1 incorrect classes; skip past the original label.
    int draw = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(class_count - 1)));
    if (draw >= original) ++draw;
    out.push_back(draw);
  }
  return out;
}

ClassifierModel random_label(const ClassifierModel& origin, const LabeledDataset& data,
                             const ForgetSplit& split, const UnlearnMethodConfig& cfg) {
  if (split.forget_indices.empty()) throw InputError("random_label: forget set is empty");
  ClassifierModel model = origin;
  if (cfg.epochs == 0) return model;

  const Labels relabeled = relabel_forget(data.labels, split.forget_indices, data.class_count,
                                          cfg.seed);
  const auto nf = static_cast<Eigen::Index>(split.forget_indices.size());
  const auto nr = static_cast<Eigen::Index>(split.retain_indices.size());
  Matrix x(nf + nr, data.dim());
  Labels y(static_cast<std::size_t>(nf + nr));
  x.topRows(nf) = take_rows(data.features, split.forget_indices);
  x.bottomRows(nr) = take_rows(data.features, split.retain_indices);
  for (Eigen::Index i = 0; i < nf; ++i) y[static_cast<std::size_t>(i)] = relabeled[static_cast<std::size_t>(i)];
  const Labels ry = take_labels(data.labels, split.retain_indices);
  for (Eigen::Index i = 0; i < nr; ++i) y[static_cast<std::size_t>(nf + i)] = ry[static_cast<std::size_t>(i)];

  train_sgd_inplace(model, x, y, as_train_config(cfg));
  return model;
}

ClassifierModel gradient_ascent(const ClassifierModel& origin, const LabeledDataset& data,
                                const ForgetSplit& split, const UnlearnMethodConfig& cfg) {
  if (split.forget_indices.empty()) throw InputError("gradient_ascent: forget set is empty");
  ClassifierModel model = origin;
  if (cfg.epochs == 0) return model;
  const Matrix x = take_rows(data.features, split.forget_indices);
  const Labels y = take_labels(data.labels, split.forget_indices);
  train_sgd_inplace(model, x, y, as_train_config(cfg), /*loss_sign=*/-1.0);
  return model;
}

}  // namespace unlearn
