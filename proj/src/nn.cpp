#include "unlearn/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "unlearn/error.hpp"
#include "unlearn/rng.hpp"

namespace unlearn {

namespace {

void check_labels(const Labels& labels, Eigen::Index rows, Eigen::Index class_count) {
  if (static_cast<Eigen::Index>(labels.size()) != rows) {
    throw ShapeError("label count " + std::to_string(labels.size()) + " does not match row count " +
                     std::to_string(rows));
  }
  for (int y : labels) {
    if (y < 0 || y >= class_count) {
      throw InputError("label " + std::to_string(y) + " outside [0, " +
                       std::to_string(class_count) + ")");
    }
  }
}

struct ForwardTrace {
  // activations[0] = input, activations[i] = post-ReLU output of layer i-1,
  // logits = pre-softmax output of the last layer.
  std::vector<Matrix> activations;
  std::vector<Matrix> preacts;
  Matrix logits;
};

ForwardTrace forward_trace(const ClassifierModel& model, const Matrix& x) {
  if (x.cols() != model.input_dim()) {
    throw ShapeError("input has " + std::to_string(x.cols()) + " features, model expects " +
                     std::to_string(model.input_dim()));
  }
  ForwardTrace t;
  t.activations.push_back(x);
  const std::size_t layers = model.weights.size();
  for (std::size_t i = 0; i < layers; ++i) {
    Matrix z = t.activations.back() * model.weights[i].transpose();
    z.rowwise() += model.biases[i].transpose();
    if (i + 1 == layers) {
      t.logits = std::move(z);
    } else {
      t.preacts.push_back(z);
      t.activations.push_back(z.cwiseMax(0.0));
    }
  }
  return t;
}

// d(mean CE)/d(logits).
Matrix logit_grad_ce(const Matrix& logits, const Labels& labels) {
  Matrix g = softmax(logits);
  const double inv_n = 1.0 / static_cast<double>(logits.rows());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    g(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
  }
  return g * inv_n;
}

// d(mean margin)/d(logits). Rows clamped at -tau contribute zero; the
// runner-up class resolves ties to the lowest index.
Matrix logit_grad_margin(const Matrix& logits, const Labels& labels, double tau) {
  Matrix g = Matrix::Zero(logits.rows(), logits.cols());
  const double inv_n = 1.0 / static_cast<double>(logits.rows());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    int runner = -1;
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < logits.cols(); ++k) {
      if (static_cast<int>(k) == y) continue;
      if (logits(i, k) > best) {
        best = logits(i, k);
        runner = static_cast<int>(k);
      }
    }
    const double margin = logits(i, y) - best;
    if (margin > -tau) {
      g(i, y) += inv_n;
      g(i, runner) -= inv_n;
    }
  }
  return g;
}

void validate_spec(const LossSpec& spec, Eigen::Index rows, Eigen::Index class_count) {
  switch (spec.kind) {
    case LossSpec::Kind::CrossEntropy:
      break;
    case LossSpec::Kind::Margin:
    case LossSpec::Kind::Composite:
      if (class_count < 2) throw ConfigError("margin loss needs at least 2 classes");
      if (spec.tau < 0.0) throw ConfigError("margin threshold tau must be nonnegative");
      break;
    default:
      throw ConfigError("unknown loss kind");
  }
  if (spec.kind == LossSpec::Kind::Composite) {
    if (spec.forget_rows < 1 || spec.forget_rows > rows) {
      throw ConfigError("composite loss: forget_rows outside [1, rows]");
    }
    if (spec.lambda1 > 0.0 && spec.forget_rows == rows) {
      throw InputError("composite loss: retain part empty while lambda1 > 0");
    }
  }
  check_labels(spec.labels, rows, class_count);
}

// Backpropagate a logit-space gradient to the input.
Matrix backprop_to_input(const ClassifierModel& model, const ForwardTrace& t,
                         const Matrix& logit_grad) {
  Matrix delta = logit_grad;
  for (std::size_t i = model.weights.size(); i-- > 0;) {
    Matrix da = delta * model.weights[i];
    if (i == 0) return da;
    delta = da.cwiseProduct((t.preacts[i - 1].array() > 0.0).cast<double>().matrix());
  }
  return delta;  // unreachable: models always have >= 1 layer
}

struct ParamGrads {
  std::vector<Matrix> dw;
  std::vector<Vector> db;
};

ParamGrads backprop_to_params(const ClassifierModel& model, const ForwardTrace& t,
                              const Matrix& logit_grad) {
  ParamGrads g;
  g.dw.resize(model.weights.size());
  g.db.resize(model.weights.size());
  Matrix delta = logit_grad;
  for (std::size_t i = model.weights.size(); i-- > 0;) {
    g.dw[i] = delta.transpose() * t.activations[i];
    g.db[i] = delta.colwise().sum().transpose();
    if (i == 0) break;
    Matrix da = delta * model.weights[i];
    delta = da.cwiseProduct((t.preacts[i - 1].array() > 0.0).cast<double>().matrix());
  }
  return g;
}

Matrix take_rows(const Matrix& x, const std::vector<Eigen::Index>& idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (Eigen::Index i = 0; i < out.rows(); ++i) out.row(i) = x.row(idx[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace

ClassifierModel init_model(const std::vector<Eigen::Index>& layer_dims, std::uint64_t seed) {
  if (layer_dims.size() < 2) throw ConfigError("model needs at least input and output dims");
  for (Eigen::Index d : layer_dims) {
    if (d < 1) throw ConfigError("layer widths must be positive");
  }
  ClassifierModel m;
  m.layer_dims = layer_dims;
  m.seed = seed;
  Rng rng = Rng(seed).child("init");
  for (std::size_t i = 0; i + 1 < layer_dims.size(); ++i) {
    const Eigen::Index fan_in = layer_dims[i];
    const Eigen::Index fan_out = layer_dims[i + 1];
    const double scale = std::sqrt(2.0 / static_cast<double>(fan_in));
    Matrix w(fan_out, fan_in);
    for (Eigen::Index r = 0; r < fan_out; ++r) {
      for (Eigen::Index c = 0; c < fan_in; ++c) w(r, c) = rng.normal(0.0, scale);
    }
    m.weights.push_back(std::move(w));
    m.biases.push_back(Vector::Zero(fan_out));
  }
  return m;
}

Matrix forward_logits(const ClassifierModel& model, const Matrix& x) {
  return forward_trace(model, x).logits;
}

Matrix softmax(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    Eigen::ArrayXd e = (logits.row(i).array() - m).exp();
    p.row(i) = (e / e.sum()).matrix();
  }
  return p;
}

double softmax_ce(const Matrix& logits, const Labels& labels) {
  check_labels(labels, logits.rows(), logits.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    const double lse = m + std::log((logits.row(i).array() - m).exp().sum());
    total += lse - logits(i, labels[static_cast<std::size_t>(i)]);
  }
  return total / static_cast<double>(logits.rows());
}

double margin_loss_from_logits(const Matrix& logits, const Labels& labels, double tau) {
  if (logits.cols() < 2) throw ConfigError("margin loss needs at least 2 classes");
  if (tau < 0.0) throw ConfigError("margin threshold tau must be nonnegative");
  check_labels(labels, logits.rows(), logits.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < logits.cols(); ++k) {
      if (static_cast<int>(k) != y) best = std::max(best, logits(i, k));
    }
    total += std::max(logits(i, y) - best, -tau);
  }
  return total / static_cast<double>(logits.rows());
}

double loss_value(const ClassifierModel& model, const Matrix& x, const LossSpec& spec) {
  validate_spec(spec, x.rows(), model.class_count());
  const Matrix logits = forward_logits(model, x);
  switch (spec.kind) {
    case LossSpec::Kind::CrossEntropy:
      return softmax_ce(logits, spec.labels);
    case LossSpec::Kind::Margin:
      return margin_loss_from_logits(logits, spec.labels, spec.tau);
    case LossSpec::Kind::Composite: {
      const Eigen::Index nf = spec.forget_rows;
      const Eigen::Index nr = x.rows() - nf;
      Labels fy(spec.labels.begin(), spec.labels.begin() + nf);
      double loss = margin_loss_from_logits(logits.topRows(nf), fy, spec.tau);
      if (nr > 0 && spec.lambda1 != 0.0) {
        Labels ry(spec.labels.begin() + nf, spec.labels.end());
        loss += spec.lambda1 * softmax_ce(logits.bottomRows(nr), ry);
      }
      return loss;
    }
  }
  throw ConfigError("unknown loss kind");
}

Matrix input_gradient(const ClassifierModel& model, const Matrix& x, const LossSpec& spec) {
  validate_spec(spec, x.rows(), model.class_count());
  const ForwardTrace t = forward_trace(model, x);
  Matrix lg;
  switch (spec.kind) {
    case LossSpec::Kind::CrossEntropy:
      lg = logit_grad_ce(t.logits, spec.labels);
      break;
    case LossSpec::Kind::Margin:
      lg = logit_grad_margin(t.logits, spec.labels, spec.tau);
      break;
    case LossSpec::Kind::Composite: {
      const Eigen::Index nf = spec.forget_rows;
      const Eigen::Index nr = x.rows() - nf;
      lg = Matrix::Zero(x.rows(), model.class_count());
      Labels fy(spec.labels.begin(), spec.labels.begin() + nf);
      lg.topRows(nf) = logit_grad_margin(t.logits.topRows(nf), fy, spec.tau);
      if (nr > 0 && spec.lambda1 != 0.0) {
        Labels ry(spec.labels.begin() + nf, spec.labels.end());
        lg.bottomRows(nr) = spec.lambda1 * logit_grad_ce(t.logits.bottomRows(nr), ry);
      }
      break;
    }
  }
  return backprop_to_input(model, t, lg);
}

void train_sgd_inplace(ClassifierModel& model, const Matrix& x, const Labels& y,
                       const TrainConfig& cfg, double loss_sign) {
  if (x.rows() == 0) throw InputError("training data is empty");
  check_labels(y, x.rows(), model.class_count());
  if (cfg.learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
  if (cfg.batch_size < 1) throw ConfigError("batch_size must be at least 1");

  std::vector<Matrix> vel_w;
  std::vector<Vector> vel_b;
  for (std::size_t i = 0; i < model.weights.size(); ++i) {
    vel_w.push_back(Matrix::Zero(model.weights[i].rows(), model.weights[i].cols()));
    vel_b.push_back(Vector::Zero(model.biases[i].size()));
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(x.rows()));
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng = Rng(cfg.seed).child("shuffle");

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      std::vector<Eigen::Index> batch(order.begin() + start, order.begin() + stop);
      Matrix bx = take_rows(x, batch);
      Labels by(batch.size());
      for (std::size_t i = 0; i < batch.size(); ++i) by[i] = y[static_cast<std::size_t>(batch[i])];

      const ForwardTrace t = forward_trace(model, bx);
      const ParamGrads g = backprop_to_params(model, t, logit_grad_ce(t.logits, by));
      for (std::size_t i = 0; i < model.weights.size(); ++i) {
        vel_w[i] = cfg.momentum * vel_w[i] +
                   loss_sign * g.dw[i] + cfg.weight_decay * model.weights[i];
        vel_b[i] = cfg.momentum * vel_b[i] + loss_sign * g.db[i];
        model.weights[i] -= cfg.learning_rate * vel_w[i];
        model.biases[i] -= cfg.learning_rate * vel_b[i];
      }
    }
  }
}

ClassifierModel train_classifier(const Matrix& x, const Labels& y, Eigen::Index class_count,
                                 const std::vector<Eigen::Index>& hidden_dims,
                                 const TrainConfig& cfg) {
  if (x.rows() == 0) throw InputError("training data is empty");
  std::vector<Eigen::Index> dims;
  dims.push_back(x.cols());
  dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
  dims.push_back(class_count);
  ClassifierModel model = init_model(dims, cfg.seed);
  train_sgd_inplace(model, x, y, cfg);
  return model;
}

Labels predict(const ClassifierModel& model, const Matrix& x) {
  const Matrix logits = forward_logits(model, x);
  Labels out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    int arg = 0;
    double best = logits(i, 0);
    for (Eigen::Index k = 1; k < logits.cols(); ++k) {
      if (logits(i, k) > best) {
        best = logits(i, k);
        arg = static_cast<int>(k);
      }
    }
    out[static_cast<std::size_t>(i)] = arg;
  }
  return out;
}

long long param_count(const ClassifierModel& model) {
  long long total = 0;
  for (std::size_t i = 0; i + 1 < model.layer_dims.size(); ++i) {
    total += static_cast<long long>(model.layer_dims[i + 1]) * (model.layer_dims[i] + 1);
  }
  return total;
}

}  // namespace unlearn
