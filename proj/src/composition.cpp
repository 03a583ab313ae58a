#include "unlearn/composition.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "unlearn/error.hpp"
#include "unlearn/io.hpp"
#include "unlearn/rng.hpp"

namespace unlearn {

namespace {

void check_bank(const ClassVectorBank& bank, const ClassifierModel& model) {
  if (bank.vectors.empty()) throw InputError("class vector bank is empty");
  for (const ForgetVector& fv : bank.vectors) {
    if (fv.delta.size() != model.input_dim()) {
      throw ShapeError("bank vector dimension does not match the model input");
    }
  }
  if (bank.model_fingerprint != model_checksum(model)) {
    throw CompatibilityError("class vector bank fingerprint does not match the target model");
  }
}

double subset_accuracy(const ClassifierModel& model, const Matrix& x, const Labels& y,
                       const Vector& delta) {
  Matrix shifted = x;
  shifted.rowwise() += delta.transpose();
  const Labels pred = predict(model, shifted);
  Eigen::Index hits = 0;
  for (std::size_t i = 0; i < y.size(); ++i) hits += (pred[i] == y[i]);
  return 100.0 * static_cast<double>(hits) / static_cast<double>(y.size());
}

}  // namespace

ClassVectorBank build_class_bank(const ClassifierModel& model, const LabeledDataset& data,
                                 const ForgetVectorConfig& cfg) {
  ClassVectorBank bank;
  bank.model_fingerprint = model_checksum(model);
  for (int k = 0; k < data.class_count; ++k) {
    SplitSpec spec;
    spec.kind = SplitSpec::Kind::ClassWise;
    spec.target_class = k;
    spec.seed = cfg.seed;
    ForgetVectorConfig class_cfg = cfg;
    class_cfg.seed = Rng(cfg.seed).child(static_cast<std::uint64_t>(k)).next_u64();
    const ForgetSplit split = split_forget_retain(data, spec);
    bank.vectors.push_back(optimize_forget_vector(model, data, split, class_cfg).vector);
  }
  return bank;
}

ForgetVector compose(const ClassVectorBank& bank, const CompositionWeights& weights,
                     const ClassifierModel& model) {
  check_bank(bank, model);
  if (weights.w.size() != bank.vectors.size()) {
    throw ShapeError("composition weights length does not match bank size");
  }
  ForgetVector out;
  out.delta = Vector::Zero(bank.vectors.front().delta.size());
  for (std::size_t k = 0; k < weights.w.size(); ++k) {
    out.delta += weights.w[k] * bank.vectors[k].delta;
  }
  out.provenance = ForgetVector::Provenance::Composed;
  out.weights = weights.w;
  out.config = bank.vectors.front().config;
  return out;
}

WeightOptimResult optimize_weights(const ClassifierModel& model, const ClassVectorBank& bank,
                                   const LabeledDataset& data, const ForgetSplit& split,
                                   const ForgetVectorConfig& cfg) {
  check_bank(bank, model);
  if (split.forget_indices.empty()) throw InputError("optimize_weights: forget set is empty");
  if (split.retain_indices.empty() && cfg.lambda1 > 0.0) {
    throw InputError("optimize_weights: retain set empty while lambda1 > 0");
  }

  const auto K = static_cast<Eigen::Index>(bank.vectors.size());
  const Matrix forget_x = take_rows(data.features, split.forget_indices);
  const Labels forget_y = take_labels(data.labels, split.forget_indices);
  const Matrix retain_x = take_rows(data.features, split.retain_indices);
  const Labels retain_y = take_labels(data.labels, split.retain_indices);

  Vector w = Vector::Zero(K);
  Vector velocity = Vector::Zero(K);

  Rng rng(cfg.seed);
  Rng shuffle_rng = rng.child("forget-shuffle");
  Rng retain_rng = rng.child("retain-sample");

  std::vector<Eigen::Index> order(split.forget_indices.size());
  std::iota(order.begin(), order.end(), 0);

  WeightOptimResult result;
  // The data-term gradient flows through delta; the lambda2 penalty applies
  // to w itself, so the inner objective runs with its norm term disabled.
  ForgetVectorConfig inner = cfg;
  inner.lambda2 = 0.0;

  auto delta_of = [&](const Vector& coeffs) {
    Vector d = Vector::Zero(model.input_dim());
    for (Eigen::Index k = 0; k < K; ++k) d += coeffs(k) * bank.vectors[static_cast<std::size_t>(k)].delta;
    return d;
  };

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

      const Vector delta = delta_of(w);
      const Objective obj = unlearn_objective(model, delta, bf, by, br, bry, inner);
      double loss = obj.loss + cfg.lambda2 * w.squaredNorm();
      if (!std::isfinite(loss)) {
        ForgetVector last;
        last.delta = delta;
        last.provenance = ForgetVector::Provenance::Composed;
        last.weights.assign(w.data(), w.data() + w.size());
        last.config = cfg;
        throw OptimizationError(
            "weight optimization diverged at iteration " + std::to_string(iter), last,
            result.trace);
      }
      Vector grad_w(K);
      for (Eigen::Index k = 0; k < K; ++k) {
        grad_w(k) = obj.grad.dot(bank.vectors[static_cast<std::size_t>(k)].delta);
      }
      grad_w += 2.0 * cfg.lambda2 * w;

      velocity = cfg.momentum * velocity + grad_w;
      w -= lr * velocity;
      iter_loss += loss;
      ++batches;
    }

    OptimIterate it;
    it.iteration = iter;
    it.loss = iter_loss / std::max(1, batches);
    const Vector delta = delta_of(w);
    it.forget_accuracy = subset_accuracy(model, forget_x, forget_y, delta);
    it.retain_accuracy = subset_accuracy(model, retain_x, retain_y, delta);
    it.learning_rate = lr;
    result.trace.push_back(it);
    lr *= cfg.decay;
  }

  result.weights.w.assign(w.data(), w.data() + w.size());
  result.vector = compose(bank, result.weights, model);
  result.vector.config = cfg;
  return result;
}

GridSweepResult grid_sweep_2d(const ClassifierModel& model, const ClassVectorBank& bank,
                              std::pair<int, int> classes, const LabeledDataset& data,
                              const ForgetSplit& split, const GridSpec& grid,
                              double retrain_ua, double retrain_ra) {
  check_bank(bank, model);
  const int ca = classes.first, cb = classes.second;
  if (ca < 0 || cb < 0 || ca >= bank.class_count() || cb >= bank.class_count()) {
    throw InputError("grid sweep: class index outside bank range");
  }
  if (grid.step <= 0.0 || grid.hi < grid.lo) throw ConfigError("grid sweep: empty grid");
  const auto points = static_cast<Eigen::Index>(
      std::floor((grid.hi - grid.lo) / grid.step + 1e-9)) + 1;
  if (points < 1) throw ConfigError("grid sweep: empty grid");

  const Matrix forget_x = take_rows(data.features, split.forget_indices);
  const Labels forget_y = take_labels(data.labels, split.forget_indices);
  const Matrix retain_x = take_rows(data.features, split.retain_indices);
  const Labels retain_y = take_labels(data.labels, split.retain_indices);

  GridSweepResult result;
  result.axis_points = points;
  bool have_best = false;
  for (Eigen::Index ia = 0; ia < points; ++ia) {
    const double wa = grid.lo + grid.step * static_cast<double>(ia);
    for (Eigen::Index ib = 0; ib < points; ++ib) {
      const double wb = grid.lo + grid.step * static_cast<double>(ib);
      const Vector delta = wa * bank.vectors[static_cast<std::size_t>(ca)].delta +
                           wb * bank.vectors[static_cast<std::size_t>(cb)].delta;
      GridCell cell;
      cell.w_a = wa;
      cell.w_b = wb;
      const double ua = 100.0 - subset_accuracy(model, forget_x, forget_y, delta);
      const double ra = subset_accuracy(model, retain_x, retain_y, delta);
      cell.ua_gap = std::abs(ua - retrain_ua);
      cell.ra_gap = std::abs(ra - retrain_ra);
      cell.avg_gap = 0.5 * (cell.ua_gap + cell.ra_gap);
      result.cells.push_back(cell);
      if (!have_best || cell.avg_gap < result.best.avg_gap) {
        result.best = cell;
        have_best = true;
      }
    }
  }
  return result;
}

void save_grid_csv(const GridSweepResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write grid CSV: " + path);
  out << "w_a,w_b,ua_gap,ra_gap,avg_gap\n";
  char buf[160];
  for (const GridCell& c : result.cells) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f,%.6f,%.6f", c.w_a, c.w_b, c.ua_gap, c.ra_gap,
                  c.avg_gap);
    out << buf << "\n";
  }
  if (!out) throw IoError("write failure on grid CSV: " + path);
}

}  // namespace unlearn
