#include "unlearn/corrupt.hpp"

#include <algorithm>
#include <cmath>

#include "unlearn/error.hpp"
#include "unlearn/rng.hpp"

namespace unlearn {

namespace {

constexpr double kReferenceEdge = 224.0;

using Field = Eigen::MatrixXd;  // h x w scalar field

// Normalized 1-D Gaussian kernel; degenerates to identity for tiny stddev.
std::vector<double> gaussian_kernel(double stddev) {
  if (stddev < 1e-9) return {1.0};
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * stddev)));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * (i / stddev) * (i / stddev));
    k[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

// Separable convolution with replicate padding. A normalized kernel keeps
// the output within the input's value range.
Field blur(const Field& f, const std::vector<double>& kernel) {
  const int radius = static_cast<int>(kernel.size() / 2);
  const Eigen::Index h = f.rows(), w = f.cols();
  Field tmp(h, w), out(h, w);
  for (Eigen::Index r = 0; r < h; ++r) {
    for (Eigen::Index c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int t = -radius; t <= radius; ++t) {
        const Eigen::Index cc = std::clamp<Eigen::Index>(c + t, 0, w - 1);
        acc += kernel[static_cast<std::size_t>(t + radius)] * f(r, cc);
      }
      tmp(r, c) = acc;
    }
  }
  for (Eigen::Index r = 0; r < h; ++r) {
    for (Eigen::Index c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int t = -radius; t <= radius; ++t) {
        const Eigen::Index rr = std::clamp<Eigen::Index>(r + t, 0, h - 1);
        acc += kernel[static_cast<std::size_t>(t + radius)] * tmp(rr, c);
      }
      out(r, c) = acc;
    }
  }
  return out;
}

double bilinear(const Field& img, double r, double c) {
  const Eigen::Index h = img.rows(), w = img.cols();
  r = std::clamp(r, 0.0, static_cast<double>(h - 1));
  c = std::clamp(c, 0.0, static_cast<double>(w - 1));
  const auto r0 = static_cast<Eigen::Index>(std::floor(r));
  const auto c0 = static_cast<Eigen::Index>(std::floor(c));
  const Eigen::Index r1 = std::min(r0 + 1, h - 1);
  const Eigen::Index c1 = std::min(c0 + 1, w - 1);
  const double fr = r - static_cast<double>(r0);
  const double fc = c - static_cast<double>(c0);
  return img(r0, c0) * (1.0 - fr) * (1.0 - fc) + img(r0, c1) * (1.0 - fr) * fc +
         img(r1, c0) * fr * (1.0 - fc) + img(r1, c1) * fr * fc;
}

}  // namespace

Matrix gaussian_corrupt(const Matrix& x, double sigma, std::uint64_t seed, bool clip01) {
  if (sigma < 0.0) throw ConfigError("gaussian corruption sigma must be nonnegative");
  Matrix out(x.rows(), x.cols());
  const Rng base = Rng(seed).child("gaussian");
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    Rng row_rng = base.child(static_cast<std::uint64_t>(i));
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      double v = x(i, j) + row_rng.normal(0.0, sigma);
      out(i, j) = clip01 ? std::clamp(v, 0.0, 1.0) : v;
    }
  }
  return out;
}

Matrix elastic_transform(const Matrix& x, const std::array<Eigen::Index, 3>& image_shape,
                         double intensity, double smoothing, double offset, std::uint64_t seed) {
  if (intensity < 0.0 || smoothing < 0.0 || offset < 0.0) {
    throw ConfigError("elastic parameters must be nonnegative");
  }
  const Eigen::Index h = image_shape[0], w = image_shape[1], ch = image_shape[2];
  if (h * w * ch != x.cols()) {
    throw ShapeError("elastic transform: image shape does not match feature width");
  }
  const double scale = static_cast<double>(std::max(h, w)) / kReferenceEdge;
  const double amplitude = intensity * scale * scale;
  const std::vector<double> kernel = gaussian_kernel(smoothing * scale);
  const double jitter = offset * scale;
  const Rng base = Rng(seed).child("elastic");

  Matrix out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    Rng rng = base.child(static_cast<std::uint64_t>(i));
    Field dr(h, w), dc(h, w);
    for (Eigen::Index r = 0; r < h; ++r) {
      for (Eigen::Index c = 0; c < w; ++c) {
        dr(r, c) = rng.uniform(-1.0, 1.0);
        dc(r, c) = rng.uniform(-1.0, 1.0);
      }
    }
    if (amplitude > 0.0) {
      dr = blur(dr, kernel);
      dc = blur(dc, kernel);
      // Cap the per-pixel euclidean magnitude at 1 so the scaled field never
      // exceeds `amplitude`; smoothing usually keeps it well below the cap.
      for (Eigen::Index r = 0; r < h; ++r) {
        for (Eigen::Index c = 0; c < w; ++c) {
          const double m = std::hypot(dr(r, c), dc(r, c));
          if (m > 1.0) {
            dr(r, c) /= m;
            dc(r, c) /= m;
          }
          dr(r, c) *= amplitude;
          dc(r, c) *= amplitude;
        }
      }
    } else {
      dr.setZero();
      dc.setZero();
    }
    // Corner-jitter warp: each corner displaces by up to `jitter` pixels per
    // axis; interior displacement interpolates bilinearly, so its magnitude
    // never exceeds the corner magnitude.
    double corner_r[4] = {0, 0, 0, 0}, corner_c[4] = {0, 0, 0, 0};
    for (int k = 0; k < 4; ++k) {
      corner_r[k] = rng.uniform(-jitter, jitter);
      corner_c[k] = rng.uniform(-jitter, jitter);
    }
    if (jitter > 0.0) {
      for (Eigen::Index r = 0; r < h; ++r) {
        const double fr = h > 1 ? static_cast<double>(r) / static_cast<double>(h - 1) : 0.0;
        for (Eigen::Index c = 0; c < w; ++c) {
          const double fc = w > 1 ? static_cast<double>(c) / static_cast<double>(w - 1) : 0.0;
          dr(r, c) += (1 - fr) * (1 - fc) * corner_r[0] + (1 - fr) * fc * corner_r[1] +
                      fr * (1 - fc) * corner_r[2] + fr * fc * corner_r[3];
          dc(r, c) += (1 - fr) * (1 - fc) * corner_c[0] + (1 - fr) * fc * corner_c[1] +
                      fr * (1 - fc) * corner_c[2] + fr * fc * corner_c[3];
        }
      }
    }

    for (Eigen::Index plane = 0; plane < ch; ++plane) {
      Field img(h, w);
      for (Eigen::Index r = 0; r < h; ++r) {
        for (Eigen::Index c = 0; c < w; ++c) {
          img(r, c) = x(i, (r * w + c) * ch + plane);
        }
      }
      for (Eigen::Index r = 0; r < h; ++r) {
        for (Eigen::Index c = 0; c < w; ++c) {
          out(i, (r * w + c) * ch + plane) =
              bilinear(img, static_cast<double>(r) + dr(r, c), static_cast<double>(c) + dc(r, c));
        }
      }
    }
  }
  return out;
}

Matrix corrupt(const LabeledDataset& data, const Matrix& x, const CorruptionSpec& spec) {
  switch (spec.kind) {
    case CorruptionSpec::Kind::Gaussian:
      return gaussian_corrupt(x, spec.sigma, spec.seed, data.image_like());
    case CorruptionSpec::Kind::Elastic:
      if (!data.image_like()) {
        throw InputError("elastic transform requires image-shaped data");
      }
      return elastic_transform(x, *data.image_shape, spec.intensity, spec.smoothing, spec.offset,
                               spec.seed);
  }
  throw ConfigError("unknown corruption kind");
}

Matrix pgd_attack(const ClassifierModel& model, const Matrix& x, const Labels& labels,
                  const PgdConfig& cfg, bool clip01) {
  if (cfg.epsilon < 0.0) throw ConfigError("pgd epsilon must be nonnegative");
  if (cfg.steps < 1) throw ConfigError("pgd needs at least 1 step");
  const double alpha = cfg.step_size > 0.0 ? cfg.step_size
                                           : 2.5 * cfg.epsilon / static_cast<double>(cfg.steps);
  LossSpec spec;
  spec.kind = LossSpec::Kind::CrossEntropy;
  spec.labels = labels;

  Matrix adv = x;
  for (int t = 0; t < cfg.steps; ++t) {
    const Matrix g = input_gradient(model, adv, spec);
    adv += alpha * g.array().sign().matrix();
    adv = x + (adv - x).cwiseMax(-cfg.epsilon).cwiseMin(cfg.epsilon);
  }
  if (clip01) adv = adv.cwiseMax(0.0).cwiseMin(1.0);
  return adv;
}

}  // namespace unlearn
