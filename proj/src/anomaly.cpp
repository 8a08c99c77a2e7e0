#include "csight/anomaly.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "csight/io.hpp"

namespace csight {

namespace {

std::vector<double> thumb_feature(const Image& img) {
  Image t = resize_bilinear(img, kClusterThumb, kClusterThumb);
  return {t.pixels.begin(), t.pixels.end()};
}

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace

std::vector<int> cluster_places(const std::vector<Image>& map_images, int k,
                                std::uint32_t seed) {
  const int n = static_cast<int>(map_images.size());
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (k > n) throw std::invalid_argument("k exceeds image count");

  std::vector<std::vector<double>> pts(n);
  for (int i = 0; i < n; ++i) pts[i] = thumb_feature(map_images[i]);

  // k-means++ seeding: distance-squared weighted draws without
  // std::uniform_real_distribution (its output is implementation-defined).
  std::mt19937 rng(seed);
  auto unit = [&rng] { return rng() * (1.0 / 4294967296.0); };
  std::vector<std::vector<double>> centers;
  centers.push_back(pts[rng() % n]);
  std::vector<double> d2(n);
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      double best = sq_dist(pts[i], centers[0]);
      for (std::size_t c = 1; c < centers.size(); ++c)
        best = std::min(best, sq_dist(pts[i], centers[c]));
      d2[i] = best;
      total += best;
    }
    int pick;
    if (total <= 0.0) {
      pick = static_cast<int>(rng() % n);
    } else {
      double t = unit() * total;
      pick = n - 1;
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc >= t) {
          pick = i;
          break;
        }
      }
    }
    centers.push_back(pts[pick]);
  }

  std::vector<int> assign(n, 0);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double bd = sq_dist(pts[i], centers[0]);
      for (int c = 1; c < k; ++c) {
        double d = sq_dist(pts[i], centers[c]);
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    std::vector<int> count(k, 0);
    for (int i = 0; i < n; ++i) ++count[assign[i]];
    for (int c = 0; c < k; ++c) {
      if (count[c] > 0) continue;
      // Reseed the empty cluster from the farthest point of a non-singleton
      // cluster (lowest index on ties).
      int far = -1;
      double fd = -1.0;
      for (int i = 0; i < n; ++i) {
        if (count[assign[i]] <= 1) continue;
        double d = sq_dist(pts[i], centers[assign[i]]);
        if (d > fd) {
          fd = d;
          far = i;
        }
      }
      if (far < 0) break;  // only singletons left; nothing to steal
      --count[assign[far]];
      assign[far] = c;
      ++count[c];
      centers[c] = pts[far];
      changed = true;
    }
    for (int c = 0; c < k; ++c) {
      if (count[c] == 0) continue;
      std::vector<double> m(pts[0].size(), 0.0);
      for (int i = 0; i < n; ++i)
        if (assign[i] == c)
          for (std::size_t j = 0; j < m.size(); ++j) m[j] += pts[i][j];
      for (double& v : m) v /= count[c];
      centers[c] = std::move(m);
    }
    if (!changed && iter > 0) break;
  }
  return assign;
}

namespace {

Eigen::VectorXd flatten_working(const Image& img) {
  Eigen::VectorXd v(img.pixels.size());
  for (std::size_t i = 0; i < img.pixels.size(); ++i) v[static_cast<Eigen::Index>(i)] = img.pixels[i];
  return v;
}

}  // namespace

PlaceModel train_place_model(const std::vector<Image>& images_in_cluster, int d,
                             int place_id, double c) {
  const int n = static_cast<int>(images_in_cluster.size());
  if (n < 1) throw std::invalid_argument("empty cluster");
  const int p = kModelResolution * kModelResolution;
  if (d < 0 || d > std::min(n, p)) throw std::invalid_argument("d too large");

  Eigen::MatrixXd data(p, n);
  for (int i = 0; i < n; ++i) {
    Image w = resize_bilinear(images_in_cluster[i], kModelResolution, kModelResolution);
    data.col(i) = flatten_working(w);
  }
  PlaceModel model;
  model.place_id = place_id;
  model.c = c;
  model.mean = data.rowwise().mean();
  Eigen::MatrixXd centered = data.colwise() - model.mean;

  // Principal components through the n x n Gram matrix: eigenvectors of
  // centered^T * centered lift to pixel space as centered * v / sqrt(lambda).
  Eigen::MatrixXd gram = centered.transpose() * centered;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success) throw std::runtime_error("eigen decomposition failed");
  double lambda_max = eig.eigenvalues().size() ? eig.eigenvalues().maxCoeff() : 0.0;
  double floor = 1e-9 * std::max(lambda_max, 1.0);
  std::vector<int> keep;  // eigenvalues ascending; walk from the top
  for (int i = static_cast<int>(eig.eigenvalues().size()) - 1;
       i >= 0 && static_cast<int>(keep.size()) < d; --i)
    if (eig.eigenvalues()[i] > floor) keep.push_back(i);
  model.basis.resize(p, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j)
    model.basis.col(static_cast<Eigen::Index>(j)) =
        centered * eig.eigenvectors().col(keep[j]) / std::sqrt(eig.eigenvalues()[keep[j]]);

  // Leave-in reconstruction errors of the training images, pooled per pixel.
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd y = centered.col(i);
    Eigen::VectorXd err = y - model.basis * (model.basis.transpose() * y);
    for (int j = 0; j < p; ++j) {
      double v = std::abs(err[j]);
      sum += v;
      sum2 += v * v;
    }
  }
  double cnt = static_cast<double>(n) * p;
  model.mu = sum / cnt;
  model.sigma = std::sqrt(std::max(0.0, sum2 / cnt - model.mu * model.mu));
  model.sigma = std::max(model.sigma, 1e-6);
  return model;
}

LocMap re_map(const PlaceModel& model, const Image& query) {
  if (query.width != model.width || query.height != model.height)
    throw std::invalid_argument("query must match the model working resolution");
  Eigen::VectorXd x = flatten_working(query);
  Eigen::VectorXd y = x - model.mean;
  Eigen::VectorXd recon = model.mean + model.basis * (model.basis.transpose() * y);
  LocMap re(model.width, model.height);
  for (std::size_t i = 0; i < re.values.size(); ++i)
    re.values[i] = static_cast<float>(std::abs(x[static_cast<Eigen::Index>(i)] -
                                               recon[static_cast<Eigen::Index>(i)]));
  return re;
}

double v_re(const LocMap& re, const Rect& region) {
  double s = 0.0;
  int x0 = std::max(region.x, 0), y0 = std::max(region.y, 0);
  int x1 = std::min(region.x + region.w, re.width), y1 = std::min(region.y + region.h, re.height);
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) s += re.at(x, y);
  return s;
}

double normalize_re(double v, const PlaceModel& model) {
  if (model.sigma == 0.0) throw std::runtime_error("degenerate place");
  return (v - model.mu) / (model.sigma * model.c);
}

LocMap ad_loc_map(const std::vector<PlaceModel>& models,
                  const std::map<std::uint32_t, int>& assignments, const Image& query,
                  std::uint32_t localized_map_image_id) {
  auto it = assignments.find(localized_map_image_id);
  if (it == assignments.end())
    throw std::runtime_error("no place assignment for map image " +
                             std::to_string(localized_map_image_id));
  const PlaceModel* model = nullptr;
  for (const auto& m : models)
    if (m.place_id == it->second) {
      model = &m;
      break;
    }
  if (!model) throw std::runtime_error("missing place model " + std::to_string(it->second));

  Image working = resize_bilinear(query, model->width, model->height);
  LocMap re = re_map(*model, working);
  for (float& v : re.values)
    v = static_cast<float>(std::max(0.0, normalize_re(v, *model)));
  return resize_bilinear(re, query.width, query.height);
}

void PlaceModel::save(const std::string& path) const {
  io::Writer w;
  w.magic("CSPM1");
  w.u32(static_cast<std::uint32_t>(place_id));
  w.u32(static_cast<std::uint32_t>(width));
  w.u32(static_cast<std::uint32_t>(height));
  w.u32(static_cast<std::uint32_t>(dims()));
  for (Eigen::Index i = 0; i < mean.size(); ++i) w.f32(static_cast<float>(mean[i]));
  for (Eigen::Index j = 0; j < basis.cols(); ++j)
    for (Eigen::Index i = 0; i < basis.rows(); ++i) w.f32(static_cast<float>(basis(i, j)));
  w.f64(mu);
  w.f64(sigma);
  w.f64(c);
  w.save(path);
}

PlaceModel PlaceModel::load(const std::string& path) {
  io::Reader r = io::Reader::from_file(path);
  r.expect_magic("CSPM1");
  PlaceModel m;
  m.place_id = static_cast<int>(r.u32());
  m.width = static_cast<int>(r.u32());
  m.height = static_cast<int>(r.u32());
  if (m.width <= 0 || m.height <= 0) throw std::runtime_error("unreadable model (zero dimension)");
  int d = static_cast<int>(r.u32());
  Eigen::Index p = static_cast<Eigen::Index>(m.width) * m.height;
  m.mean.resize(p);
  for (Eigen::Index i = 0; i < p; ++i) m.mean[i] = r.f32();
  m.basis.resize(p, d);
  for (int j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < p; ++i) m.basis(i, j) = r.f32();
  m.mu = r.f64();
  m.sigma = r.f64();
  m.c = r.f64();
  return m;
}

}  // namespace csight
