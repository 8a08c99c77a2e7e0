#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "csight/image.hpp"

namespace csight {

inline constexpr int kClusterThumb = 32;    // clustering runs on 32x32 thumbnails
inline constexpr int kModelResolution = 64; // place models work at 64x64

// Deterministic k-means over downscaled intensity vectors: k-means++ seeding,
// at most 100 Lloyd iterations, empty clusters reseeded from the point
// farthest from its centroid. Returns one cluster id in [0,k) per image,
// aligned with the input order.
std::vector<int> cluster_places(const std::vector<Image>& map_images, int k,
                                std::uint32_t seed = 5);

// Linear normal model of one place: training mean plus an orthonormal
// principal basis of the flattened working-resolution images. mu/sigma are
// the moments of the pooled per-pixel reconstruction errors of the training
// images themselves; dividing z-scores additionally by c puts the outputs of
// all place models on one comparable scale.
struct PlaceModel {
  int place_id = 0;
  int width = kModelResolution;
  int height = kModelResolution;
  Eigen::VectorXd mean;   // pixel_count
  Eigen::MatrixXd basis;  // pixel_count x dims, orthonormal columns
  double mu = 0.0;
  double sigma = 0.0;
  double c = 0.8;

  int dims() const { return static_cast<int>(basis.cols()); }
  // Persisted with float32 mean/basis; reloading loses the extra double
  // precision kept by in-memory models.
  void save(const std::string& path) const;
  static PlaceModel load(const std::string& path);
};

// Fits the model on the cluster's images (resampled to the working
// resolution). Components with no training variance are dropped, so the
// fitted basis may hold fewer than d columns. sigma is floored at 1e-6:
// a place with no normal variation treats any deviation as anomalous.
PlaceModel train_place_model(const std::vector<Image>& images_in_cluster, int d,
                             int place_id = 0, double c = 0.8);

// Per-pixel |I - I'| where I' = mean + basis * (basis^T * (I - mean)).
// The query must already be at the model's working resolution.
LocMap re_map(const PlaceModel& model, const Image& query);

// Region score: sum of the reconstruction error over the rect.
double v_re(const LocMap& re, const Rect& region);

// z = (v - mu) / (sigma * c). Strictly increasing in v.
double normalize_re(double v, const PlaceModel& model);

// The anomaly channel: normalized reconstruction error of the query against
// the place model linked to the localized map image, clamped at zero and
// upsampled to the query resolution.
LocMap ad_loc_map(const std::vector<PlaceModel>& models,
                  const std::map<std::uint32_t, int>& assignments, const Image& query,
                  std::uint32_t localized_map_image_id);

}  // namespace csight
