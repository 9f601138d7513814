#ifndef COPER_CORE_DATASET_HPP
#define COPER_CORE_DATASET_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "core/matrix.hpp"

namespace coper {

// Aligned multi-view data: views[v] is d_v x N, column i of every view refers
// to the same underlying observation.
struct MultiViewDataset {
  std::vector<Matrix> views;
  std::vector<int> true_labels;  // empty when unknown
  int k = 0;                     // 0 when unknown

  std::size_t n_views() const { return views.size(); }
  std::size_t n_samples() const { return views.empty() ? 0 : views.front().cols; }
  bool has_labels() const { return !true_labels.empty(); }
};

// Mixture-of-Gaussians latent variable pushed through per-view linear maps
// with additive noise.
struct LatentSpec {
  int n_clusters = 0;
  int latent_dim = 0;
  Matrix cluster_means;               // K x latent_dim
  std::vector<double> cluster_scales; // per-cluster spread, > 0

  struct ViewMap {
    Matrix map;                // d_v x latent_dim
    std::vector<double> bias;  // d_v
    double noise = 0.0;        // white-noise sigma
    // structured view-specific noise: a low-rank map applied to a private
    // standard-normal factor, part of the view's epsilon term
    Matrix confound_map;       // d_v x confound_dim (may be empty)
    double confound_strength = 0.0;
  };
  std::vector<ViewMap> views;

  // Random spec: cluster means N(0, separation^2 I), unit cluster scales,
  // view maps N(0, 1/latent_dim). confound_dim > 0 adds per-view structured
  // noise factors of the given strength.
  static LatentSpec random(int k, int latent_dim, const std::vector<int>& view_dims,
                           double separation, double noise, std::uint64_t seed,
                           int confound_dim = 0, double confound_strength = 0.0);
};

MultiViewDataset synth_multiview(const LatentSpec& spec, std::size_t n_samples,
                                 std::uint64_t seed);

// Split stacked images (H*W features per sample, pixel (r,c) at row r*W+c)
// into a top-half and bottom-half view.
MultiViewDataset split_views(const Matrix& images, int height, int width);

// Reassemble the two split views back into the original pixel matrix.
Matrix unsplit_views(const MultiViewDataset& ds);

// One CSV per view (samples as columns), integer labels CSV, JSON manifest.
void save_dataset(const MultiViewDataset& ds, const std::string& dir,
                  const std::string& name = "dataset");
MultiViewDataset load_dataset(const std::string& manifest_path);

// Shipped benchmarks (fixed recipes shared by the CLI presets and tests).

// Assumption-1 mixture: K clusters, two views by default. The views carry
// low-rank view-specific confounds on top of white noise, so shared structure
// has to be found rather than being the dominant variance.
MultiViewDataset benchmark_mixture(std::uint64_t seed, std::size_t n_samples = 600,
                                   int k = 3, const std::vector<int>& view_dims = {10, 10},
                                   int latent_dim = 4, double separation = 4.0,
                                   double noise = 0.6, int confound_dim = 3,
                                   double confound_strength = 2.5);

// Digit-like split-view benchmark: smooth per-cluster templates plus shared
// within-cluster style factors spanning both halves plus pixel noise.
MultiViewDataset benchmark_split_images(std::uint64_t seed, std::size_t n_samples = 800,
                                        int k = 3, int height = 16, int width = 8,
                                        double style_strength = 0.5,
                                        double pixel_noise = 0.3);

}  // namespace coper

#endif
