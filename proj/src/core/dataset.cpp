#include "core/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "core/rng.hpp"

namespace coper {

namespace fs = std::filesystem;
using nlohmann::json;

LatentSpec LatentSpec::random(int k, int latent_dim, const std::vector<int>& view_dims,
                              double separation, double noise, std::uint64_t seed,
                              int confound_dim, double confound_strength) {
  if (k < 2 || latent_dim < 1)
    fail(ErrorCode::InvalidSpec, "LatentSpec: need k >= 2 and latent_dim >= 1");
  for (int d : view_dims)
    if (d < 1) fail(ErrorCode::InvalidSpec, "LatentSpec: zero-dimension view");

  Rng rng(seed);
  LatentSpec spec;
  spec.n_clusters = k;
  spec.latent_dim = latent_dim;
  spec.cluster_means = Matrix(static_cast<std::size_t>(k), static_cast<std::size_t>(latent_dim));
  Rng mrng = rng.derive(1);
  for (auto& v : spec.cluster_means.data) v = separation * mrng.normal();
  spec.cluster_scales.assign(static_cast<std::size_t>(k), 1.0);

  for (std::size_t vi = 0; vi < view_dims.size(); ++vi) {
    LatentSpec::ViewMap vm;
    vm.map = Matrix(static_cast<std::size_t>(view_dims[vi]),
                    static_cast<std::size_t>(latent_dim));
    Rng vrng = rng.derive(100 + vi);
    double scale = 1.0 / std::sqrt(static_cast<double>(latent_dim));
    for (auto& w : vm.map.data) w = scale * vrng.normal();
    vm.bias.assign(static_cast<std::size_t>(view_dims[vi]), 0.0);
    for (auto& b : vm.bias) b = 0.1 * vrng.normal();
    vm.noise = noise;
    if (confound_dim > 0 && confound_strength > 0.0) {
      vm.confound_map = Matrix(static_cast<std::size_t>(view_dims[vi]),
                               static_cast<std::size_t>(confound_dim));
      double cscale = 1.0 / std::sqrt(static_cast<double>(confound_dim));
      for (auto& w : vm.confound_map.data) w = cscale * vrng.normal();
      vm.confound_strength = confound_strength;
    }
    spec.views.push_back(std::move(vm));
  }
  return spec;
}

MultiViewDataset synth_multiview(const LatentSpec& spec, std::size_t n_samples,
                                 std::uint64_t seed) {
  if (spec.n_clusters < 2 || spec.latent_dim < 1 || spec.views.empty())
    fail(ErrorCode::InvalidSpec, "synth_multiview: degenerate spec");
  for (const auto& v : spec.views)
    if (v.map.rows == 0 || v.map.cols != static_cast<std::size_t>(spec.latent_dim))
      fail(ErrorCode::InvalidSpec, "synth_multiview: view map shape invalid");
  for (double s : spec.cluster_scales)
    if (!(s > 0.0)) fail(ErrorCode::InvalidSpec, "synth_multiview: non-positive cluster scale");
  if (n_samples < static_cast<std::size_t>(spec.n_clusters))
    fail(ErrorCode::InvalidSpec, "synth_multiview: need n_samples >= k");

  Rng root(seed);
  Rng label_rng = root.derive(11);
  Rng theta_rng = root.derive(12);

  MultiViewDataset ds;
  ds.k = spec.n_clusters;
  ds.true_labels.resize(n_samples);

  Matrix theta(static_cast<std::size_t>(spec.latent_dim), n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    int c = static_cast<int>(label_rng.below(static_cast<std::uint64_t>(spec.n_clusters)));
    ds.true_labels[i] = c;
    double scale = spec.cluster_scales[static_cast<std::size_t>(c)];
    for (int d = 0; d < spec.latent_dim; ++d)
      theta(static_cast<std::size_t>(d), i) =
          spec.cluster_means(static_cast<std::size_t>(c), static_cast<std::size_t>(d)) +
          scale * theta_rng.normal();
  }

  for (std::size_t vi = 0; vi < spec.views.size(); ++vi) {
    const auto& vm = spec.views[vi];
    Matrix x = matmul(vm.map, theta);
    if (!vm.confound_map.empty() && vm.confound_strength > 0.0) {
      Rng crng = root.derive(2000 + vi);
      Matrix xi(vm.confound_map.cols, n_samples);
      for (auto& v : xi.data) v = crng.normal();
      add_scaled(x, vm.confound_strength, matmul(vm.confound_map, xi));
    }
    Rng noise_rng = root.derive(1000 + vi);
    for (std::size_t r = 0; r < x.rows; ++r)
      for (std::size_t c = 0; c < x.cols; ++c) {
        double eps = vm.noise > 0.0 ? vm.noise * noise_rng.normal() : 0.0;
        x(r, c) += vm.bias[r] + eps;
      }
    ds.views.push_back(std::move(x));
  }
  return ds;
}

MultiViewDataset split_views(const Matrix& images, int height, int width) {
  if (height < 2 || width < 1 || height % 2 != 0)
    fail(ErrorCode::InvalidShape, "split_views: height must be even and positive");
  if (images.rows != static_cast<std::size_t>(height) * static_cast<std::size_t>(width))
    fail(ErrorCode::InvalidShape, "split_views: feature dim != H*W");
  std::size_t half = images.rows / 2;
  MultiViewDataset ds;
  Matrix top(half, images.cols), bottom(half, images.cols);
  for (std::size_t j = 0; j < images.cols; ++j) {
    for (std::size_t i = 0; i < half; ++i) top(i, j) = images(i, j);
    for (std::size_t i = 0; i < half; ++i) bottom(i, j) = images(half + i, j);
  }
  ds.views.push_back(std::move(top));
  ds.views.push_back(std::move(bottom));
  return ds;
}

Matrix unsplit_views(const MultiViewDataset& ds) {
  if (ds.n_views() != 2 || ds.views[0].rows != ds.views[1].rows)
    fail(ErrorCode::InvalidShape, "unsplit_views: expected two equal-height views");
  Matrix out(ds.views[0].rows * 2, ds.views[0].cols);
  for (std::size_t j = 0; j < out.cols; ++j) {
    for (std::size_t i = 0; i < ds.views[0].rows; ++i) out(i, j) = ds.views[0](i, j);
    for (std::size_t i = 0; i < ds.views[1].rows; ++i)
      out(ds.views[0].rows + i, j) = ds.views[1](i, j);
  }
  return out;
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_view_csv(const Matrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot open for writing: " + path);
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

Matrix read_view_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  bool maybe_header = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string tok;
    bool numeric = true;
    while (std::getline(ss, tok, ',')) {
      std::size_t pos = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &pos);
      } catch (...) {
        numeric = false;
      }
      if (numeric && pos != tok.size()) {
        // trailing junk like "1.5x"
        while (pos < tok.size() && std::isspace(static_cast<unsigned char>(tok[pos]))) ++pos;
        if (pos != tok.size()) numeric = false;
      }
      if (numeric && !std::isfinite(v)) numeric = false;
      if (!numeric) break;
      vals.push_back(v);
    }
    if (!numeric) {
      if (maybe_header && rows.empty()) { maybe_header = false; continue; }
      fail(ErrorCode::ParseError,
           path + ": non-numeric token at row " + std::to_string(lineno));
    }
    maybe_header = false;
    if (!rows.empty() && vals.size() != rows.front().size())
      fail(ErrorCode::ParseError,
           path + ": ragged row at row " + std::to_string(lineno));
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) fail(ErrorCode::ParseError, path + ": empty view file");
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) m(i, j) = rows[i][j];
  return m;
}

}  // namespace

void save_dataset(const MultiViewDataset& ds, const std::string& dir,
                  const std::string& name) {
  if (ds.views.empty()) fail(ErrorCode::InvalidShape, "save_dataset: no views");
  fs::create_directories(dir);
  json manifest;
  manifest["n_samples"] = ds.n_samples();
  manifest["k"] = ds.k;
  json views = json::array();
  for (std::size_t v = 0; v < ds.views.size(); ++v) {
    std::string fname = name + "_view" + std::to_string(v) + ".csv";
    write_view_csv(ds.views[v], dir + "/" + fname);
    views.push_back({{"path", fname}, {"dim", ds.views[v].rows}});
  }
  manifest["views"] = views;
  if (ds.has_labels()) {
    std::string lname = name + "_labels.csv";
    std::ofstream out(dir + "/" + lname);
    if (!out) fail(ErrorCode::IoError, "cannot open for writing: " + dir + "/" + lname);
    for (int lab : ds.true_labels) out << lab << '\n';
    manifest["labels_path"] = lname;
  }
  std::ofstream mout(dir + "/" + name + ".json");
  if (!mout) fail(ErrorCode::IoError, "cannot write manifest in " + dir);
  mout << manifest.dump(2) << '\n';
}

MultiViewDataset load_dataset(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) fail(ErrorCode::IoError, "cannot open: " + manifest_path);
  json manifest;
  try {
    in >> manifest;
  } catch (const std::exception& e) {
    fail(ErrorCode::ParseError, manifest_path + ": " + e.what());
  }
  fs::path base = fs::path(manifest_path).parent_path();

  MultiViewDataset ds;
  if (!manifest.contains("views") || !manifest["views"].is_array() ||
      manifest["views"].empty())
    fail(ErrorCode::ParseError, manifest_path + ": manifest lists no views");
  for (const auto& v : manifest["views"]) {
    std::string p = v.at("path").get<std::string>();
    Matrix m = read_view_csv((base / p).string());
    if (v.contains("dim") && v["dim"].get<std::size_t>() != m.rows)
      fail(ErrorCode::ParseError, p + ": dim in manifest does not match file");
    ds.views.push_back(std::move(m));
  }
  for (std::size_t v = 1; v < ds.views.size(); ++v)
    if (ds.views[v].cols != ds.views[0].cols)
      fail(ErrorCode::AlignmentError,
           "views disagree on sample count: " + std::to_string(ds.views[0].cols) +
               " vs " + std::to_string(ds.views[v].cols));
  ds.k = manifest.value("k", 0);
  if (manifest.contains("labels_path")) {
    std::string lp = (base / manifest["labels_path"].get<std::string>()).string();
    std::ifstream lin(lp);
    if (!lin) fail(ErrorCode::IoError, "cannot open: " + lp);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(lin, line)) {
      ++lineno;
      if (line.empty()) continue;
      try {
        std::size_t pos = 0;
        int lab = std::stoi(line, &pos);
        ds.true_labels.push_back(lab);
      } catch (...) {
        fail(ErrorCode::ParseError, lp + ": non-numeric token at row " + std::to_string(lineno));
      }
    }
    if (ds.true_labels.size() != ds.n_samples())
      fail(ErrorCode::AlignmentError, "label count does not match sample count");
  }
  if (manifest.contains("n_samples") &&
      manifest["n_samples"].get<std::size_t>() != ds.n_samples())
    fail(ErrorCode::AlignmentError, "manifest n_samples does not match view files");
  return ds;
}

MultiViewDataset benchmark_mixture(std::uint64_t seed, std::size_t n_samples, int k,
                                   const std::vector<int>& view_dims, int latent_dim,
                                   double separation, double noise, int confound_dim,
                                   double confound_strength) {
  LatentSpec spec = LatentSpec::random(k, latent_dim, view_dims, separation, noise,
                                       seed ^ 0xb5125dULL, confound_dim,
                                       confound_strength);
  return synth_multiview(spec, n_samples, seed);
}

namespace {

// Smooth random field on an H x W grid from a low-frequency cosine basis,
// normalized to unit RMS.
Matrix smooth_field(int height, int width, Rng& rng) {
  Matrix f(static_cast<std::size_t>(height), static_cast<std::size_t>(width));
  const int max_freq = 2;
  for (int p = 0; p <= max_freq; ++p)
    for (int q = 0; q <= max_freq; ++q) {
      double alpha = rng.normal();
      for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c)
          f(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) +=
              alpha * std::cos(M_PI * p * (r + 0.5) / height) *
              std::cos(M_PI * q * (c + 0.5) / width);
    }
  double rms = frobenius_norm(f) / std::sqrt(static_cast<double>(height * width));
  if (rms > 1e-12)
    for (auto& v : f.data) v /= rms;
  return f;
}

}  // namespace

MultiViewDataset benchmark_split_images(std::uint64_t seed, std::size_t n_samples, int k,
                                        int height, int width, double style_strength,
                                        double pixel_noise) {
  if (k < 2) fail(ErrorCode::InvalidSpec, "benchmark_split_images: k >= 2 required");
  Rng root(seed);
  Rng template_rng = root.derive(21);
  Rng style_rng = root.derive(22);
  Rng label_rng = root.derive(23);
  Rng z_rng = root.derive(24);
  Rng noise_rng = root.derive(25);

  const int n_style = 4;
  std::vector<Matrix> templates;
  for (int c = 0; c < k; ++c) templates.push_back(smooth_field(height, width, template_rng));
  std::vector<Matrix> styles;
  for (int j = 0; j < n_style; ++j) styles.push_back(smooth_field(height, width, style_rng));

  const std::size_t dim = static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  Matrix images(dim, n_samples);
  std::vector<int> labels(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    int c = static_cast<int>(label_rng.below(static_cast<std::uint64_t>(k)));
    labels[i] = c;
    std::vector<double> z(n_style);
    for (int j = 0; j < n_style; ++j) z[static_cast<std::size_t>(j)] = z_rng.normal();
    for (std::size_t px = 0; px < dim; ++px) {
      double v = templates[static_cast<std::size_t>(c)].data[px];
      for (int j = 0; j < n_style; ++j)
        v += style_strength * z[static_cast<std::size_t>(j)] * styles[static_cast<std::size_t>(j)].data[px];
      v += pixel_noise * noise_rng.normal();
      images(px, i) = v;
    }
  }

  MultiViewDataset ds = split_views(images, height, width);
  ds.true_labels = std::move(labels);
  ds.k = k;
  return ds;
}

}  // namespace coper
