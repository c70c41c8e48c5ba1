#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "khaos/ordinal.hpp"
#include "khaos/sampler.hpp"
#include "khaos/sparse_pce.hpp"

namespace khaos {

/// Per-column affine map used to rescale raw covariates onto [0,1].
/// Prediction inputs outside the training range are clamped (counted).
struct InputScaling {
  std::vector<std::string> columns;
  Eigen::VectorXd min;
  Eigen::VectorXd max;
  std::string response;

  Eigen::MatrixXd apply(const Eigen::MatrixXd& raw, long* clamped) const;
};

/// Saved model: JSON envelope with the fit payload encoded as base64 binary
/// (bit-exact doubles), so loading reproduces predictions exactly.
struct ModelArchive {
  int format_version = 1;
  std::string method;  // khaos-ridge | khaos-gprior | sparse-pce | ordinal
  InputScaling scaling;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;

  std::optional<PosteriorDraws> draws;   // khaos methods
  std::optional<SparseFit> sparse;       // sparse-pce
  std::optional<OrdinalFit> ordinal;     // ordinal (holds its own draws)
};

void save_archive(const std::string& path, const ModelArchive& archive);
ModelArchive load_archive(const std::string& path);

/// Base64 helpers shared with the tests.
std::string base64_encode(const std::vector<unsigned char>& bytes);
std::vector<unsigned char> base64_decode(const std::string& text);

}  // namespace khaos
