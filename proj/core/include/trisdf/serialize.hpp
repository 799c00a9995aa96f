#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "trisdf/autodiff.hpp"
#include "trisdf/fitting.hpp"
#include "trisdf/metrics.hpp"

namespace trisdf {

// All on-disk documents are JSON with a `version` field; writes go
// through a temp file + rename so interrupted runs never leave
// truncated artifacts. Schemas are described in docs/FORMATS.md.

void atomic_write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);
std::uint64_t fnv1a_file_hash(const std::filesystem::path& path);

// --- posed-image dataset manifest ---------------------------------------

struct ManifestView {
  std::string file;  // relative to the manifest's image_dir
  real fx = 0, fy = 0, cx = 0, cy = 0;
  int width = 0, height = 0;
  std::array<real, 16> camera_to_world{};  // row-major
};

struct DatasetManifest {
  int version = 1;
  std::string image_dir = "images";
  std::vector<ManifestView> views;
  std::string gt_mesh;  // optional, relative to the manifest directory
  Rgb background{0, 0, 0};
  std::uint64_t seed = 0;
};

void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);
DatasetManifest load_manifest(const std::filesystem::path& path);

// Reads manifest.json in `dir` plus every referenced image.
MultiViewDataset load_dataset(const std::filesystem::path& dir);

// --- fit configuration ----------------------------------------------------

FitConfig load_fit_config(const std::filesystem::path& path);
void save_fit_config(const std::filesystem::path& path, const FitConfig& cfg);

// --- model checkpoints ------------------------------------------------------

struct CheckpointMeta {
  int version = 1;
  int triplane_resolution = 64;
  int triplane_channels = 16;
  int pe_levels = 4;
  int hidden = 64;
  real beta_init = 0.1;
  real beta_min = 1e-4;
  bool beta_learnable = false;
  Aabb extent;
  std::uint64_t seed = 0;
  int iterations = 0;
};

void save_checkpoint(const std::filesystem::path& path, const ad::ParamStore& params,
                     const CheckpointMeta& meta);

struct LoadedModel {
  CheckpointMeta meta;
  ad::ParamStore params;
  SdfColorNetwork net;
  TriplaneGrid grid;
  PositionalEncoder encoder;
  LaplaceDensity density;
};

LoadedModel load_checkpoint(const std::filesystem::path& path);

// --- loss curves ------------------------------------------------------------

void save_loss_csv(const std::filesystem::path& path, std::span<const LossRow> rows);

// --- metric reports -----------------------------------------------------------

std::string metric_report_to_json(const MetricReport& report);
MetricReport metric_report_from_json(const std::string& text);
std::string metric_report_csv(const MetricReport& report);  // header + one row
void save_metric_report(const std::filesystem::path& path, const MetricReport& report);

}  // namespace trisdf
