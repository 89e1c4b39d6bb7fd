#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "edgeroute/groups.hpp"
#include "edgeroute/image.hpp"

namespace edgeroute {

struct WorkloadItem {
  std::string id;
  std::string image;
  std::uint64_t truth_count = 0;
  GroupLabel group;

  bool operator==(const WorkloadItem&) const = default;
};

enum class Ordering { kNatural, kSortedByGroup };

struct WorkloadManifest {
  std::string name;
  Ordering ordering = Ordering::kNatural;
  std::vector<WorkloadItem> items;

  /// Items per group label.
  std::map<GroupLabel, std::size_t> histogram() const;
};

/// JSONL: one {"id": "...", "image": "<path>", "count": <n>} per line.
/// Relative image paths are resolved against `base_dir` when it is non-empty.
/// Errors: MalformedRecord with the line number.
WorkloadManifest import_manifest(std::istream& in, const GroupRules& rules,
                                 std::string name = "workload",
                                 const std::filesystem::path& base_dir = {});
WorkloadManifest import_manifest_file(const std::filesystem::path& path, const GroupRules& rules);

void write_manifest(std::ostream& out, const WorkloadManifest& manifest);
void write_manifest_file(const std::filesystem::path& path, const WorkloadManifest& manifest);

/// COCO instances JSON -> per-image object counts (images without
/// annotations count 0). `image_dir` is prefixed to file_name.
WorkloadManifest import_coco(std::istream& in, const GroupRules& rules,
                             const std::filesystem::path& image_dir, std::string name = "coco");

/// Directory of per-frame YOLO label files (one object per non-empty line).
/// Frames are ordered by file name; images are looked up as <stem><image_ext>
/// in `frame_dir`.
WorkloadManifest import_yolo_labels(const std::filesystem::path& label_dir,
                                    const std::filesystem::path& frame_dir, const GroupRules& rules,
                                    const std::string& image_ext = ".jpg",
                                    std::string name = "video");

/// Exactly `per_group` items per label, contiguous and in rule order.
/// Groups with more unique images are sampled without replacement; groups
/// with fewer are padded by seeded duplication. Throws EmptySourceGroup.
WorkloadManifest build_balanced_sorted(const WorkloadManifest& source, const GroupRules& rules,
                                       std::size_t per_group = 200, std::uint64_t seed = 0);

// --- synthetic corpora -----------------------------------------------------

/// Filled dark rectangles on a light uniform background, at most one per cell
/// of a 5x5 grid so that neighbours are separated by at least 10 px. Each
/// rectangle's area is at least `min_rect_area`.
ImageRaster render_rectangles(int size, std::uint64_t count, std::size_t min_rect_area,
                              std::mt19937_64& rng);

/// Largest object count render_rectangles can place.
inline constexpr std::uint64_t kMaxSyntheticObjects = 25;

/// Approximation of the COCO validation object-count distribution, truncated
/// at kMaxSyntheticObjects.
std::vector<double> coco_like_count_weights();

struct SyntheticOptions {
  std::size_t items = 1000;
  int image_size = 200;
  std::uint64_t seed = 7;
  double min_area_fraction = 0.005;  // rectangles are at least twice this
  std::vector<double> count_weights = coco_like_count_weights();
};

/// Writes PGM images, `.count` sidecars and `manifest.jsonl` under `dir`.
WorkloadManifest generate_synthetic_workload(const std::filesystem::path& dir,
                                             const SyntheticOptions& opts,
                                             const GroupRules& rules);

}  // namespace edgeroute
