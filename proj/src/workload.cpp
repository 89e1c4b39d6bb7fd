#include "edgeroute/workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "edgeroute/detector.hpp"
#include "edgeroute/error.hpp"

namespace edgeroute {
namespace {

[[noreturn]] void bad_record(std::size_t line, const std::string& what) {
  throw Error(ErrorKind::kMalformedRecord, "line " + std::to_string(line) + ": " + what);
}

std::string resolve(const std::string& image, const std::filesystem::path& base_dir) {
  if (base_dir.empty() || image.empty()) return image;
  std::filesystem::path p(image);
  if (p.is_absolute()) return image;
  return (base_dir / p).lexically_normal().string();
}

}  // namespace

std::map<GroupLabel, std::size_t> WorkloadManifest::histogram() const {
  std::map<GroupLabel, std::size_t> out;
  for (const auto& item : items) ++out[item.group];
  return out;
}

WorkloadManifest import_manifest(std::istream& in, const GroupRules& rules, std::string name,
                                 const std::filesystem::path& base_dir) {
  WorkloadManifest m;
  m.name = std::move(name);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      bad_record(line_no, "not valid JSON");
    }
    if (!rec.is_object()) bad_record(line_no, "record must be a JSON object");
    WorkloadItem item;
    if (auto it = rec.find("id"); it != rec.end()) {
      if (it->is_string()) {
        item.id = it->get<std::string>();
      } else if (it->is_number_integer()) {
        item.id = std::to_string(it->get<std::int64_t>());
      } else {
        bad_record(line_no, "'id' must be a string or integer");
      }
    } else {
      item.id = std::to_string(line_no);
    }
    auto img = rec.find("image");
    if (img == rec.end() || !img->is_string()) bad_record(line_no, "'image' must be a string");
    item.image = resolve(img->get<std::string>(), base_dir);
    auto cnt = rec.find("count");
    if (cnt == rec.end()) bad_record(line_no, "missing 'count'");
    if (!cnt->is_number_integer()) bad_record(line_no, "'count' must be an integer");
    if (cnt->is_number_unsigned()) {
      item.truth_count = cnt->get<std::uint64_t>();
    } else {
      const auto v = cnt->get<std::int64_t>();
      if (v < 0) bad_record(line_no, "'count' must be non-negative, got " + std::to_string(v));
      item.truth_count = static_cast<std::uint64_t>(v);
    }
    item.group = rules.group_of(item.truth_count);
    m.items.push_back(std::move(item));
  }
  return m;
}

WorkloadManifest import_manifest_file(const std::filesystem::path& path, const GroupRules& rules) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open manifest " + path.string());
  return import_manifest(in, rules, path.stem().string(), path.parent_path());
}

void write_manifest(std::ostream& out, const WorkloadManifest& manifest) {
  for (const auto& item : manifest.items) {
    out << nlohmann::json{{"id", item.id}, {"image", item.image}, {"count", item.truth_count}}.dump()
        << '\n';
  }
}

void write_manifest_file(const std::filesystem::path& path, const WorkloadManifest& manifest) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write manifest " + path.string());
  write_manifest(out, manifest);
}

WorkloadManifest import_coco(std::istream& in, const GroupRules& rules,
                             const std::filesystem::path& image_dir, std::string name) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& ex) {
    throw Error(ErrorKind::kMalformedRecord, std::string("invalid COCO JSON: ") + ex.what());
  }
  if (!doc.contains("images") || !doc["images"].is_array()) {
    throw Error(ErrorKind::kMalformedRecord, "COCO document lacks an 'images' array");
  }
  std::map<std::int64_t, std::uint64_t> counts;
  if (doc.contains("annotations")) {
    std::size_t idx = 0;
    for (const auto& ann : doc["annotations"]) {
      ++idx;
      if (!ann.contains("image_id") || !ann["image_id"].is_number_integer()) {
        bad_record(idx, "annotation without integer image_id");
      }
      ++counts[ann["image_id"].get<std::int64_t>()];
    }
  }
  WorkloadManifest m;
  m.name = std::move(name);
  std::size_t idx = 0;
  for (const auto& img : doc["images"]) {
    ++idx;
    if (!img.contains("id") || !img["id"].is_number_integer() || !img.contains("file_name")) {
      bad_record(idx, "image entry needs integer 'id' and 'file_name'");
    }
    const auto id = img["id"].get<std::int64_t>();
    WorkloadItem item;
    item.id = std::to_string(id);
    item.image = (image_dir / img["file_name"].get<std::string>()).string();
    item.truth_count = counts.count(id) ? counts[id] : 0;
    item.group = rules.group_of(item.truth_count);
    m.items.push_back(std::move(item));
  }
  return m;
}

WorkloadManifest import_yolo_labels(const std::filesystem::path& label_dir,
                                    const std::filesystem::path& frame_dir, const GroupRules& rules,
                                    const std::string& image_ext, std::string name) {
  if (!std::filesystem::is_directory(label_dir)) {
    throw Error(ErrorKind::kIo, "label directory " + label_dir.string() + " does not exist");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(label_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  WorkloadManifest m;
  m.name = std::move(name);
  m.ordering = Ordering::kNatural;
  for (const auto& f : files) {
    std::ifstream in(f);
    std::string line;
    std::uint64_t count = 0;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) ++count;
    }
    WorkloadItem item;
    item.id = f.stem().string();
    item.image = (frame_dir / (f.stem().string() + image_ext)).string();
    item.truth_count = count;
    item.group = rules.group_of(count);
    m.items.push_back(std::move(item));
  }
  return m;
}

WorkloadManifest build_balanced_sorted(const WorkloadManifest& source, const GroupRules& rules,
                                       std::size_t per_group, std::uint64_t seed) {
  if (source.items.empty()) {
    throw Error(ErrorKind::kEmptySourceGroup, "source workload is empty");
  }
  if (per_group == 0) throw Error(ErrorKind::kInvalidArgument, "per_group must be >= 1");
  std::mt19937_64 rng(seed);
  WorkloadManifest out;
  out.name = source.name + "_balanced_sorted";
  out.ordering = Ordering::kSortedByGroup;
  for (const auto& label : rules.labels()) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < source.items.size(); ++i) {
      if (rules.group_of(source.items[i].truth_count) == label) members.push_back(i);
    }
    if (members.empty()) {
      throw Error(ErrorKind::kEmptySourceGroup, "group '" + label + "' has no source images");
    }
    if (members.size() >= per_group) {
      std::shuffle(members.begin(), members.end(), rng);
      members.resize(per_group);
      std::sort(members.begin(), members.end());
      for (auto i : members) {
        auto item = source.items[i];
        item.group = label;
        out.items.push_back(std::move(item));
      }
      continue;
    }
    for (auto i : members) {
      auto item = source.items[i];
      item.group = label;
      out.items.push_back(std::move(item));
    }
    std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
    for (std::size_t k = members.size(); k < per_group; ++k) {
      auto item = source.items[members[pick(rng)]];
      item.id += "#dup" + std::to_string(k - members.size() + 1);
      item.group = label;
      out.items.push_back(std::move(item));
    }
  }
  return out;
}

ImageRaster render_rectangles(int size, std::uint64_t count, std::size_t min_rect_area,
                              std::mt19937_64& rng) {
  constexpr int kGrid = 5;
  constexpr int kMargin = 5;
  if (count > kMaxSyntheticObjects) {
    throw Error(ErrorKind::kInvalidArgument, "at most 25 synthetic rectangles fit the grid");
  }
  const int cell = size / kGrid;
  const int max_side = cell - 2 * kMargin;
  const int min_side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(min_rect_area))));
  if (min_side < 1 || min_side > max_side) {
    throw Error(ErrorKind::kInvalidArgument, "image too small for the requested rectangle area");
  }
  ImageRaster img(size, size, 1, 230);
  std::vector<int> cells(kGrid * kGrid);
  std::iota(cells.begin(), cells.end(), 0);
  std::shuffle(cells.begin(), cells.end(), rng);
  std::uniform_int_distribution<int> side(min_side, max_side);
  std::uniform_int_distribution<int> shade(0, 70);
  for (std::uint64_t k = 0; k < count; ++k) {
    const int cx = (cells[k] % kGrid) * cell, cy = (cells[k] / kGrid) * cell;
    const int w = side(rng), h = side(rng);
    std::uniform_int_distribution<int> ox(cx + kMargin, cx + cell - kMargin - w);
    std::uniform_int_distribution<int> oy(cy + kMargin, cy + cell - kMargin - h);
    const int x0 = ox(rng), y0 = oy(rng);
    const auto value = static_cast<std::uint8_t>(shade(rng));
    for (int y = y0; y < y0 + h; ++y) {
      for (int x = x0; x < x0 + w; ++x) img.at(x, y) = value;
    }
  }
  return img;
}

std::vector<double> coco_like_count_weights() {
  std::vector<double> w(kMaxSyntheticObjects + 1, 0.0);
  w[0] = 0.01;
  w[1] = 0.16;
  w[2] = 0.12;
  w[3] = 0.09;
  double tail = 0.0;
  for (std::size_t n = 4; n < w.size(); ++n) tail += std::pow(0.87, static_cast<double>(n - 4));
  for (std::size_t n = 4; n < w.size(); ++n) {
    w[n] = 0.62 * std::pow(0.87, static_cast<double>(n - 4)) / tail;
  }
  return w;
}

WorkloadManifest generate_synthetic_workload(const std::filesystem::path& dir,
                                             const SyntheticOptions& opts,
                                             const GroupRules& rules) {
  if (opts.count_weights.empty() || opts.count_weights.size() > kMaxSyntheticObjects + 1) {
    throw Error(ErrorKind::kInvalidArgument, "count weights must cover 1..26 counts");
  }
  std::filesystem::create_directories(dir);
  std::mt19937_64 rng(opts.seed);
  std::discrete_distribution<std::uint64_t> counts(opts.count_weights.begin(),
                                                   opts.count_weights.end());
  const auto min_area = static_cast<std::size_t>(
      std::ceil(2.0 * opts.min_area_fraction * opts.image_size * opts.image_size));
  WorkloadManifest m;
  m.name = dir.filename().string();
  WorkloadManifest relative = m;
  for (std::size_t i = 0; i < opts.items; ++i) {
    const auto k = counts(rng);
    char name[32];
    std::snprintf(name, sizeof name, "syn_%05zu.pgm", i);
    const auto path = dir / name;
    write_pnm(path, render_rectangles(opts.image_size, k, min_area, rng));
    write_sidecar_count(path, k);
    WorkloadItem item{std::string(name).substr(0, 9), path.string(), k, rules.group_of(k)};
    m.items.push_back(item);
    item.image = name;
    relative.items.push_back(std::move(item));
  }
  write_manifest_file(dir / "manifest.jsonl", relative);
  return m;
}

}  // namespace edgeroute
