#include "edgeroute/estimators.hpp"

#include <chrono>
#include <cmath>

#include "edgeroute/error.hpp"

namespace edgeroute {
namespace {

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::string_view to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::kNone: return "none";
    case EstimatorKind::kOracle: return "oracle";
    case EstimatorKind::kEd: return "ed";
    case EstimatorKind::kSf: return "sf";
    case EstimatorKind::kOb: return "ob";
  }
  return "none";
}

EstimatorKind parse_estimator(std::string_view name) {
  if (name == "none") return EstimatorKind::kNone;
  if (name == "oracle" || name == "orc") return EstimatorKind::kOracle;
  if (name == "ed") return EstimatorKind::kEd;
  if (name == "sf") return EstimatorKind::kSf;
  if (name == "ob") return EstimatorKind::kOb;
  throw Error(ErrorKind::kInvalidArgument, "unknown estimator '" + std::string(name) + "'");
}

std::uint64_t count_objects_ed(const ImageRaster& img, const EdParams& params) {
  if (params.min_area_fraction < 0.0 || params.closing_radius < 0) {
    throw Error(ErrorKind::kInvalidArgument, "ED parameters must be non-negative");
  }
  const auto closed = close_edges(canny(img, params.canny), params.closing_radius);
  const double gate = params.min_area_fraction * static_cast<double>(img.width) * img.height;
  std::uint64_t count = 0;
  for (const auto& c : label_components(closed)) {
    if (static_cast<double>(c.bbox_area()) >= gate) ++count;
  }
  return count;
}

CountEstimate estimate_count_ed(const ImageRaster& img, const EdParams& params,
                                double gateway_power_w) {
  const auto start = std::chrono::steady_clock::now();
  const auto count = count_objects_ed(img, params);
  const double ms = elapsed_ms(start);
  return {count, EstimatorKind::kEd, ms, energy_mwh_for(gateway_power_w, ms)};
}

CountEstimate estimate_count_sf(const std::string& image_path, DetectorHandle& detector,
                                double gateway_power_w) {
  const auto start = std::chrono::steady_clock::now();
  const auto count = detector.detect(image_path);
  const double ms = elapsed_ms(start);
  return {count, EstimatorKind::kSf, ms, energy_mwh_for(gateway_power_w, ms)};
}

CountEstimate estimate_count_oracle(const Request& req) {
  if (!req.truth_count) {
    throw Error(ErrorKind::kMissingGroundTruth,
                "request " + std::to_string(req.id) + " carries no ground-truth count");
  }
  return {*req.truth_count, EstimatorKind::kOracle, 0.0, 0.0};
}

}  // namespace edgeroute
