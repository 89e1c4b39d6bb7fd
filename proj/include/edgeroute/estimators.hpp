#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "edgeroute/canny.hpp"
#include "edgeroute/detector.hpp"
#include "edgeroute/types.hpp"

namespace edgeroute {

enum class EstimatorKind { kNone, kOracle, kEd, kSf, kOb };

std::string_view to_string(EstimatorKind kind);
EstimatorKind parse_estimator(std::string_view name);

struct CountEstimate {
  std::uint64_t count = 0;
  EstimatorKind method = EstimatorKind::kNone;
  double overhead_ms = 0.0;   // gateway wall time spent estimating
  double overhead_mwh = 0.0;  // modeled gateway energy for that time
};

/// Edge-detection counter: Canny, square closing, then 8-connected
/// components whose bounding box covers at least `min_area_fraction` of the
/// frame.
struct EdParams {
  CannyParams canny;
  int closing_radius = 2;
  double min_area_fraction = 0.005;
};

/// Pure part of the ED estimator.
std::uint64_t count_objects_ed(const ImageRaster& img, const EdParams& params = {});

CountEstimate estimate_count_ed(const ImageRaster& img, const EdParams& params,
                                double gateway_power_w);

/// Asks the front-end detector for the count of the image at `image_path`.
CountEstimate estimate_count_sf(const std::string& image_path, DetectorHandle& detector,
                                double gateway_power_w);

/// Ground truth carried with the request. Throws MissingGroundTruth.
CountEstimate estimate_count_oracle(const Request& req);

/// Output-based estimator: the next estimate is the count the backend
/// reported for the previous request on the same stream.
class ObEstimator {
 public:
  explicit ObEstimator(std::uint64_t default_count = 0) : last_count_(default_count) {}

  CountEstimate estimate() const { return {last_count_, EstimatorKind::kOb, 0.0, 0.0}; }
  void observe(const DetectionResponse& resp) {
    last_count_ = resp.detected_count;
    initialized_ = true;
  }

  std::uint64_t last_count() const { return last_count_; }
  bool initialized() const { return initialized_; }

 private:
  std::uint64_t last_count_;
  bool initialized_ = false;
};

}  // namespace edgeroute
