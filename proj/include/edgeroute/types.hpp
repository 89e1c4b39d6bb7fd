#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "edgeroute/image.hpp"
#include "edgeroute/profile.hpp"

namespace edgeroute {

/// One image job as seen by the gateway.
struct Request {
  std::uint64_t id = 0;
  std::string image_ref;                            // path; may be empty when inline is set
  std::shared_ptr<const ImageRaster> inline_image;  // optional decoded raster
  std::optional<std::uint64_t> truth_count;
  std::string stream_id = "default";
};

/// Backend answer with the costs charged for it.
struct DetectionResponse {
  std::uint64_t request_id = 0;
  PairId pair;
  std::uint64_t detected_count = 0;
  double inference_ms = 0.0;
  double energy_mwh = 0.0;
  double network_ms = 0.0;
};

/// milliwatt-hours consumed by `power_w` watts over `ms` milliseconds.
constexpr double energy_mwh_for(double power_w, double ms) { return power_w * ms / 3600.0; }

}  // namespace edgeroute
