#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tmo3d/camera.hpp"
#include "tmo3d/geo.hpp"
#include "tmo3d/triangulate.hpp"

namespace tmo3d {

/// A captured camera frame; `cameras` lists the cameras that recorded it.
struct FrameRef {
  std::int64_t frame_id = 0;
  double timestamp = 0.0;
  std::vector<std::string> cameras;  // sorted, unique
};

/// Everything the pipeline reads for one recording.
struct Sequence {
  std::string name;
  PoseTrack poses;
  CameraRig rig;
  std::vector<Detection2D> detections;
  std::vector<FrameRef> frames;  // ascending frame_id
};

/// Frame list implied by the detections plus any explicitly declared frames.
/// A frame id must map to a single timestamp.
inline std::vector<FrameRef> collect_frames(const std::vector<Detection2D>& detections,
                                            const std::vector<FrameRef>& declared = {}) {
  std::map<std::int64_t, FrameRef> by_id;
  const auto add = [&](std::int64_t id, double ts, const std::string& cam) {
    auto [it, inserted] = by_id.try_emplace(id, FrameRef{id, ts, {}});
    if (!inserted && it->second.timestamp != ts) {
      throw Error(ErrorCode::kValidation,
                  "frame " + std::to_string(id) + " has conflicting timestamps");
    }
    if (!cam.empty()) it->second.cameras.push_back(cam);
  };
  for (const auto& f : declared) {
    if (f.cameras.empty()) add(f.frame_id, f.timestamp, "");
    for (const auto& c : f.cameras) add(f.frame_id, f.timestamp, c);
  }
  for (const auto& d : detections) add(d.frame_id, d.timestamp, d.camera_id);

  std::vector<FrameRef> out;
  out.reserve(by_id.size());
  for (auto& [id, f] : by_id) {
    std::sort(f.cameras.begin(), f.cameras.end());
    f.cameras.erase(std::unique(f.cameras.begin(), f.cameras.end()), f.cameras.end());
    out.push_back(std::move(f));
  }
  return out;
}

/// Detection indices grouped by (frame_id, camera_id).
class DetectionIndex {
 public:
  explicit DetectionIndex(const std::vector<Detection2D>& detections) {
    for (std::size_t i = 0; i < detections.size(); ++i) {
      index_[{detections[i].frame_id, detections[i].camera_id}].push_back(i);
    }
  }

  const std::vector<std::size_t>& at(std::int64_t frame_id, const std::string& camera_id) const {
    static const std::vector<std::size_t> kEmpty;
    auto it = index_.find({frame_id, camera_id});
    return it == index_.end() ? kEmpty : it->second;
  }

 private:
  std::map<std::pair<std::int64_t, std::string>, std::vector<std::size_t>> index_;
};

}  // namespace tmo3d
