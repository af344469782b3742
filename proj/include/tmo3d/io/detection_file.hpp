#pragma once

// Detection file: whitespace-separated text, one record per line.
//
//   # tmo3d detections v1
//   <frame_id> <timestamp> <camera_id> <class> <confidence> <x_min> <y_min> <x_max> <y_max> [key=value ...]
//   <frame_id> <timestamp> <camera_id> -
//
// The second form declares a captured frame without detections, so frames
// where nothing was detected still get annotated and scored. Attribute
// values are percent-escaped (see escape_token).

#include <filesystem>
#include <fstream>
#include <istream>
#include <string>
#include <vector>

#include "tmo3d/error.hpp"
#include "tmo3d/io/text_lines.hpp"
#include "tmo3d/sequence.hpp"
#include "tmo3d/triangulate.hpp"

namespace tmo3d::io {

struct DetectionFile {
  std::vector<Detection2D> detections;
  std::vector<FrameRef> frames;  // every frame mentioned, ascending frame_id
};

inline DetectionFile parse_detections(std::istream& in, const std::string& source = "detections") {
  DetectionFile out;
  std::vector<FrameRef> declared;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto fail = [&](const std::string& what) {
      throw Error(ErrorCode::kParse, source + ":" + std::to_string(lineno) + ": " + what);
    };
    const std::string body = trim(line);
    if (body.empty() || body[0] == '#') continue;
    const auto f = split_ws(body);
    if (f.size() < 4) fail("expected at least 4 fields");
    const auto frame_id = parse_int(f[0]);
    const auto ts = parse_double(f[1]);
    if (!frame_id) fail("frame_id is not an integer");
    if (!ts) fail("timestamp is not a number");
    if (f[3] == "-") {
      if (f.size() != 4) fail("frame marker takes exactly 4 fields");
      declared.push_back({*frame_id, *ts, {f[2]}});
      continue;
    }
    if (f.size() < 9) fail("expected 9 fields plus optional attributes, got " + std::to_string(f.size()));
    Detection2D d;
    d.frame_id = *frame_id;
    d.timestamp = *ts;
    d.camera_id = f[2];
    const auto cls = parse_object_class(f[3]);
    if (!cls) fail("unknown class '" + f[3] + "'");
    d.cls = *cls;
    const auto conf = parse_double(f[4]);
    if (!conf) fail("confidence is not a number");
    d.confidence = *conf;
    double b[4];
    for (int i = 0; i < 4; ++i) {
      const auto v = parse_double(f[5 + static_cast<std::size_t>(i)]);
      if (!v) fail("bbox field " + std::to_string(i + 1) + " is not a number");
      b[i] = *v;
    }
    d.bbox = {b[0], b[1], b[2], b[3]};
    for (std::size_t i = 9; i < f.size(); ++i) {
      const auto eq = f[i].find('=');
      if (eq == std::string::npos || eq == 0) fail("attribute '" + f[i] + "' is not key=value");
      const auto key = unescape_token(std::string_view(f[i]).substr(0, eq));
      const auto value = unescape_token(std::string_view(f[i]).substr(eq + 1));
      if (!key || !value) fail("bad escape in attribute '" + f[i] + "'");
      d.attributes[*key] = *value;
    }
    try {
      validate(d);
    } catch (const Error& e) {
      fail(e.what());
    }
    out.detections.push_back(std::move(d));
  }
  try {
    out.frames = collect_frames(out.detections, declared);
  } catch (const Error& e) {
    throw Error(ErrorCode::kParse, source + ": " + e.what());
  }
  return out;
}

inline DetectionFile read_detections(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open detection file '" + path.string() + "'");
  return parse_detections(in, path.string());
}

/// Writes detections grouped per (frame, camera), with a marker line for
/// every frame/camera in `frames` that has no detection.
inline std::string format_detections(const std::vector<Detection2D>& detections,
                                     const std::vector<FrameRef>& frames) {
  std::string out = "# tmo3d detections v1\n";
  out += "# frame_id timestamp camera_id class confidence x_min y_min x_max y_max [key=value ...]\n";
  const DetectionIndex index(detections);
  char buf[256];
  for (const auto& frame : frames) {
    for (const auto& cam : frame.cameras) {
      const auto& ids = index.at(frame.frame_id, cam);
      if (ids.empty()) {
        std::snprintf(buf, sizeof(buf), "%lld %.6f %s -\n", static_cast<long long>(frame.frame_id),
                      frame.timestamp, cam.c_str());
        out += buf;
        continue;
      }
      for (auto i : ids) {
        const auto& d = detections[i];
        std::snprintf(buf, sizeof(buf), "%lld %.6f %s %s %.6f %.6f %.6f %.6f %.6f",
                      static_cast<long long>(d.frame_id), d.timestamp, d.camera_id.c_str(),
                      std::string(to_string(d.cls)).c_str(), d.confidence, d.bbox.x_min,
                      d.bbox.y_min, d.bbox.x_max, d.bbox.y_max);
        out += buf;
        for (const auto& [k, v] : d.attributes) out += " " + escape_token(k) + "=" + escape_token(v);
        out += "\n";
      }
    }
  }
  return out;
}

}  // namespace tmo3d::io
