#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "lcnn/error.hpp"
#include "lcnn/graph.hpp"
#include "lcnn/ssd.hpp"

namespace lcnn {

struct GroundTruthBox {
  int class_id = 0;
  Box box;
};

// frame id -> boxes; frames with no objects map to an empty list
using GroundTruthMap = std::map<std::string, std::vector<GroundTruthBox>>;
using DetectionMap = std::map<std::string, std::vector<Detection>>;

// Lines: `frame_id class_id xmin ymin xmax ymax` (normalized floats).
inline GroundTruthMap load_ground_truth(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw FormatError("cannot open ground truth '" + path + "'");
  GroundTruthMap gt;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream is(line);
    std::string frame;
    GroundTruthBox g;
    if (!(is >> frame >> g.class_id >> g.box.xmin >> g.box.ymin >> g.box.xmax >>
          g.box.ymax)) {
      throw FormatError(path + ":" + std::to_string(lineno) +
                        ": malformed ground-truth line");
    }
    gt[frame].push_back(g);
  }
  return gt;
}

// Greedy one-to-one matching per frame: detections in descending score
// order each claim the highest-IoU unclaimed same-class GT with
// IoU >= iou_min. FPR = 100 * unmatched / total detections; 0 when there
// are no detections at all.
inline double false_positive_rate(const DetectionMap& dets,
                                  const GroundTruthMap& gts,
                                  float iou_min = 0.5f) {
  std::int64_t total = 0, unmatched = 0;
  for (const auto& [frame, frame_dets] : dets) {
    auto git = gts.find(frame);
    if (git == gts.end()) {
      throw UsageError("detections reference unknown frame '" + frame + "'");
    }
    const auto& frame_gts = git->second;
    std::vector<bool> claimed(frame_gts.size(), false);
    std::vector<Detection> ordered = frame_dets;
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const Detection& a, const Detection& b) {
                       return a.score > b.score;
                     });
    for (const Detection& d : ordered) {
      ++total;
      int best = -1;
      float best_iou = 0.0f;
      for (std::size_t g = 0; g < frame_gts.size(); ++g) {
        if (claimed[g] || frame_gts[g].class_id != d.class_id) continue;
        const float v = iou(d.box, frame_gts[g].box);
        if (v >= iou_min && v > best_iou) {
          best_iou = v;
          best = static_cast<int>(g);
        }
      }
      if (best >= 0) {
        claimed[best] = true;
      } else {
        ++unmatched;
      }
    }
  }
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(unmatched) / total;
}

struct BenchReport {
  std::int64_t frames_processed = 0;
  double wall_seconds = 0;
  double fps_avg = 0;
  double fps_peak = 0;  // best 1-second window
  std::vector<double> per_frame_ms;
  std::int64_t param_bytes = 0;
  std::int64_t peak_activation_bytes = 0;
};

// Monotonic seconds; injectable so the 30-second methodology is testable
// without waiting.
using Clock = std::function<double()>;

inline Clock steady_clock_seconds() {
  return [] {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
  };
}

struct MemoryReport {
  std::int64_t param_bytes = 0;       // layers + heads, 4 bytes/value
  std::int64_t layer_param_bytes = 0; // backbone portion only
  std::int64_t peak_activation_bytes = 0;
};

inline MemoryReport memory_report(const NetworkConfig& cfg,
                                  const HeadSpec& head) {
  const auto shapes = validate_config(cfg);
  const NetworkProfile prof = profile_network(cfg);
  MemoryReport r;
  r.layer_param_bytes = prof.param_bytes;

  std::int64_t head_values = 0;
  const int ppl = head.priors_per_location();
  for (int t : cfg.tap_indices) {
    const std::int64_t ch = shapes[t - 1].out.channels;
    const std::int64_t loc_out = 4LL * ppl;
    const std::int64_t conf_out = static_cast<std::int64_t>(ppl) * cfg.num_classes;
    head_values += loc_out * ch + loc_out + conf_out * ch + conf_out;
  }
  r.param_bytes = r.layer_param_bytes + 4 * head_values;

  std::int64_t peak = 0;
  for (const auto& s : shapes) {
    const std::int64_t in_elems =
        static_cast<std::int64_t>(s.in.channels) * s.in.height * s.in.width;
    const std::int64_t out_elems =
        static_cast<std::int64_t>(s.out.channels) * s.out.height * s.out.width;
    peak = std::max(peak, in_elems + out_elems);
  }
  r.peak_activation_bytes = 4 * peak;
  return r;
}

// Runs detect over cycled frames for duration_s of (injected) wall time.
inline BenchReport bench_fps(const NetworkConfig& cfg, const WeightStore& store,
                             const HeadSpec& head,
                             const std::vector<Tensor>& frames,
                             double duration_s = 30.0,
                             Clock clock = steady_clock_seconds()) {
  if (frames.empty()) throw UsageError("bench requires at least one frame");
  BenchReport r;
  const MemoryReport mem = memory_report(cfg, head);
  r.param_bytes = mem.param_bytes;
  r.peak_activation_bytes = mem.peak_activation_bytes;

  std::vector<double> finish_times;
  const double t0 = clock();
  double now = t0;
  std::size_t next = 0;
  while (now - t0 < duration_s) {
    const double before = now;
    detect(cfg, store, head, frames[next]);
    next = (next + 1) % frames.size();
    now = clock();
    r.per_frame_ms.push_back((now - before) * 1000.0);
    finish_times.push_back(now - t0);
    ++r.frames_processed;
  }
  r.wall_seconds = now - t0;
  r.fps_avg = r.frames_processed / r.wall_seconds;

  // best 1-second window over frame completion times
  std::size_t lo = 0;
  std::size_t best = 0;
  for (std::size_t hi = 0; hi < finish_times.size(); ++hi) {
    while (finish_times[hi] - finish_times[lo] > 1.0) ++lo;
    best = std::max(best, hi - lo + 1);
  }
  r.fps_peak = std::max(static_cast<double>(best), r.fps_avg);
  return r;
}

// CSV `frames,seconds,fps_avg,fps_peak,param_bytes,peak_activation_bytes`
inline std::string bench_csv(const BenchReport& r) {
  std::ostringstream os;
  os << "frames,seconds,fps_avg,fps_peak,param_bytes,peak_activation_bytes\n"
     << r.frames_processed << ',' << r.wall_seconds << ',' << r.fps_avg << ','
     << r.fps_peak << ',' << r.param_bytes << ',' << r.peak_activation_bytes
     << '\n';
  return os.str();
}

}  // namespace lcnn
