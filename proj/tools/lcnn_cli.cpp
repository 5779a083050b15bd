// lcnn command-line tool: detect / bench / analyze / init.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lcnn/complexity.hpp"
#include "lcnn/eval.hpp"
#include "lcnn/graph.hpp"
#include "lcnn/init.hpp"
#include "lcnn/media.hpp"
#include "lcnn/ssd.hpp"
#include "lcnn/weights.hpp"

namespace fs = std::filesystem;

namespace {

lcnn::NetworkConfig load_config_or_default(const std::string& path) {
  if (path.empty()) return lcnn::build_lcnn_default();
  std::ifstream f(path);
  if (!f) throw lcnn::UsageError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw lcnn::ConfigError("config '" + path + "': " + e.what());
  }
  return lcnn::config_from_json(j);
}

std::vector<fs::path> list_frames(const std::string& dir) {
  std::vector<fs::path> frames;
  if (!fs::is_directory(dir)) {
    throw lcnn::UsageError("'" + dir + "' is not a directory");
  }
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto ext = e.path().extension().string();
    if (ext == ".ppm" || ext == ".pgm") frames.push_back(e.path());
  }
  if (frames.empty()) {
    throw lcnn::UsageError("no .ppm/.pgm frames found in '" + dir + "'");
  }
  std::sort(frames.begin(), frames.end());
  return frames;
}

lcnn::Tensor preprocess(const fs::path& path, int input_size) {
  const lcnn::ImageRGB img = lcnn::load_image(path.string());
  const lcnn::ImageRGB resized =
      lcnn::resize_bilinear(img, input_size, input_size);
  return lcnn::normalize_to_tensor(resized);
}

struct CommonArgs {
  std::string weights;
  std::string config;
  std::string frames_dir;
  std::string out;
  double threshold = -1.0;
  double nms_iou = -1.0;
  bool all_classes = false;
};

lcnn::HeadSpec make_head(const CommonArgs& a, const lcnn::NetworkConfig& cfg) {
  lcnn::HeadSpec head =
      lcnn::make_default_head(static_cast<int>(cfg.tap_indices.size()));
  if (a.threshold >= 0) head.confidence_threshold = static_cast<float>(a.threshold);
  if (a.nms_iou >= 0) head.nms_iou_threshold = static_cast<float>(a.nms_iou);
  if (a.all_classes) head.emit_class = -1;
  return head;
}

int run_detect(const CommonArgs& a) {
  const lcnn::NetworkConfig cfg = load_config_or_default(a.config);
  const lcnn::WeightStore store = lcnn::load_weights(a.weights);
  const lcnn::HeadSpec head = make_head(a, cfg);
  std::ofstream file_out;
  if (!a.out.empty()) {
    file_out.open(a.out, std::ios::trunc);
    if (!file_out) throw lcnn::UsageError("cannot open '" + a.out + "'");
  }
  std::ostream& os = a.out.empty() ? std::cout : file_out;
  for (const fs::path& frame : list_frames(a.frames_dir)) {
    const lcnn::Tensor input = preprocess(frame, cfg.input_size);
    const auto dets = lcnn::detect(cfg, store, head, input);
    const std::string id = frame.stem().string();
    for (const auto& d : dets) {
      os << lcnn::detection_jsonl(id, d) << '\n';
    }
  }
  return 0;
}

int run_bench(const CommonArgs& a, double duration) {
  const lcnn::NetworkConfig cfg = load_config_or_default(a.config);
  const lcnn::WeightStore store = lcnn::load_weights(a.weights);
  const lcnn::HeadSpec head = make_head(a, cfg);
  std::vector<lcnn::Tensor> frames;
  for (const fs::path& frame : list_frames(a.frames_dir)) {
    frames.push_back(preprocess(frame, cfg.input_size));
  }
  const lcnn::BenchReport report =
      lcnn::bench_fps(cfg, store, head, frames, duration);
  std::cout << lcnn::bench_csv(report);
  return 0;
}

int run_analyze(const CommonArgs& a) {
  const lcnn::NetworkConfig cfg = load_config_or_default(a.config);
  const lcnn::NetworkProfile prof = lcnn::profile_network(cfg);
  if (!a.out.empty()) {
    std::ofstream f(a.out, std::ios::trunc);
    if (!f) throw lcnn::UsageError("cannot open '" + a.out + "'");
    f << lcnn::profile_csv(prof);
  }
  std::cout << "layer,kind,Dk,M,N,Df,macs,params,ratio\n";
  for (std::size_t i = 0; i < prof.layers.size(); ++i) {
    const auto& c = prof.layers[i];
    std::cout << c.label << ',' << c.kind << ',' << c.dk << ','
              << c.in_channels << ',' << c.out_channels << ',' << c.df << ','
              << c.macs << ',' << c.params << ',';
    // separable ratio reported on each pointwise row for its dw/pw pair
    if (c.kind == "pointwise" && i > 0 && prof.layers[i - 1].kind == "depthwise") {
      const auto& dw = prof.layers[i - 1];
      const lcnn::Rational r = lcnn::reduction_ratio(dw.dk, c.out_channels);
      std::cout << r.num << '/' << r.den;
    }
    std::cout << '\n';
  }
  std::cout << "total,,,,,," << prof.total_macs << ',' << prof.total_params
            << ",\nparam_bytes," << prof.param_bytes << '\n';
  return 0;
}

int run_init(const CommonArgs& a, std::uint64_t seed) {
  const lcnn::NetworkConfig cfg = load_config_or_default(a.config);
  const lcnn::HeadSpec head = make_head(a, cfg);
  const lcnn::WeightStore store = lcnn::random_init(cfg, head, seed);
  lcnn::save_weights(store, a.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"L-CNN human detector: inference, benchmark and analysis"};
  app.require_subcommand(1);
  CommonArgs args;
  double duration = 30.0;
  std::uint64_t seed = 0;

  auto* detect = app.add_subcommand("detect", "Detect objects in frames");
  detect->add_option("--weights", args.weights, "LCNW weight file")->required();
  detect->add_option("--frames", args.frames_dir, "Directory of .ppm/.pgm frames")
      ->required();
  detect->add_option("--config", args.config, "Network config JSON");
  detect->add_option("--out", args.out, "Output JSONL path (default stdout)");
  detect->add_option("--threshold", args.threshold, "Confidence threshold");
  detect->add_option("--nms-iou", args.nms_iou, "NMS IoU threshold");
  detect->add_flag("--all-classes", args.all_classes,
                   "Emit every class, not only person");

  auto* bench = app.add_subcommand("bench", "Measure detection throughput");
  bench->add_option("--weights", args.weights, "LCNW weight file")->required();
  bench->add_option("--frames", args.frames_dir, "Directory of frames")->required();
  bench->add_option("--config", args.config, "Network config JSON");
  bench->add_option("--duration", duration, "Benchmark duration in seconds");
  bench->add_option("--threshold", args.threshold, "Confidence threshold");

  auto* analyze = app.add_subcommand("analyze", "Per-layer MAC/parameter profile");
  analyze->add_option("--config", args.config, "Network config JSON");
  analyze->add_option("--out", args.out, "Write canonical CSV here");

  auto* init = app.add_subcommand("init", "Write seeded random weights");
  init->add_option("--out", args.out, "Output LCNW path")->required();
  init->add_option("--seed", seed, "RNG seed (default 0)");
  init->add_option("--config", args.config, "Network config JSON");
  init->add_flag("--all-classes", args.all_classes, "");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (detect->parsed()) return run_detect(args);
    if (bench->parsed()) return run_bench(args, duration);
    if (analyze->parsed()) return run_analyze(args);
    if (init->parsed()) return run_init(args, seed);
  } catch (const lcnn::UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const lcnn::FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const lcnn::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const lcnn::GeometryError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const lcnn::LoadError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
