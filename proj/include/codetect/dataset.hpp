#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "codetect/core.hpp"
#include "codetect/metrics.hpp"
#include "codetect/similarity.hpp"

namespace codetect {

// Everything the pipeline ingests for one video.
struct VideoBundle {
  VideoMeta meta;
  std::vector<std::vector<BoundingBox>> edgeboxes;  // per frame; may be empty
  std::vector<std::vector<BoundingBox>> mcg;        // per frame; may be empty
  FlowGrid flow;
  std::optional<GrayVideo> frames;
  std::vector<AnnotationTrack> annotations;
};

struct VideoEntry {
  std::string video_id;
  std::string sentence;
  std::string bundle;  // directory, relative to the manifest
  std::shared_ptr<const VideoBundle> data;  // preloaded bundle, if any
};

struct SetSpec {
  std::string set_id;
  int run_id = 1;
  std::vector<VideoEntry> videos;
};

struct Manifest {
  std::string rules = "new_dataset";  // builtin name or rule-file path
  std::string base_dir = ".";
  std::vector<SetSpec> sets;
};

}  // namespace codetect
