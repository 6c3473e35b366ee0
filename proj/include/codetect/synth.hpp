#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "codetect/dataset.hpp"

namespace codetect {

enum class TrajectoryKind { Static, Linear, Lift, Lower, Rotate };

std::string_view to_string(TrajectoryKind k);

// Total displacement (px) and in-plane rotation (rad) applied linearly
// between the scene's motion_begin and motion_end frames.
struct Trajectory {
  TrajectoryKind kind = TrajectoryKind::Static;
  double dx = 0.0;
  double dy = 0.0;
  double rotation = 0.0;
};

struct SceneObject {
  std::string instance_id;  // annotation id; empty for distractors
  int texture = 0;
  double brightness = 0.0;  // per-instance appearance variation
  double phase = 0.0;
  double cx = 0.0;  // center at frame 1
  double cy = 0.0;
  double size = 20.0;  // square side
  Trajectory motion;
};

struct SyntheticVideoSpec {
  std::string video_id;
  std::string sentence;
  std::vector<SceneObject> objects;  // drawn in order, later on top
};

struct SyntheticNoise {
  double box_jitter_px = 0.0;
  double flow_noise = 0.0;   // px/frame, per cell and component
  double pixel_noise = 0.0;  // intensity sigma
};

SyntheticNoise moderate_noise();

struct SyntheticSceneSpec {
  int width = 160;
  int height = 120;
  int frames = 48;
  double cell_px = 4.0;
  int motion_begin = 12;
  int motion_end = 36;
  int candidate_copies = 5;   // exact box plus jittered copies per object
  int random_candidates = 10;
  SyntheticNoise noise;
  std::uint64_t rng_seed = 0;
  std::vector<SyntheticVideoSpec> videos;

  void validate() const;
};

double motion_progress(const SyntheticSceneSpec& spec, int t);
BoundingBox object_box(const SyntheticSceneSpec& spec, const SceneObject& o, int t);
double object_orientation(const SyntheticSceneSpec& spec, const SceneObject& o, int t);
// Texture value in [0, 255] at object-local coordinates in [-0.5, 0.5]^2.
double texture_value(int texture, double u, double v, double brightness, double phase);

VideoBundle render_video(const SyntheticSceneSpec& spec, const SyntheticVideoSpec& video);
// In-memory set: every entry carries its rendered bundle.
SetSpec synth_generate(const SyntheticSceneSpec& spec, const std::string& set_id);

// Scenes whose planted objects satisfy their sentence, plus a look-alike
// decoy group replaying the same motion and a fixture that looks the same in
// every video.
struct PlantedSetOptions {
  int videos = 5;
  int min_classes = 2;
  int max_classes = 3;
  double decoy_prob = 0.8;
  bool fixture = true;
  SyntheticNoise noise;
};

SyntheticSceneSpec planted_scene(std::uint64_t seed, const PlantedSetOptions& options);

}  // namespace codetect
