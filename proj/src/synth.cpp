#include "codetect/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>

#include "codetect/rng.hpp"

namespace codetect {

namespace {

constexpr double kTau = 2.0 * std::numbers::pi;

// Nouns the shipped rules know as plain singular nouns.
constexpr std::array<std::string_view, 10> kClassPool = {
    "cup", "bowl", "box", "bucket", "cabbage", "mug", "pineapple", "ketchup", "mouthwash", "juice"};

struct TextureParams {
  double base, contrast, freq, angle;
  int kind;
};

TextureParams texture_params(int texture) {
  Rng rng = Rng(0x5eed7e47u).child("texture/" + std::to_string(texture));
  TextureParams p;
  p.base = rng.uniform(60.0, 190.0);
  p.contrast = rng.uniform(35.0, 65.0);
  p.freq = rng.uniform(1.5, 3.5);
  p.angle = rng.uniform(0.0, std::numbers::pi);
  p.kind = static_cast<int>(static_cast<unsigned>(texture) % 4u);
  return p;
}

bool inside_frame(const SyntheticSceneSpec& s, const SceneObject& o) {
  for (int t = 1; t <= s.frames; ++t) {
    const double c = motion_progress(s, t);
    const double cx = o.cx + c * o.motion.dx, cy = o.cy + c * o.motion.dy, h = 0.5 * o.size;
    if (cx - h < 0 || cy - h < 0 || cx + h > s.width || cy + h > s.height) return false;
  }
  return true;
}

// Axis-aligned hull of every box the object occupies.
std::array<double, 4> swept(const SceneObject& o) {
  const double h = 0.5 * o.size;
  return {std::min(o.cx, o.cx + o.motion.dx) - h, std::min(o.cy, o.cy + o.motion.dy) - h,
          std::max(o.cx, o.cx + o.motion.dx) + h, std::max(o.cy, o.cy + o.motion.dy) + h};
}

bool overlaps(const std::array<double, 4>& a, const std::array<double, 4>& b, double margin) {
  return a[0] < b[2] + margin && b[0] < a[2] + margin && a[1] < b[3] + margin && b[1] < a[3] + margin;
}

}  // namespace

std::string_view to_string(TrajectoryKind k) {
  switch (k) {
    case TrajectoryKind::Static: return "static";
    case TrajectoryKind::Linear: return "linear";
    case TrajectoryKind::Lift: return "lift";
    case TrajectoryKind::Lower: return "lower";
    case TrajectoryKind::Rotate: return "rotate";
  }
  return "?";
}

SyntheticNoise moderate_noise() { return {2.0, 0.1, 6.0}; }

void SyntheticSceneSpec::validate() const {
  if (width < 16 || height < 16 || frames < 2 || cell_px <= 0) {
    throw Error(ErrorCode::InvalidArgument, "synthetic frame geometry is invalid");
  }
  if (!(1 <= motion_begin && motion_begin < motion_end && motion_end <= frames)) {
    throw Error(ErrorCode::InvalidArgument, "motion window must satisfy 1 <= begin < end <= T");
  }
  if (candidate_copies < 1 || random_candidates < 0) {
    throw Error(ErrorCode::InvalidArgument, "candidate counts are invalid");
  }
  for (const auto& v : videos) {
    for (const auto& o : v.objects) {
      const auto& m = o.motion;
      const bool ok = (m.kind == TrajectoryKind::Static && m.dx == 0 && m.dy == 0 && m.rotation == 0) ||
                      (m.kind == TrajectoryKind::Lift && m.dy < 0) ||
                      (m.kind == TrajectoryKind::Lower && m.dy > 0) ||
                      (m.kind == TrajectoryKind::Linear && (m.dx != 0 || m.dy != 0)) ||
                      (m.kind == TrajectoryKind::Rotate && m.rotation != 0);
      if (!ok || o.size <= 1.0) {
        throw Error(ErrorCode::SpecInfeasible, "object in '" + v.video_id + "' does not match its trajectory kind");
      }
      if (!inside_frame(*this, o)) {
        throw Error(ErrorCode::SpecInfeasible, "object in '" + v.video_id + "' leaves the frame");
      }
    }
  }
}

double motion_progress(const SyntheticSceneSpec& spec, int t) {
  return std::clamp(static_cast<double>(t - spec.motion_begin) / (spec.motion_end - spec.motion_begin), 0.0, 1.0);
}

BoundingBox object_box(const SyntheticSceneSpec& spec, const SceneObject& o, int t) {
  const double c = motion_progress(spec, t), h = 0.5 * o.size;
  const double cx = o.cx + c * o.motion.dx, cy = o.cy + c * o.motion.dy;
  return BoundingBox(cx - h, cy - h, cx + h, cy + h);
}

double object_orientation(const SyntheticSceneSpec& spec, const SceneObject& o, int t) {
  return wrap_angle(motion_progress(spec, t) * o.motion.rotation);
}

namespace {

double texture_at(const TextureParams& p, double u, double v, double brightness, double phase) {
  const double ph = kTau * phase;
  double pattern = 0.0;
  switch (p.kind) {
    case 0:
      pattern = std::sin(kTau * p.freq * (u * std::cos(p.angle) + v * std::sin(p.angle)) + ph);
      break;
    case 1:
      pattern = std::sin(kTau * p.freq * u + ph) * std::sin(kTau * p.freq * v + ph) * 1.6;
      break;
    case 2:
      pattern = std::cos(kTau * p.freq * 1.5 * std::hypot(u, v) + ph);
      break;
    default:
      pattern = 0.5 * (std::sin(kTau * p.freq * (u + v) + ph) + std::sin(kTau * p.freq * (u - v) * 0.7 + ph));
      break;
  }
  return std::clamp(p.base + brightness + p.contrast * std::clamp(pattern, -1.0, 1.0), 0.0, 255.0);
}

}  // namespace

double texture_value(int texture, double u, double v, double brightness, double phase) {
  return texture_at(texture_params(texture), u, v, brightness, phase);
}

VideoBundle render_video(const SyntheticSceneSpec& spec, const SyntheticVideoSpec& video) {
  Rng rng = Rng(spec.rng_seed).child("render/" + video.video_id);
  const int W = spec.width, H = spec.height, T = spec.frames;
  VideoMeta meta(video.video_id, W, H, T);

  // Static background: a smooth low-contrast pattern plus fixed grain.
  const double p1 = rng.uniform(0.0, kTau), p2 = rng.uniform(0.0, kTau);
  std::vector<double> background(static_cast<std::size_t>(W * H));
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      background[static_cast<std::size_t>(y * W + x)] =
          105.0 + 20.0 * std::sin(0.07 * x + p1) * std::cos(0.05 * y + p2) + 4.0 * rng.normal();
    }
  }

  const int gx = static_cast<int>(std::ceil(W / spec.cell_px));
  const int gy = static_cast<int>(std::ceil(H / spec.cell_px));
  std::vector<FlowGrid::Frame> flow(static_cast<std::size_t>(T));
  std::vector<std::vector<std::uint8_t>> frames(static_cast<std::size_t>(T));
  std::vector<std::vector<BoundingBox>> eb(static_cast<std::size_t>(T)), mcg(static_cast<std::size_t>(T));

  for (int t = 1; t <= T; ++t) {
    const auto ti = static_cast<std::size_t>(t - 1);
    std::vector<double> img = background;
    auto& fr = flow[ti];
    fr.u.assign(static_cast<std::size_t>(gx * gy), 0.0f);
    fr.v.assign(fr.u.size(), 0.0f);
    fr.theta.assign(fr.u.size(), 0.0f);

    for (const auto& o : video.objects) {
      const BoundingBox b = object_box(spec, o, t);
      const double theta = object_orientation(spec, o, t);
      const double ct = std::cos(-theta), st = std::sin(-theta);
      const TextureParams tp = texture_params(o.texture);
      for (int y = std::max(0, static_cast<int>(b.y_min())); y < std::min(H, static_cast<int>(std::ceil(b.y_max()))); ++y) {
        for (int x = std::max(0, static_cast<int>(b.x_min())); x < std::min(W, static_cast<int>(std::ceil(b.x_max()))); ++x) {
          const double px = x + 0.5, py = y + 0.5;
          if (px < b.x_min() || px >= b.x_max() || py < b.y_min() || py >= b.y_max()) continue;
          const double u = (px - b.center_x()) / o.size, v = (py - b.center_y()) / o.size;
          img[static_cast<std::size_t>(y * W + x)] =
              texture_at(tp, ct * u - st * v, st * u + ct * v, o.brightness, o.phase);
        }
      }
      // Flow at t carries the object to its t+1 position; cells touched by
      // the box take the object's motion (topmost object wins).
      double du = 0.0, dv = 0.0;
      if (t < T) {
        const BoundingBox next = object_box(spec, o, t + 1);
        du = next.center_x() - b.center_x();
        dv = next.center_y() - b.center_y();
      }
      const int cx0 = std::max(0, static_cast<int>(std::floor(b.x_min() / spec.cell_px)));
      const int cx1 = std::min(gx, static_cast<int>(std::ceil(b.x_max() / spec.cell_px)));
      const int cy0 = std::max(0, static_cast<int>(std::floor(b.y_min() / spec.cell_px)));
      const int cy1 = std::min(gy, static_cast<int>(std::ceil(b.y_max() / spec.cell_px)));
      for (int cy = cy0; cy < cy1; ++cy) {
        for (int cx = cx0; cx < cx1; ++cx) {
          const auto i = static_cast<std::size_t>(cy * gx + cx);
          fr.u[i] = static_cast<float>(du);
          fr.v[i] = static_cast<float>(dv);
          fr.theta[i] = static_cast<float>(theta);
        }
      }
    }
    if (spec.noise.flow_noise > 0) {
      for (std::size_t i = 0; i < fr.u.size(); ++i) {
        fr.u[i] += static_cast<float>(spec.noise.flow_noise * rng.normal());
        fr.v[i] += static_cast<float>(spec.noise.flow_noise * rng.normal());
      }
    }

    auto& px = frames[ti];
    px.resize(img.size());
    for (std::size_t i = 0; i < img.size(); ++i) {
      const double n = spec.noise.pixel_noise > 0 ? spec.noise.pixel_noise * rng.normal() : 0.0;
      px[i] = static_cast<std::uint8_t>(std::lround(std::clamp(img[i] + n, 0.0, 255.0)));
    }

    // Candidates: every object's exact box and jittered copies, then random
    // boxes; alternately assigned to the two generator lists.
    std::vector<BoundingBox> cands;
    for (const auto& o : video.objects) {
      const BoundingBox b = object_box(spec, o, t);
      cands.push_back(b);
      for (int c = 1; c < spec.candidate_copies; ++c) {
        const double j = spec.noise.box_jitter_px;
        auto clamped = meta.clamp(b.x_min() + j * rng.uniform(-1, 1), b.y_min() + j * rng.uniform(-1, 1),
                                  b.x_max() + j * rng.uniform(-1, 1), b.y_max() + j * rng.uniform(-1, 1));
        cands.push_back(clamped ? *clamped : b);
      }
    }
    for (int r = 0; r < spec.random_candidates; ++r) {
      const double w = rng.uniform(12.0, 30.0), h = rng.uniform(12.0, 30.0);
      const double x = rng.uniform(0.0, W - w), y = rng.uniform(0.0, H - h);
      cands.emplace_back(x, y, x + w, y + h);
    }
    for (std::size_t i = 0; i < cands.size(); ++i) (i % 2 == 0 ? eb : mcg)[ti].push_back(cands[i]);
  }

  std::vector<AnnotationTrack> annotations;
  for (const auto& o : video.objects) {
    if (o.instance_id.empty()) continue;
    AnnotationTrack a{video.video_id, o.instance_id, {}};
    for (int t = 1; t <= T; ++t) a.frames[t] = {object_box(spec, o, t)};
    annotations.push_back(std::move(a));
  }
  return VideoBundle{std::move(meta),
                     std::move(eb),
                     std::move(mcg),
                     FlowGrid(gx, gy, spec.cell_px, std::move(flow)),
                     GrayVideo(W, H, std::move(frames)),
                     std::move(annotations)};
}

SetSpec synth_generate(const SyntheticSceneSpec& spec, const std::string& set_id) {
  spec.validate();
  SetSpec set{set_id, 1, {}};
  for (const auto& v : spec.videos) {
    auto bundle = std::make_shared<const VideoBundle>(render_video(spec, v));
    set.videos.push_back({v.video_id, v.sentence, v.video_id, std::move(bundle)});
  }
  return set;
}

namespace {

enum class Template { PutDownNear, CarryNear, PickUp, Pour, TakeOut };
constexpr std::array<Template, 5> kTemplates = {Template::PutDownNear, Template::CarryNear, Template::PickUp,
                                                Template::Pour, Template::TakeOut};

bool two_instances(Template t) { return t != Template::PickUp; }
// Vertical templates split the frame into left/right halves, horizontal ones
// into top/bottom halves.
bool vertical(Template t) { return t == Template::PutDownNear || t == Template::PickUp || t == Template::Pour; }

struct Region {
  double x0, y0, w, h;
};

struct Group {
  SceneObject mover;
  std::optional<SceneObject> reference;
  std::string sentence;
};

// Places one mover/reference pair for the template inside the region.
Group build_group(Template tpl, const Region& r, Rng& rng, bool leftwards) {
  Group g;
  SceneObject& x = g.mover;
  x.size = rng.uniform(18.0, 22.0);
  SceneObject y;
  y.size = rng.uniform(24.0, 28.0);
  const double W = 160.0, H = 120.0;
  const double dy = 0.4 * H, dx = 0.4 * W;
  switch (tpl) {
    case Template::PutDownNear: {
      y.cx = r.x0 + r.w / 2 + rng.uniform(-6, 6);
      y.cy = r.y0 + r.h - 0.5 * y.size - rng.uniform(2, 6);
      const double ex = y.cx + (rng.bernoulli(0.5) ? 1 : -1) * rng.uniform(4, 8);
      const double ey = y.cy - 6;
      x.cx = ex;
      x.cy = ey - dy;
      x.motion = {TrajectoryKind::Lower, 0.0, dy, 0.0};
      g.sentence = "The person put the {x} down near the {y}.";
      break;
    }
    case Template::CarryNear: {
      y.cy = r.y0 + r.h / 2 + rng.uniform(-4, 4);
      y.cx = leftwards ? 0.5 * y.size + rng.uniform(4, 10) : W - 0.5 * y.size - rng.uniform(4, 10);
      const double ex = y.cx + (leftwards ? 6 : -6), ey = y.cy - 5;
      x.cx = ex + (leftwards ? dx : -dx);
      x.cy = ey;
      x.motion = {TrajectoryKind::Linear, leftwards ? -dx : dx, 0.0, 0.0};
      g.sentence = leftwards ? "The person carried the {x} to the left near the {y}."
                             : "The person carried the {x} to the right near the {y}.";
      break;
    }
    case Template::PickUp: {
      x.cx = r.x0 + r.w / 2 + rng.uniform(-10, 10);
      x.cy = r.y0 + r.h - 0.5 * x.size - rng.uniform(4, 10);
      x.motion = {TrajectoryKind::Lift, 0.0, -dy, 0.0};
      g.sentence = "The person picked up the {x}.";
      break;
    }
    case Template::Pour: {
      y.cx = r.x0 + r.w / 2 + 12 + rng.uniform(-3, 3);
      y.cy = r.y0 + r.h - 0.5 * y.size - rng.uniform(4, 8);
      x.cx = y.cx - 28;
      x.cy = y.cy;
      x.motion = {TrajectoryKind::Rotate, 28.0, -36.0, 0.5 * std::numbers::pi};
      g.sentence = "The person poured the {x} into the {y}.";
      break;
    }
    case Template::TakeOut: {
      x.size = rng.uniform(14.0, 16.0);
      y.cy = r.y0 + r.h / 2 + rng.uniform(-4, 4);
      y.cx = leftwards ? W - 0.5 * y.size - rng.uniform(4, 10) : 0.5 * y.size + rng.uniform(4, 10);
      x.cx = y.cx;
      x.cy = y.cy;
      x.motion = {TrajectoryKind::Linear, leftwards ? -dx : dx, 0.0, 0.0};
      g.sentence = "The person took the {x} out of the {y}.";
      break;
    }
  }
  if (two_instances(tpl)) g.reference = y;
  return g;
}

std::string fill(std::string s, const std::string& x, const std::string& y) {
  if (auto p = s.find("{x}"); p != std::string::npos) s.replace(p, 3, x);
  if (auto p = s.find("{y}"); p != std::string::npos) s.replace(p, 3, y);
  return s;
}

}  // namespace

SyntheticSceneSpec planted_scene(std::uint64_t seed, const PlantedSetOptions& options) {
  if (options.videos < 1 || options.min_classes < 2 || options.max_classes < options.min_classes ||
      options.max_classes > static_cast<int>(kClassPool.size())) {
    throw Error(ErrorCode::InvalidArgument, "planted scene options are invalid");
  }
  Rng rng = Rng(seed).child("planted");
  SyntheticSceneSpec spec;
  spec.rng_seed = seed;
  spec.noise = options.noise;

  std::vector<std::string> pool(kClassPool.begin(), kClassPool.end());
  for (std::size_t i = pool.size(); i > 1; --i) std::swap(pool[i - 1], pool[rng.index(i)]);
  const int n_classes = options.min_classes + static_cast<int>(rng.index(
                                                  static_cast<std::size_t>(options.max_classes - options.min_classes + 1)));
  std::vector<std::string> classes(pool.begin(), pool.begin() + n_classes);
  auto class_texture = [&](const std::string& c) {
    return static_cast<int>(std::find(kClassPool.begin(), kClassPool.end(), c) - kClassPool.begin());
  };
  const int fixture_texture = 10 + static_cast<int>(rng.index(6));

  // Pick templates and classes so that every class shows up in two videos.
  struct Plan {
    Template tpl;
    std::string x, y;
  };
  std::vector<Plan> plans;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    plans.clear();
    std::map<std::string, int> uses;
    for (int v = 0; v < options.videos; ++v) {
      Plan p{kTemplates[rng.index(kTemplates.size())], classes[rng.index(classes.size())], {}};
      ++uses[p.x];
      if (two_instances(p.tpl)) {
        do p.y = classes[rng.index(classes.size())];
        while (p.y == p.x);
        ++uses[p.y];
      }
      plans.push_back(std::move(p));
    }
    if (options.videos < 2 ||
        std::all_of(classes.begin(), classes.end(), [&](const std::string& c) { return uses[c] >= 2; })) {
      break;
    }
  }

  int decoy_texture = 100;
  for (int v = 0; v < options.videos; ++v) {
    const Plan& plan = plans[static_cast<std::size_t>(v)];
    SyntheticVideoSpec video;
    video.video_id = "v" + std::to_string(v + 1);
    const bool first_half = rng.bernoulli(0.5);
    const bool leftwards = rng.bernoulli(0.5);
    const Region a = vertical(plan.tpl) ? Region{0, 0, 80, 120} : Region{0, 0, 160, 60};
    const Region b = vertical(plan.tpl) ? Region{80, 0, 80, 120} : Region{0, 60, 160, 60};

    Group planted = build_group(plan.tpl, first_half ? a : b, rng, leftwards);
    planted.mover.instance_id = plan.x;
    planted.mover.texture = class_texture(plan.x);
    planted.mover.brightness = rng.uniform(-3, 3);
    planted.mover.phase = rng.uniform(-0.03, 0.03);
    video.sentence = fill(planted.sentence, plan.x, plan.y);

    std::vector<SceneObject> statics, movers;
    if (planted.reference) {
      planted.reference->instance_id = plan.y;
      planted.reference->texture = class_texture(plan.y);
      planted.reference->brightness = rng.uniform(-3, 3);
      planted.reference->phase = rng.uniform(-0.03, 0.03);
      statics.push_back(*planted.reference);
    }
    movers.push_back(planted.mover);

    if (rng.bernoulli(options.decoy_prob)) {
      Group decoy = build_group(plan.tpl, first_half ? b : a, rng, leftwards);
      decoy.mover.texture = decoy_texture++ + 37 * static_cast<int>(rng.index(1000));
      decoy.mover.brightness = rng.uniform(-3, 3);
      movers.push_back(decoy.mover);
      if (decoy.reference) {
        decoy.reference->texture = decoy_texture++ + 37 * static_cast<int>(rng.index(1000));
        statics.push_back(*decoy.reference);
      }
    }

    // The fixture and a plain static distractor go wherever nothing moves.
    auto place = [&](SceneObject o) {
      for (int tries = 0; tries < 400; ++tries) {
        o.cx = rng.uniform(0.5 * o.size + 1, 160 - 0.5 * o.size - 1);
        o.cy = rng.uniform(0.5 * o.size + 1, 120 - 0.5 * o.size - 1);
        bool clear = true;
        for (const auto* group : {&statics, &movers}) {
          for (const auto& other : *group) clear = clear && !overlaps(swept(o), swept(other), 3.0);
        }
        if (clear) {
          statics.push_back(o);
          return;
        }
      }
    };
    if (options.fixture) {
      SceneObject f;
      f.size = 20.0;
      f.texture = fixture_texture;
      place(f);
    }
    SceneObject extra;
    extra.size = rng.uniform(16.0, 24.0);
    extra.texture = decoy_texture++ + 37 * static_cast<int>(rng.index(1000));
    place(extra);

    video.objects = statics;
    video.objects.insert(video.objects.end(), movers.begin(), movers.end());
    spec.videos.push_back(std::move(video));
  }
  spec.validate();
  return spec;
}

}  // namespace codetect
