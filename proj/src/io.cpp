#include "codetect/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace codetect::io {

namespace {

void expect_format(const json& j, std::string_view format) {
  if (!j.is_object() || !j.contains("format") || j.at("format") != format) {
    throw Error(ErrorCode::Format, "expected a '" + std::string(format) + "' document");
  }
  if (j.value("version", 0) != 1) throw Error(ErrorCode::Format, "unsupported " + std::string(format) + " version");
}

template <typename F>
auto guarded(const std::string& what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Format, what + ": " + e.what());
  }
}

json score_or_null(double x) { return std::isinf(x) && x < 0 ? json(nullptr) : json(x); }
double score_from(const json& j) { return j.is_null() ? kNegInf : j.get<double>(); }

}  // namespace

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Format, path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(1) + "\n"); }

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << text;
}

json box_to_json(const BoundingBox& b) { return json::array({b.x_min(), b.y_min(), b.x_max(), b.y_max()}); }

BoundingBox box_from_json(const json& j) {
  if (!j.is_array() || j.size() < 4) throw Error(ErrorCode::Format, "box must be [x0, y0, x1, y1]");
  return BoundingBox(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>());
}

json meta_to_json(const VideoMeta& m) {
  return {{"format", "codetect.meta"}, {"version", 1},     {"video_id", m.id()},
          {"width", m.width()},        {"height", m.height()}, {"frames", m.frame_count()},
          {"fps", m.fps()}};
}

VideoMeta meta_from_json(const json& j) {
  expect_format(j, "codetect.meta");
  return guarded("meta", [&] {
    return VideoMeta(j.at("video_id").get<std::string>(), j.at("width").get<double>(),
                     j.at("height").get<double>(), j.at("frames").get<int>(), j.value("fps", 30.0));
  });
}

json candidates_to_json(const std::vector<std::vector<BoundingBox>>& frames) {
  json out{{"format", "codetect.candidates"}, {"version", 1}, {"frames", json::array()}};
  for (const auto& f : frames) {
    json boxes = json::array();
    for (const auto& b : f) boxes.push_back(box_to_json(b));
    out["frames"].push_back(std::move(boxes));
  }
  return out;
}

std::vector<std::vector<BoundingBox>> candidates_from_json(const json& j) {
  expect_format(j, "codetect.candidates");
  return guarded("candidates", [&] {
    std::vector<std::vector<BoundingBox>> frames;
    for (const auto& f : j.at("frames")) {
      auto& out = frames.emplace_back();
      // A fifth element (generator score) is accepted and ignored.
      for (const auto& b : f) out.push_back(box_from_json(b));
    }
    return frames;
  });
}

json flow_to_json(const FlowGrid& f) {
  json out{{"format", "codetect.flow"},
           {"version", 1},
           {"grid", {{"gx", f.grid_x()}, {"gy", f.grid_y()}, {"cell_px", f.cell_px()}}},
           {"frames", json::array()}};
  for (int t = 1; t <= f.frame_count(); ++t) {
    const auto& fr = f.frame(t);
    json jf{{"u", fr.u}, {"v", fr.v}};
    if (!fr.theta.empty()) jf["theta"] = fr.theta;
    out["frames"].push_back(std::move(jf));
  }
  return out;
}

FlowGrid flow_from_json(const json& j) {
  expect_format(j, "codetect.flow");
  return guarded("flow", [&] {
    const auto& g = j.at("grid");
    std::vector<FlowGrid::Frame> frames;
    for (const auto& f : j.at("frames")) {
      FlowGrid::Frame fr;
      fr.u = f.at("u").get<std::vector<float>>();
      fr.v = f.at("v").get<std::vector<float>>();
      if (f.contains("theta")) fr.theta = f.at("theta").get<std::vector<float>>();
      frames.push_back(std::move(fr));
    }
    return FlowGrid(g.at("gx").get<int>(), g.at("gy").get<int>(), g.at("cell_px").get<double>(),
                    std::move(frames));
  });
}

void write_pgm_frames(const fs::path& path, const GrayVideo& video) {
  std::ostringstream os;
  for (int t = 1; t <= video.frame_count(); ++t) {
    os << "P5\n" << video.width() << ' ' << video.height() << "\n255\n";
    const auto& f = video.frame(t);
    os.write(reinterpret_cast<const char*>(f.data()), static_cast<std::streamsize>(f.size()));
  }
  write_text(path, os.str());
}

GrayVideo read_pgm_frames(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  auto token = [&]() {
    std::string tok;
    char c;
    while (in.get(c)) {
      if (c == '#') {
        std::string skip;
        std::getline(in, skip);
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        if (!tok.empty()) break;
        continue;
      }
      tok.push_back(c);
    }
    return tok;
  };
  std::vector<std::vector<std::uint8_t>> frames;
  int width = 0, height = 0;
  while (true) {
    const std::string magic = token();
    if (magic.empty()) break;
    if (magic != "P5") throw Error(ErrorCode::Format, path.string() + ": only binary P5 frames are supported");
    int w = 0, h = 0, maxval = 0;
    try {
      w = std::stoi(token());
      h = std::stoi(token());
      maxval = std::stoi(token());
    } catch (const std::exception&) {
      throw Error(ErrorCode::Format, path.string() + ": malformed PGM header");
    }
    if (maxval != 255 || w <= 0 || h <= 0) throw Error(ErrorCode::Format, path.string() + ": need 8-bit frames");
    if (frames.empty()) {
      width = w;
      height = h;
    } else if (w != width || h != height) {
      throw Error(ErrorCode::Format, path.string() + ": frame sizes differ");
    }
    std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
    in.read(reinterpret_cast<char*>(px.data()), static_cast<std::streamsize>(px.size()));
    if (in.gcount() != static_cast<std::streamsize>(px.size())) {
      throw Error(ErrorCode::Format, path.string() + ": truncated frame");
    }
    frames.push_back(std::move(px));
  }
  if (frames.empty()) throw Error(ErrorCode::Format, path.string() + ": no frames");
  return GrayVideo(width, height, std::move(frames));
}

json annotations_to_json(const std::vector<AnnotationTrack>& tracks) {
  json out{{"format", "codetect.annotations"}, {"version", 1}, {"instances", json::array()}};
  for (const auto& t : tracks) {
    json ji{{"instance_id", t.instance_id}, {"frames", json::array()}};
    for (const auto& [frame, boxes] : t.frames) {
      json jb = json::array();
      for (const auto& b : boxes) jb.push_back(box_to_json(b));
      ji["frames"].push_back({{"frame", frame}, {"boxes", std::move(jb)}});
    }
    out["instances"].push_back(std::move(ji));
  }
  return out;
}

std::vector<AnnotationTrack> annotations_from_json(const json& j, const std::string& video_id) {
  expect_format(j, "codetect.annotations");
  return guarded("annotations", [&] {
    std::vector<AnnotationTrack> out;
    for (const auto& ji : j.at("instances")) {
      AnnotationTrack t{video_id, ji.at("instance_id").get<std::string>(), {}};
      for (const auto& f : ji.at("frames")) {
        auto& boxes = t.frames[f.at("frame").get<int>()];
        for (const auto& b : f.at("boxes")) boxes.push_back(box_from_json(b));
      }
      out.push_back(std::move(t));
    }
    return out;
  });
}

void save_bundle(const fs::path& dir, const VideoBundle& b) {
  fs::create_directories(dir);
  write_json(dir / "meta.json", meta_to_json(b.meta));
  write_json(dir / "candidates_edgeboxes.json", candidates_to_json(b.edgeboxes));
  write_json(dir / "candidates_mcg.json", candidates_to_json(b.mcg));
  write_text(dir / "flow.json", flow_to_json(b.flow).dump() + "\n");
  if (b.frames) write_pgm_frames(dir / "frames.pgm", *b.frames);
  if (!b.annotations.empty()) write_json(dir / "annotations.json", annotations_to_json(b.annotations));
}

VideoBundle load_bundle(const fs::path& dir) {
  auto meta = meta_from_json(read_json(dir / "meta.json"));
  auto optional_candidates = [&](const char* name) {
    const auto p = dir / name;
    return fs::exists(p) ? candidates_from_json(read_json(p)) : std::vector<std::vector<BoundingBox>>{};
  };
  auto eb = optional_candidates("candidates_edgeboxes.json");
  auto mcg = optional_candidates("candidates_mcg.json");
  if (eb.empty() && mcg.empty()) throw Error(ErrorCode::Io, "no candidate file in '" + dir.string() + "'");
  auto flow = flow_from_json(read_json(dir / "flow.json"));
  std::optional<GrayVideo> frames;
  if (fs::exists(dir / "frames.pgm")) frames = read_pgm_frames(dir / "frames.pgm");
  std::vector<AnnotationTrack> ann;
  if (fs::exists(dir / "annotations.json")) ann = annotations_from_json(read_json(dir / "annotations.json"), meta.id());
  return VideoBundle{std::move(meta), std::move(eb), std::move(mcg), std::move(flow), std::move(frames), std::move(ann)};
}

json manifest_to_json(const Manifest& m) {
  json out{{"format", "codetect.manifest"}, {"version", 1}, {"rules", m.rules}, {"sets", json::array()}};
  for (const auto& s : m.sets) {
    json js{{"set_id", s.set_id}, {"run_id", s.run_id}, {"videos", json::array()}};
    for (const auto& v : s.videos) {
      js["videos"].push_back({{"video_id", v.video_id}, {"sentence", v.sentence}, {"bundle", v.bundle}});
    }
    out["sets"].push_back(std::move(js));
  }
  return out;
}

Manifest manifest_from_json(const json& j, const std::string& base_dir) {
  expect_format(j, "codetect.manifest");
  return guarded("manifest", [&] {
    Manifest m;
    m.rules = j.value("rules", std::string("new_dataset"));
    m.base_dir = base_dir;
    for (const auto& js : j.at("sets")) {
      SetSpec s{js.at("set_id").get<std::string>(), js.value("run_id", 1), {}};
      for (const auto& jv : js.at("videos")) {
        s.videos.push_back({jv.at("video_id").get<std::string>(), jv.at("sentence").get<std::string>(),
                            jv.value("bundle", jv.at("video_id").get<std::string>()), nullptr});
      }
      if (s.videos.empty()) throw Error(ErrorCode::Format, "set '" + s.set_id + "' has no videos");
      m.sets.push_back(std::move(s));
    }
    return m;
  });
}

Manifest load_manifest(const fs::path& path) {
  return manifest_from_json(read_json(path), path.has_parent_path() ? path.parent_path().string() : ".");
}

json conjunction_to_json(const semparse::PredicateConjunction& c) {
  json out{{"sentence", c.sentence}, {"conjunction", c.to_string()}, {"instances", json::array()},
           {"atoms", json::array()}};
  for (const auto& i : c.instances) out["instances"].push_back({{"id", i.id}, {"class", i.class_noun}});
  for (const auto& a : c.atoms) out["atoms"].push_back({{"predicate", a.predicate}, {"args", a.args}});
  return out;
}

json proposals_to_json(const std::vector<Proposal>& proposals) {
  json out{{"format", "codetect.proposals"}, {"version", 1}, {"proposals", json::array()}};
  for (const auto& p : proposals) {
    json boxes = json::array(), orient = json::array();
    for (const auto& d : p.detections()) {
      boxes.push_back(box_to_json(d.box));
      orient.push_back(d.orientation ? json(*d.orientation) : json(nullptr));
    }
    out["proposals"].push_back({{"video_id", p.video_id()},
                                {"motion_class", to_string(p.motion_class())},
                                {"seed_frame", p.seed_frame()},
                                {"boxes", std::move(boxes)},
                                {"orientation", std::move(orient)}});
  }
  return out;
}

std::vector<Proposal> proposals_from_json(const json& j) {
  expect_format(j, "codetect.proposals");
  return guarded("proposals", [&] {
    std::vector<Proposal> out;
    for (const auto& jp : j.at("proposals")) {
      std::vector<Detection> dets;
      const auto& boxes = jp.at("boxes");
      for (std::size_t i = 0; i < boxes.size(); ++i) {
        std::optional<double> o;
        if (jp.contains("orientation") && !jp["orientation"][i].is_null()) o = jp["orientation"][i].get<double>();
        dets.push_back(Detection{static_cast<int>(i) + 1, box_from_json(boxes[i]), o});
      }
      out.emplace_back(jp.at("video_id").get<std::string>(), std::move(dets),
                       motion_class_from_string(jp.at("motion_class").get<std::string>()),
                       jp.at("seed_frame").get<int>());
    }
    return out;
  });
}

json graph_to_json(const CodetectionGraph& g) {
  json out{{"format", "codetect.graph"}, {"version", 1}, {"set_id", g.set_id}, {"vertices", json::array()},
           {"edges", json::array()}};
  for (const auto& v : g.vertices) {
    json unary = json::array();
    for (double x : v.unary) unary.push_back(score_or_null(x));
    out["vertices"].push_back({{"instance_id", v.instance_id},
                               {"video_id", v.video_id},
                               {"class", v.class_noun},
                               {"unary", std::move(unary)}});
  }
  for (const auto& e : g.edges) {
    json table = json::array();
    for (double x : e.table) table.push_back(score_or_null(x));
    json je{{"kind", to_string(e.kind)}, {"v", e.v}, {"u", e.u}, {"table", std::move(table)}};
    if (!e.predicate.empty()) je["predicate"] = e.predicate;
    out["edges"].push_back(std::move(je));
  }
  return out;
}

CodetectionGraph graph_from_json(const json& j) {
  expect_format(j, "codetect.graph");
  auto g = guarded("graph", [&] {
    CodetectionGraph g;
    g.set_id = j.value("set_id", std::string());
    for (const auto& jv : j.at("vertices")) {
      Vertex v{jv.value("instance_id", std::string()), jv.value("video_id", std::string()),
               jv.value("class", std::string()), {}};
      for (const auto& x : jv.at("unary")) v.unary.push_back(score_from(x));
      g.vertices.push_back(std::move(v));
    }
    for (const auto& je : j.at("edges")) {
      const auto kind = je.at("kind").get<std::string>();
      if (kind != "class" && kind != "predicate") throw Error(ErrorCode::Format, "unknown edge kind '" + kind + "'");
      Edge e{kind == "class" ? EdgeKind::Class : EdgeKind::Predicate, je.at("v").get<std::size_t>(),
             je.at("u").get<std::size_t>(), {}, je.value("predicate", std::string())};
      for (const auto& x : je.at("table")) e.table.push_back(score_from(x));
      g.edges.push_back(std::move(e));
    }
    return g;
  });
  g.validate();
  return g;
}

json assignment_to_json(const CodetectionGraph& g, const Assignment& a) {
  json out{{"format", "codetect.assignment"}, {"version", 1},      {"set_id", g.set_id},
           {"objective", score_or_null(a.objective)},           {"iterations", a.iterations},
           {"converged", a.converged},                          {"labels", json::array()}};
  for (std::size_t v = 0; v < g.vertices.size(); ++v) {
    out["labels"].push_back({{"instance_id", g.vertices[v].instance_id},
                             {"video_id", g.vertices[v].video_id},
                             {"proposal", a.labels[v]}});
  }
  return out;
}

}  // namespace codetect::io
