#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "codetect/dataset.hpp"
#include "codetect/inference.hpp"
#include "codetect/semparse.hpp"

namespace codetect::io {

using nlohmann::json;
namespace fs = std::filesystem;

json read_json(const fs::path& path);
// Pretty-printed with a trailing newline.
void write_json(const fs::path& path, const json& j);
void write_text(const fs::path& path, const std::string& text);

json box_to_json(const BoundingBox& b);
BoundingBox box_from_json(const json& j);

json meta_to_json(const VideoMeta& m);
VideoMeta meta_from_json(const json& j);

// {"format":"codetect.candidates","version":1,"frames":[[[x0,y0,x1,y1,(score)],...],...]}
json candidates_to_json(const std::vector<std::vector<BoundingBox>>& frames);
std::vector<std::vector<BoundingBox>> candidates_from_json(const json& j);

// {"format":"codetect.flow","version":1,"grid":{...},"frames":[{"u":[],"v":[],"theta":[]}]}
json flow_to_json(const FlowGrid& f);
FlowGrid flow_from_json(const json& j);

// Concatenated binary PGM (P5) images, one per frame.
void write_pgm_frames(const fs::path& path, const GrayVideo& video);
GrayVideo read_pgm_frames(const fs::path& path);

json annotations_to_json(const std::vector<AnnotationTrack>& tracks);
std::vector<AnnotationTrack> annotations_from_json(const json& j, const std::string& video_id);

// Directory layout: meta.json, candidates_edgeboxes.json, candidates_mcg.json,
// flow.json, frames.pgm (optional), annotations.json (optional).
void save_bundle(const fs::path& dir, const VideoBundle& bundle);
VideoBundle load_bundle(const fs::path& dir);

json manifest_to_json(const Manifest& m);
Manifest manifest_from_json(const json& j, const std::string& base_dir);
Manifest load_manifest(const fs::path& path);

json conjunction_to_json(const semparse::PredicateConjunction& c);

json proposals_to_json(const std::vector<Proposal>& proposals);
std::vector<Proposal> proposals_from_json(const json& j);

// -inf table entries are written as null.
json graph_to_json(const CodetectionGraph& g);
CodetectionGraph graph_from_json(const json& j);

json assignment_to_json(const CodetectionGraph& g, const Assignment& a);

}  // namespace codetect::io
