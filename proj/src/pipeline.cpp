#include "codetect/pipeline.hpp"

#include <array>
#include <filesystem>

#include "codetect/io.hpp"
#include "codetect/rng.hpp"

namespace codetect {

void PipelineConfig::validate() const {
  if (n < 1 || k < 1 || m < 1 || l < 1) throw Error(ErrorCode::InvalidArgument, "N, K, M and L must be >= 1");
  if (variants.empty()) throw Error(ErrorCode::InvalidArgument, "no variant requested");
  bp.validate();
}

const VideoWork& PreparedSet::video(const std::string& id) const {
  for (const auto& v : videos) {
    if (v.entry.video_id == id) return v;
  }
  throw Error(ErrorCode::InvalidArgument, "video '" + id + "' is not in set '" + spec.set_id + "'");
}

std::shared_ptr<const VideoBundle> load_entry(const VideoEntry& entry, const std::string& base_dir) {
  if (entry.data) return entry.data;
  const std::filesystem::path dir = std::filesystem::path(base_dir) / entry.bundle;
  auto bundle = std::make_shared<VideoBundle>(io::load_bundle(dir));
  if (bundle->meta.id() != entry.video_id) {
    throw Error(ErrorCode::Format, "bundle '" + dir.string() + "' holds video '" + bundle->meta.id() + "'");
  }
  return bundle;
}

std::uint64_t set_seed(std::uint64_t seed, const SetSpec& set) {
  return Rng::derive_seed(seed, "set/" + set.set_id + "/run/" + std::to_string(set.run_id));
}

VideoScores score_video(const VideoWork& video, const FlowRange& range, const PredicateConstants& constants) {
  const auto& b = *video.bundle;
  PredicateContext ctx{&b.meta, &b.flow, constants, range};
  VideoScores s;
  s.k = video.proposals.size();
  for (const auto& p : video.proposals) {
    s.med_flow.push_back(med_flow_mag(p, ctx).value());
    s.temp_coher.push_back(temp_coher(p, ctx).value());
  }
  for (const auto& atom : video.conjunction.atoms) {
    const auto arity = predicate_arity(atom.predicate);
    if (!arity) throw Error(ErrorCode::UnknownPredicate, "unknown predicate '" + atom.predicate + "'");
    if (*arity == 1) {
      if (s.unary.contains(atom.predicate)) continue;
      auto& col = s.unary[atom.predicate];
      for (const auto& p : video.proposals) col.push_back(eval_unary(atom.predicate, p, ctx).value());
    } else {
      if (s.binary.contains(atom.predicate)) continue;
      auto& table = s.binary[atom.predicate];
      table.reserve(s.k * s.k);
      for (const auto& p1 : video.proposals) {
        for (const auto& p2 : video.proposals) table.push_back(eval_binary(atom.predicate, p1, p2, ctx).value());
      }
    }
  }
  return s;
}

std::vector<ProposalDescriptors> describe_proposals(const GrayVideo& frames, const std::vector<Proposal>& proposals,
                                                    int m) {
  // Stationary tubes repeat boxes a lot; describe each distinct crop once.
  std::map<std::array<int, 5>, DetectionDescriptors> cache;
  std::vector<ProposalDescriptors> out;
  out.reserve(proposals.size());
  for (const auto& p : proposals) {
    if (p.frame_count() > frames.frame_count()) {
      throw Error(ErrorCode::DimMismatch, "frames do not cover proposals of '" + p.video_id() + "'");
    }
    ProposalDescriptors pd;
    for (const auto& d : sample_detections(p, m)) {
      const auto b = frames.crop_bounds(d.box, kMinCropSide);
      const std::array<int, 5> key{d.frame, b[0], b[1], b[2], b[3]};
      auto it = cache.find(key);
      if (it == cache.end()) it = cache.emplace(key, describe_crop(frames.crop(d.frame, d.box, kMinCropSide))).first;
      pd.push_back(it->second);
    }
    out.push_back(std::move(pd));
  }
  return out;
}

PreparedSet propose_set(const SetSpec& spec, const PipelineConfig& config, const std::string& base_dir) {
  config.validate();
  if (spec.videos.empty()) throw Error(ErrorCode::InvalidArgument, "set '" + spec.set_id + "' has no videos");
  PreparedSet set;
  set.spec = spec;

  SamplerConfig sampler;
  sampler.k = config.k;
  sampler.n = config.n;
  sampler.rng_seed = set_seed(config.seed, spec);
  const FlowAdvectionTracker tracker;

  std::vector<double> raw_medians;
  for (const auto& entry : spec.videos) {
    VideoWork w{entry, load_entry(entry, base_dir), {}, {}};
    const auto& b = *w.bundle;
    if (b.flow.frame_count() < b.meta.frame_count()) {
      throw Error(ErrorCode::DimMismatch, "flow of '" + entry.video_id + "' does not cover the video");
    }
    const auto candidates = CandidateSet::merge(b.meta, b.edgeboxes, "edgeboxes", b.mcg, "mcg", config.n);
    w.proposals = generate_proposals(b.meta, candidates, b.flow, sampler, tracker);
    for (const auto& p : w.proposals) raw_medians.push_back(med_flow_mag_raw(p, b.flow));
    set.videos.push_back(std::move(w));
  }
  // Flow scores are normalized over every proposal in the set.
  set.flow_range = flow_range_of(raw_medians);
  return set;
}

void score_set(PreparedSet& set, const semparse::RuleSet& rules, const PipelineConfig& config) {
  PredicateConstants constants;
  constants.endpoint_window = config.l;
  constants.validate();
  set.scores.clear();
  set.inputs.clear();
  for (auto& w : set.videos) {
    w.conjunction = semparse::parse_sentence(w.entry.sentence, rules);
    set.scores[w.entry.video_id] = score_video(w, set.flow_range, constants);
    set.inputs.push_back({w.entry.video_id, w.conjunction});
  }
}

void describe_set(PreparedSet& set, const PipelineConfig& config) {
  const auto pairs = similarity_pairs(set.inputs);
  std::map<std::string, std::vector<ProposalDescriptors>> descriptors;
  for (const auto& [a, b] : pairs) {
    for (const auto* id : {&a, &b}) {
      if (descriptors.contains(*id)) continue;
      const auto& w = set.video(*id);
      if (!w.bundle->frames) {
        throw Error(ErrorCode::MissingDescriptor, "video '" + *id + "' has no frames for descriptors");
      }
      descriptors[*id] = describe_proposals(*w.bundle->frames, w.proposals, config.m);
    }
  }
  set.similarity = SimilarityMatrix::compute(descriptors, pairs);
}

PreparedSet prepare_set(const SetSpec& spec, const semparse::RuleSet& rules, const PipelineConfig& config,
                        const std::string& base_dir) {
  PreparedSet set = propose_set(spec, config, base_dir);
  score_set(set, rules, config);
  if (std::any_of(config.variants.begin(), config.variants.end(), uses_similarity)) describe_set(set, config);
  return set;
}

VariantOutcome infer_variant(const PreparedSet& set, Variant variant, const BPConfig& bp) {
  VariantOutcome out;
  out.variant = variant;
  out.graph = build_graph(set.spec.set_id, set.inputs, set.scores,
                          set.similarity ? &*set.similarity : nullptr, variant);
  out.assignment = max_sum_bp(out.graph, bp);
  for (std::size_t v = 0; v < out.graph.vertices.size(); ++v) {
    const auto& vx = out.graph.vertices[v];
    const auto k = out.assignment.labels[v];
    out.selections.push_back({vx.video_id, vx.instance_id, vx.class_noun, k, set.video(vx.video_id).proposals[k]});
  }
  SetEval eval{set.spec.set_id, std::to_string(set.spec.run_id), {}};
  for (const auto& s : out.selections) {
    for (const auto& track : set.video(s.video_id).bundle->annotations) {
      if (track.instance_id == s.instance_id) {
        eval.instances.push_back(evaluate_instance(s.track, track));
        break;
      }
    }
  }
  if (!eval.instances.empty()) out.evaluation = std::move(eval);
  return out;
}

std::optional<SetEval> evaluate_selections(const SetSpec& spec, const std::vector<Selection>& selections,
                                           const std::string& base_dir) {
  std::map<std::string, std::shared_ptr<const VideoBundle>> bundles;
  for (const auto& e : spec.videos) bundles[e.video_id] = load_entry(e, base_dir);
  SetEval eval{spec.set_id, std::to_string(spec.run_id), {}};
  for (const auto& s : selections) {
    auto it = bundles.find(s.video_id);
    if (it == bundles.end()) {
      throw Error(ErrorCode::InvalidArgument, "video '" + s.video_id + "' is not in set '" + spec.set_id + "'");
    }
    for (const auto& track : it->second->annotations) {
      if (track.instance_id == s.instance_id) {
        eval.instances.push_back(evaluate_instance(s.track, track));
        break;
      }
    }
  }
  if (eval.instances.empty()) return std::nullopt;
  return eval;
}

nlohmann::json selection_to_json(const SetSpec& spec, const VariantOutcome& outcome) {
  nlohmann::json out{{"format", "codetect.selection"},
                     {"version", 1},
                     {"set_id", spec.set_id},
                     {"run_id", spec.run_id},
                     {"variant", to_string(outcome.variant)},
                     {"tracks", nlohmann::json::array()}};
  for (const auto& s : outcome.selections) {
    const auto track = io::proposals_to_json({s.track})["proposals"][0];
    out["tracks"].push_back({{"video_id", s.video_id},
                             {"instance_id", s.instance_id},
                             {"class", s.class_noun},
                             {"proposal", s.proposal},
                             {"track", track}});
  }
  return out;
}

std::vector<Selection> selections_from_json(const nlohmann::json& j) {
  if (j.value("format", std::string()) != "codetect.selection") {
    throw Error(ErrorCode::Format, "expected a codetect.selection document");
  }
  std::vector<Selection> out;
  try {
    for (const auto& jt : j.at("tracks")) {
      nlohmann::json wrapped{{"format", "codetect.proposals"}, {"version", 1}, {"proposals", {jt.at("track")}}};
      out.push_back({jt.at("video_id").get<std::string>(), jt.at("instance_id").get<std::string>(),
                     jt.value("class", std::string()), jt.value("proposal", std::size_t{0}),
                     io::proposals_from_json(wrapped).at(0)});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, std::string("selection: ") + e.what());
  }
  return out;
}

nlohmann::json similarity_to_json(const SimilarityMatrix& s) {
  nlohmann::json out{{"format", "codetect.similarity"},
                     {"version", 1},
                     {"chi2_range", {s.chi2_scale().lo, s.chi2_scale().hi}},
                     {"l2_range", {s.l2_scale().lo, s.l2_scale().hi}},
                     {"tables", nlohmann::json::array()}};
  for (const auto& [pair, t] : s.tables()) {
    out["tables"].push_back(
        {{"a", pair.first}, {"b", pair.second}, {"rows", t.rows()}, {"cols", t.cols()}, {"values", t.values()}});
  }
  return out;
}

PipelineResult run_pipeline(const Manifest& manifest, const PipelineConfig& config) {
  config.validate();
  const semparse::RuleSet rules = semparse::resolve_rules(manifest.rules);
  PipelineResult result;
  for (auto v : config.variants) result.report.variants.push_back({std::string(to_string(v)), {}});

  for (const auto& spec : manifest.sets) {
    try {
      const PreparedSet prepared = prepare_set(spec, rules, config, manifest.base_dir);
      SetOutcome outcome{spec.set_id, spec.run_id, {}};
      for (auto v : config.variants) outcome.variants.push_back(infer_variant(prepared, v, config.bp));
      // Only publish once every variant of the set succeeded.
      for (std::size_t i = 0; i < outcome.variants.size(); ++i) {
        if (outcome.variants[i].evaluation) result.report.variants[i].sets.push_back(*outcome.variants[i].evaluation);
      }
      result.sets.push_back(std::move(outcome));
    } catch (const Error& e) {
      result.report.failures.push_back({spec.set_id, std::string(to_string(e.code())), e.what()});
    }
  }
  return result;
}

}  // namespace codetect
