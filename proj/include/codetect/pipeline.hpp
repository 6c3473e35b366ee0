#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "codetect/dataset.hpp"
#include "codetect/inference.hpp"
#include "codetect/metrics.hpp"
#include "codetect/predicates.hpp"
#include "codetect/proposals.hpp"
#include "codetect/semparse.hpp"
#include "codetect/similarity.hpp"

namespace codetect {

struct PipelineConfig {
  std::size_t n = 500;  // candidates per frame
  std::size_t k = 240;  // proposals per video
  int m = 20;           // sampled detections per proposal
  int l = 15;           // endpoint window
  std::uint64_t seed = 0;
  BPConfig bp;
  std::vector<Variant> variants = all_variants();

  void validate() const;
};

struct VideoWork {
  VideoEntry entry;
  std::shared_ptr<const VideoBundle> bundle;
  semparse::PredicateConjunction conjunction;
  std::vector<Proposal> proposals;
};

// Everything up to graph construction for one codetection set.
struct PreparedSet {
  SetSpec spec;
  std::vector<VideoWork> videos;
  FlowRange flow_range;
  std::map<std::string, VideoScores> scores;
  std::optional<SimilarityMatrix> similarity;
  std::vector<GraphInput> inputs;

  const VideoWork& video(const std::string& id) const;
};

std::shared_ptr<const VideoBundle> load_entry(const VideoEntry& entry, const std::string& base_dir);

std::uint64_t set_seed(std::uint64_t seed, const SetSpec& set);

// Proposal tables of every predicate the conjunction mentions, plus the flow
// and temporal-coherence columns the FLOW variants use.
VideoScores score_video(const VideoWork& video, const FlowRange& range, const PredicateConstants& constants);

// Descriptors of the M sampled detections of each proposal.
std::vector<ProposalDescriptors> describe_proposals(const GrayVideo& frames, const std::vector<Proposal>& proposals,
                                                    int m);

// The stages of prepare_set, exposed for the stage-by-stage CLI commands.
// propose_set loads the bundles and samples proposals under the set seed.
PreparedSet propose_set(const SetSpec& spec, const PipelineConfig& config, const std::string& base_dir = ".");
// Parses the sentences and fills the score tables.
void score_set(PreparedSet& set, const semparse::RuleSet& rules, const PipelineConfig& config);
// Similarity tables for every same-class pair of instances.
void describe_set(PreparedSet& set, const PipelineConfig& config);

// All three stages; similarity only when a requested variant needs it.
PreparedSet prepare_set(const SetSpec& spec, const semparse::RuleSet& rules, const PipelineConfig& config,
                        const std::string& base_dir = ".");

struct Selection {
  std::string video_id;
  std::string instance_id;
  std::string class_noun;
  std::size_t proposal = 0;
  Proposal track;
};

struct VariantOutcome {
  Variant variant = Variant::SimSent;
  CodetectionGraph graph;
  Assignment assignment;
  std::vector<Selection> selections;
  std::optional<SetEval> evaluation;  // absent when nothing is annotated
};

VariantOutcome infer_variant(const PreparedSet& set, Variant variant, const BPConfig& bp);

// Scores selected tracks against the annotations of their bundles; instances
// without an annotation track are skipped.
std::optional<SetEval> evaluate_selections(const SetSpec& spec, const std::vector<Selection>& selections,
                                           const std::string& base_dir = ".");

nlohmann::json selection_to_json(const SetSpec& spec, const VariantOutcome& outcome);
std::vector<Selection> selections_from_json(const nlohmann::json& j);
nlohmann::json similarity_to_json(const SimilarityMatrix& s);

struct SetOutcome {
  std::string set_id;
  int run_id = 1;
  std::vector<VariantOutcome> variants;
};

struct PipelineResult {
  EvaluationReport report;
  std::vector<SetOutcome> sets;

  // 0 when every set ran, 2 when at least one set failed.
  int exit_code() const { return report.failures.empty() ? 0 : 2; }
};

// Sets are independent: a failing set is recorded in the report and the
// remaining sets still run.
PipelineResult run_pipeline(const Manifest& manifest, const PipelineConfig& config);

}  // namespace codetect
