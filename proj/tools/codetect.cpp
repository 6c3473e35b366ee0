// codetect: command-line front end for the codetection pipeline.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "codetect/io.hpp"
#include "codetect/pipeline.hpp"
#include "codetect/synth.hpp"

namespace fs = std::filesystem;
using namespace codetect;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFatal = 1;
constexpr int kExitPartial = 2;

struct Options {
  std::size_t n = 500;
  std::size_t k = 240;
  int m = 20;
  int l = 15;
  std::vector<std::string> variants;
  std::uint64_t seed = 0;
  std::string sets;
  std::string out = ".";
  std::string rules;
  int bp_iters = 100;
  double bp_damping = 0.5;

  PipelineConfig config() const {
    PipelineConfig c;
    c.n = n;
    c.k = k;
    c.m = m;
    c.l = l;
    c.seed = seed;
    c.bp.max_iters = bp_iters;
    c.bp.damping = bp_damping;
    if (!variants.empty()) {
      c.variants.clear();
      for (const auto& v : variants) c.variants.push_back(variant_from_string(v));
    }
    c.validate();
    return c;
  }
};

void add_pipeline_flags(CLI::App* cmd, Options& o, bool with_variant) {
  cmd->add_option("--sets", o.sets, "codetection set manifest (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--n", o.n, "candidates per frame");
  cmd->add_option("--k", o.k, "proposals per video");
  cmd->add_option("--m", o.m, "sampled detections per proposal");
  cmd->add_option("--l", o.l, "endpoint window (frames)");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--rules", o.rules, "rule set name or file, overriding the manifest");
  if (with_variant) {
    cmd->add_option("--variant", o.variants, "sim, flow, sent, sim-flow or sim-sent (repeatable)")
        ->check(CLI::IsMember({"sim", "flow", "sent", "sim-flow", "sim-sent"}));
    cmd->add_option("--bp-iters", o.bp_iters, "belief propagation iterations");
    cmd->add_option("--bp-damping", o.bp_damping, "message damping in [0,1)");
  }
}

Manifest manifest_of(const Options& o) {
  Manifest m = io::load_manifest(o.sets);
  if (!o.rules.empty()) m.rules = o.rules;
  return m;
}

// Runs body for every set, recording failures instead of stopping.
template <class Body>
int for_each_set(const Manifest& m, Body body) {
  int failed = 0;
  for (const auto& spec : m.sets) {
    try {
      body(spec);
    } catch (const Error& e) {
      std::cerr << "set " << spec.set_id << ": " << e.what() << '\n';
      ++failed;
    }
  }
  return failed == 0 ? kExitOk : kExitPartial;
}

fs::path set_dir(const Options& o, const SetSpec& spec) {
  return fs::path(o.out) / (spec.set_id + "-run" + std::to_string(spec.run_id));
}

void write_report(const fs::path& dir, const EvaluationReport& report) {
  io::write_json(dir / "report.json", report.to_json());
  io::write_text(dir / "curves.csv", report.curves_csv());
  io::write_text(dir / "curves.gp", report.gnuplot_script());
}

int cmd_parse(const std::string& rules_name, const std::vector<std::string>& sentences, const std::string& file,
              const std::string& out) {
  const auto rules = semparse::resolve_rules(rules_name);
  std::vector<std::string> all = sentences;
  if (!file.empty()) {
    std::ifstream in(file);
    if (!in) throw Error(ErrorCode::Io, "cannot read '" + file + "'");
    for (std::string line; std::getline(in, line);) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) all.push_back(line);
    }
  }
  json doc{{"format", "codetect.parses"}, {"version", 1}, {"parses", json::array()}};
  int failed = 0;
  for (const auto& s : all) {
    try {
      doc["parses"].push_back(io::conjunction_to_json(semparse::parse_sentence(s, rules)));
    } catch (const Error& e) {
      doc["parses"].push_back({{"sentence", s}, {"error", std::string(to_string(e.code()))}, {"message", e.what()}});
      ++failed;
    }
  }
  if (out.empty()) {
    std::cout << doc.dump(1) << '\n';
  } else {
    io::write_json(out, doc);
  }
  return failed == 0 ? kExitOk : kExitPartial;
}

int cmd_propose(const Options& o) {
  const auto m = manifest_of(o);
  const auto config = o.config();
  return for_each_set(m, [&](const SetSpec& spec) {
    const auto set = propose_set(spec, config, m.base_dir);
    const auto dir = set_dir(o, spec);
    for (const auto& w : set.videos) io::write_json(dir / (w.entry.video_id + ".proposals.json"), io::proposals_to_json(w.proposals));
  });
}

int cmd_similarity(const Options& o) {
  const auto m = manifest_of(o);
  const auto rules = semparse::resolve_rules(m.rules);
  const auto config = o.config();
  return for_each_set(m, [&](const SetSpec& spec) {
    auto set = propose_set(spec, config, m.base_dir);
    score_set(set, rules, config);
    describe_set(set, config);
    io::write_json(set_dir(o, spec) / "similarity.json", similarity_to_json(*set.similarity));
  });
}

int cmd_infer(const Options& o, const std::string& graph_file) {
  if (!graph_file.empty()) {
    const auto g = io::graph_from_json(io::read_json(graph_file));
    BPConfig bp;
    bp.max_iters = o.bp_iters;
    bp.damping = o.bp_damping;
    bp.validate();
    const auto a = max_sum_bp(g, bp);
    const fs::path out = fs::path(o.out).extension() == ".json" ? fs::path(o.out) : fs::path(o.out) / "assignment.json";
    io::write_json(out, io::assignment_to_json(g, a));
    return kExitOk;
  }
  if (o.sets.empty()) throw Error(ErrorCode::InvalidArgument, "infer needs --sets or --graph");
  const auto m = manifest_of(o);
  const auto rules = semparse::resolve_rules(m.rules);
  const auto config = o.config();
  return for_each_set(m, [&](const SetSpec& spec) {
    const auto set = prepare_set(spec, rules, config, m.base_dir);
    for (auto v : config.variants) {
      const auto outcome = infer_variant(set, v, config.bp);
      const auto dir = set_dir(o, spec) / std::string(to_string(v));
      io::write_json(dir / "graph.json", io::graph_to_json(outcome.graph));
      io::write_json(dir / "assignment.json", io::assignment_to_json(outcome.graph, outcome.assignment));
      io::write_json(dir / "selection.json", selection_to_json(spec, outcome));
    }
  });
}

// Reads the selection files an earlier `infer` wrote under --out.
int cmd_evaluate(const Options& o) {
  const auto m = manifest_of(o);
  const auto config = o.config();
  EvaluationReport report;
  for (auto v : config.variants) report.variants.push_back({std::string(to_string(v)), {}});
  for (const auto& spec : m.sets) {
    try {
      std::vector<std::optional<SetEval>> evals;
      for (auto v : config.variants) {
        const auto path = set_dir(o, spec) / std::string(to_string(v)) / "selection.json";
        evals.push_back(evaluate_selections(spec, selections_from_json(io::read_json(path)), m.base_dir));
      }
      for (std::size_t i = 0; i < evals.size(); ++i) {
        if (evals[i]) report.variants[i].sets.push_back(*evals[i]);
      }
    } catch (const Error& e) {
      std::cerr << "set " << spec.set_id << ": " << e.what() << '\n';
      report.failures.push_back({spec.set_id, std::string(to_string(e.code())), e.what()});
    }
  }
  write_report(o.out, report);
  return report.failures.empty() ? kExitOk : kExitPartial;
}

int cmd_run(const Options& o) {
  const auto m = manifest_of(o);
  const auto result = run_pipeline(m, o.config());
  for (const auto& f : result.report.failures) std::cerr << "set " << f.set_id << ": " << f.message << '\n';
  for (const auto& set : result.sets) {
    const SetSpec* spec = nullptr;
    for (const auto& s : m.sets) {
      if (s.set_id == set.set_id && s.run_id == set.run_id) spec = &s;
    }
    for (const auto& v : set.variants) {
      io::write_json(set_dir(o, *spec) / std::string(to_string(v.variant)) / "selection.json",
                     selection_to_json(*spec, v));
    }
  }
  write_report(o.out, result.report);
  for (const auto& v : result.report.variants) {
    if (v.sets.empty()) continue;
    std::cout << v.variant << " IoU_dataset " << iou_dataset(v.sets) << '\n';
  }
  return result.exit_code();
}

struct SynthOptions {
  std::string out = "synth";
  std::uint64_t seed = 0;
  int count = 1;
  int videos = 5;
  std::string noise = "moderate";
  bool no_decoys = false;
  bool no_fixture = false;
};

int cmd_synth(const SynthOptions& s) {
  Manifest m;
  m.rules = "new_dataset";
  for (int i = 0; i < s.count; ++i) {
    PlantedSetOptions opts;
    opts.videos = s.videos;
    if (s.noise == "moderate") opts.noise = moderate_noise();
    if (s.no_decoys) opts.decoy_prob = 0.0;
    opts.fixture = !s.no_fixture;
    const std::string set_id = "synth" + std::to_string(i + 1);
    auto set = synth_generate(planted_scene(Rng::derive_seed(s.seed, set_id), opts), set_id);
    for (auto& e : set.videos) {
      e.bundle = set_id + "/" + e.video_id;
      io::save_bundle(fs::path(s.out) / e.bundle, *e.data);
      e.data = nullptr;
    }
    m.sets.push_back(std::move(set));
  }
  io::write_json(fs::path(s.out) / "manifest.json", io::manifest_to_json(m));
  return kExitOk;
}

int cmd_plot(const std::string& report, const std::string& out) {
  const auto curves = curves_from_report(io::read_json(report));
  io::write_text(fs::path(out) / "curves.csv", curves_csv(curves));
  io::write_text(fs::path(out) / "curves.gp", gnuplot_script(curves));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sentence-directed video object codetection"};
  app.require_subcommand(1);

  std::string rules = "new_dataset", sentences_file, parse_out;
  std::vector<std::string> sentences;
  auto* parse = app.add_subcommand("parse", "parse sentences into predicate conjunctions");
  parse->add_option("--rules", rules, "rule set name (new_dataset, cad120) or rule file");
  parse->add_option("--sentence", sentences, "sentence to parse (repeatable)");
  parse->add_option("--file", sentences_file, "file with one sentence per line")->check(CLI::ExistingFile);
  parse->add_option("--out", parse_out, "output JSON file (default stdout)");

  Options propose_opts, sim_opts, infer_opts, eval_opts, run_opts;
  auto* propose = app.add_subcommand("propose", "sample object proposals for every video");
  add_pipeline_flags(propose, propose_opts, false);
  auto* similarity = app.add_subcommand("similarity", "compute similarity tables for every set");
  add_pipeline_flags(similarity, sim_opts, false);

  std::string graph_file;
  auto* infer = app.add_subcommand("infer", "build graphs and run belief propagation");
  add_pipeline_flags(infer, infer_opts, true);
  infer->get_option("--sets")->required(false);
  infer->add_option("--graph", graph_file, "run inference on one graph JSON file instead")->check(CLI::ExistingFile);

  auto* evaluate = app.add_subcommand("evaluate", "score the selections written by infer");
  add_pipeline_flags(evaluate, eval_opts, true);
  auto* run = app.add_subcommand("run", "end-to-end run with report");
  add_pipeline_flags(run, run_opts, true);

  SynthOptions synth_opts;
  auto* synth = app.add_subcommand("synth", "generate planted synthetic codetection sets");
  synth->add_option("--out", synth_opts.out, "output directory");
  synth->add_option("--seed", synth_opts.seed, "master seed");
  synth->add_option("--count", synth_opts.count, "number of sets")->check(CLI::PositiveNumber);
  synth->add_option("--videos", synth_opts.videos, "videos per set")->check(CLI::PositiveNumber);
  synth->add_option("--noise", synth_opts.noise, "none or moderate")->check(CLI::IsMember({"none", "moderate"}));
  synth->add_flag("--no-decoys", synth_opts.no_decoys, "omit the look-alike decoy groups");
  synth->add_flag("--no-fixture", synth_opts.no_fixture, "omit the shared fixture object");

  std::string report_file, plot_out = ".";
  auto* plot = app.add_subcommand("plot", "emit curve CSV and a gnuplot script from a report");
  plot->add_option("--report", report_file, "report.json written by run or evaluate")
      ->required()
      ->check(CLI::ExistingFile);
  plot->add_option("--out", plot_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitFatal;
  }

  try {
    if (*parse) return cmd_parse(rules, sentences, sentences_file, parse_out);
    if (*propose) return cmd_propose(propose_opts);
    if (*similarity) return cmd_similarity(sim_opts);
    if (*infer) return cmd_infer(infer_opts, graph_file);
    if (*evaluate) return cmd_evaluate(eval_opts);
    if (*run) return cmd_run(run_opts);
    if (*synth) return cmd_synth(synth_opts);
    if (*plot) return cmd_plot(report_file, plot_out);
  } catch (const std::exception& e) {
    std::cerr << "codetect: " << e.what() << '\n';
    return kExitFatal;
  }
  return kExitFatal;
}
