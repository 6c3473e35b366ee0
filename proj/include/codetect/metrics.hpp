#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "codetect/core.hpp"

namespace codetect {

// Human boxes for one instance: frame -> annotator boxes.
struct AnnotationTrack {
  std::string video_id;
  std::string instance_id;
  std::map<int, std::vector<BoundingBox>> frames;
};

double iou(const BoundingBox& a, const BoundingBox& b);

// IoU of one output box against each annotator box of a frame.
std::vector<double> annotator_ious(const BoundingBox& out, std::span<const BoundingBox> annotators);
double iou_frame(const BoundingBox& out, std::span<const BoundingBox> annotators);
double acc_frame(const BoundingBox& out, std::span<const BoundingBox> annotators, double threshold);

// Per-frame annotator IoUs for one produced track; unannotated frames are
// skipped.
struct InstanceEval {
  std::string video_id;
  std::string instance_id;
  std::vector<int> frames;
  std::vector<std::vector<double>> ious;  // per frame, per annotator

  double iou_object() const;
  double acc_object(double threshold) const;
};

InstanceEval evaluate_instance(const Proposal& track, const AnnotationTrack& truth);

struct SetEval {
  std::string set_id;
  std::string run_id;
  std::vector<InstanceEval> instances;

  double iou_set() const;
  double acc_set(double threshold) const;
};

// 0.00, 0.01, ..., 1.00
std::vector<double> threshold_grid();

// Mean IoU_object over every instance of every run and set.
double iou_dataset(std::span<const SetEval> sets);
double acc_dataset(std::span<const SetEval> sets, double threshold);
std::vector<double> acc_curve(std::span<const SetEval> sets);

// Mean over frames with >= 2 annotators of the mean pairwise IoU.
double intercoder_agreement(std::span<const AnnotationTrack> annotations);

struct SetFailure {
  std::string set_id;
  std::string code;
  std::string message;
};

struct VariantResult {
  std::string variant;
  std::vector<SetEval> sets;
};

struct NamedCurve {
  std::string name;
  std::vector<double> acc;  // Acc_dataset on threshold_grid()
};

struct EvaluationReport {
  std::vector<VariantResult> variants;
  std::vector<SetFailure> failures;

  const VariantResult* find(const std::string& variant) const;
  nlohmann::json to_json() const;
  std::vector<NamedCurve> curves() const;
  // threshold column followed by one Acc_dataset column per variant
  std::string curves_csv() const;
  // gnuplot script plotting the curves held inline
  std::string gnuplot_script() const;
};

std::vector<NamedCurve> curves_from_report(const nlohmann::json& report);
// threshold column followed by one column per curve
std::string curves_csv(const std::vector<NamedCurve>& curves);
std::string gnuplot_script(const std::vector<NamedCurve>& curves);

}  // namespace codetect
