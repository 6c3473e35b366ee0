#include "codetect/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

namespace codetect {

namespace {

double mean(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

std::string fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

}  // namespace

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double w = std::min(a.x_max(), b.x_max()) - std::max(a.x_min(), b.x_min());
  const double h = std::min(a.y_max(), b.y_max()) - std::max(a.y_min(), b.y_min());
  if (w <= 0.0 || h <= 0.0) return 0.0;
  const double inter = w * h;
  return inter / (box_area(a) + box_area(b) - inter);
}

std::vector<double> annotator_ious(const BoundingBox& out, std::span<const BoundingBox> annotators) {
  std::vector<double> v;
  v.reserve(annotators.size());
  for (const auto& a : annotators) v.push_back(iou(out, a));
  return v;
}

double iou_frame(const BoundingBox& out, std::span<const BoundingBox> annotators) {
  if (annotators.empty()) throw Error(ErrorCode::NoOverlapFrames, "frame has no annotator boxes");
  const auto v = annotator_ious(out, annotators);
  return mean(v);
}

double acc_frame(const BoundingBox& out, std::span<const BoundingBox> annotators, double threshold) {
  if (annotators.empty()) throw Error(ErrorCode::NoOverlapFrames, "frame has no annotator boxes");
  for (const auto& a : annotators) {
    if (iou(out, a) >= threshold) return 1.0;
  }
  return 0.0;
}

double InstanceEval::iou_object() const {
  if (ious.empty()) throw Error(ErrorCode::NoOverlapFrames, "instance '" + instance_id + "' has no annotated frame");
  double s = 0.0;
  for (const auto& f : ious) s += mean(f);
  return s / static_cast<double>(ious.size());
}

double InstanceEval::acc_object(double threshold) const {
  if (ious.empty()) throw Error(ErrorCode::NoOverlapFrames, "instance '" + instance_id + "' has no annotated frame");
  double hits = 0.0;
  for (const auto& f : ious) {
    if (std::any_of(f.begin(), f.end(), [&](double x) { return x >= threshold; })) hits += 1.0;
  }
  return hits / static_cast<double>(ious.size());
}

InstanceEval evaluate_instance(const Proposal& track, const AnnotationTrack& truth) {
  InstanceEval e{truth.video_id, truth.instance_id, {}, {}};
  for (const auto& [t, boxes] : truth.frames) {
    if (boxes.empty() || t < 1 || t > track.frame_count()) continue;
    e.frames.push_back(t);
    e.ious.push_back(annotator_ious(track.at(t).box, boxes));
  }
  if (e.frames.empty()) {
    throw Error(ErrorCode::NoOverlapFrames, "no annotated frame overlaps the track of '" + truth.instance_id + "'");
  }
  return e;
}

double SetEval::iou_set() const {
  if (instances.empty()) throw Error(ErrorCode::NoOverlapFrames, "set '" + set_id + "' has no evaluated instance");
  double s = 0.0;
  for (const auto& i : instances) s += i.iou_object();
  return s / static_cast<double>(instances.size());
}

double SetEval::acc_set(double threshold) const {
  if (instances.empty()) throw Error(ErrorCode::NoOverlapFrames, "set '" + set_id + "' has no evaluated instance");
  double s = 0.0;
  for (const auto& i : instances) s += i.acc_object(threshold);
  return s / static_cast<double>(instances.size());
}

std::vector<double> threshold_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 100; ++i) g.push_back(i / 100.0);
  return g;
}

double iou_dataset(std::span<const SetEval> sets) {
  double s = 0.0;
  std::size_t n = 0;
  for (const auto& set : sets) {
    for (const auto& i : set.instances) {
      s += i.iou_object();
      ++n;
    }
  }
  if (n == 0) throw Error(ErrorCode::NoOverlapFrames, "no evaluated instance in the dataset");
  return s / static_cast<double>(n);
}

double acc_dataset(std::span<const SetEval> sets, double threshold) {
  if (sets.empty()) throw Error(ErrorCode::NoOverlapFrames, "no evaluated set in the dataset");
  double s = 0.0;
  for (const auto& set : sets) s += set.acc_set(threshold);
  return s / static_cast<double>(sets.size());
}

std::vector<double> acc_curve(std::span<const SetEval> sets) {
  std::vector<double> c;
  for (double t : threshold_grid()) c.push_back(acc_dataset(sets, t));
  return c;
}

double intercoder_agreement(std::span<const AnnotationTrack> annotations) {
  double total = 0.0;
  std::size_t frames = 0;
  for (const auto& track : annotations) {
    for (const auto& [t, boxes] : track.frames) {
      if (boxes.size() < 2) continue;
      double s = 0.0;
      std::size_t pairs = 0;
      for (std::size_t i = 0; i < boxes.size(); ++i) {
        for (std::size_t j = i + 1; j < boxes.size(); ++j) {
          s += iou(boxes[i], boxes[j]);
          ++pairs;
        }
      }
      total += s / static_cast<double>(pairs);
      ++frames;
    }
  }
  if (frames == 0) throw Error(ErrorCode::InsufficientAnnotators, "no frame has two or more annotators");
  return total / static_cast<double>(frames);
}

const VariantResult* EvaluationReport::find(const std::string& variant) const {
  for (const auto& v : variants) {
    if (v.variant == variant) return &v;
  }
  return nullptr;
}

nlohmann::json EvaluationReport::to_json() const {
  nlohmann::json out;
  out["format"] = "codetect.report";
  out["version"] = 1;
  out["thresholds"] = threshold_grid();
  out["variants"] = nlohmann::json::array();
  for (const auto& v : variants) {
    nlohmann::json jv;
    jv["variant"] = v.variant;
    if (!v.sets.empty()) {
      jv["iou_dataset"] = iou_dataset(v.sets);
      jv["acc_curve"] = acc_curve(v.sets);
    }
    jv["sets"] = nlohmann::json::array();
    for (const auto& s : v.sets) {
      nlohmann::json js{{"set_id", s.set_id}, {"run_id", s.run_id}, {"iou_set", s.iou_set()}};
      js["instances"] = nlohmann::json::array();
      for (const auto& i : s.instances) {
        js["instances"].push_back({{"video_id", i.video_id},
                                   {"instance_id", i.instance_id},
                                   {"frames", i.frames.size()},
                                   {"iou_object", i.iou_object()}});
      }
      jv["sets"].push_back(std::move(js));
    }
    out["variants"].push_back(std::move(jv));
  }
  out["failures"] = nlohmann::json::array();
  for (const auto& f : failures) {
    out["failures"].push_back({{"set_id", f.set_id}, {"code", f.code}, {"message", f.message}});
  }
  return out;
}

std::vector<NamedCurve> EvaluationReport::curves() const {
  std::vector<NamedCurve> out;
  for (const auto& v : variants) {
    if (!v.sets.empty()) out.push_back({v.variant, acc_curve(v.sets)});
  }
  return out;
}

std::string EvaluationReport::curves_csv() const { return codetect::curves_csv(curves()); }

std::string EvaluationReport::gnuplot_script() const { return codetect::gnuplot_script(curves()); }

std::vector<NamedCurve> curves_from_report(const nlohmann::json& report) {
  if (report.value("format", std::string()) != "codetect.report") {
    throw Error(ErrorCode::Format, "expected a codetect.report document");
  }
  std::vector<NamedCurve> out;
  try {
    for (const auto& v : report.at("variants")) {
      if (!v.contains("acc_curve")) continue;
      out.push_back({v.at("variant").get<std::string>(), v.at("acc_curve").get<std::vector<double>>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, std::string("report: ") + e.what());
  }
  const auto n = threshold_grid().size();
  for (const auto& c : out) {
    if (c.acc.size() != n) throw Error(ErrorCode::Format, "curve '" + c.name + "' does not match the threshold grid");
  }
  return out;
}

std::string curves_csv(const std::vector<NamedCurve>& curves) {
  std::ostringstream os;
  os << "threshold";
  for (const auto& c : curves) os << ',' << c.name;
  os << '\n';
  const auto grid = threshold_grid();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    os << fixed(grid[i], 2);
    for (const auto& c : curves) os << ',' << fixed(c.acc[i], 6);
    os << '\n';
  }
  return os.str();
}

std::string gnuplot_script(const std::vector<NamedCurve>& curves) {
  std::ostringstream os;
  os << "set datafile separator ','\n"
     << "set xlabel 'IoU threshold'\nset ylabel 'accuracy'\n"
     << "set xrange [0:1]\nset yrange [0:1]\nset key top right\n"
     << "$curves << EOD\n";
  const std::string csv = curves_csv(curves);
  os << csv.substr(csv.find('\n') + 1) << "EOD\n";
  if (curves.empty()) return os.str();
  os << "plot ";
  for (std::size_t i = 0; i < curves.size(); ++i) {
    if (i > 0) os << ", \\\n     ";
    os << "$curves using 1:" << i + 2 << " with lines title '" << curves[i].name << "'";
  }
  os << '\n';
  return os.str();
}

}  // namespace codetect
