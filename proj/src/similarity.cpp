#include "codetect/similarity.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace codetect {

namespace {

constexpr int kCell = 8;
constexpr int kCellsPerSide = kDescriptorWindow / kCell;  // 8
constexpr int kBins = 9;
constexpr int kBlocksPerSide = kCellsPerSide - 1;  // 7
constexpr int kGrid = 4;
constexpr int kIntensityBins = 8;

void require_crop(const RasterCrop& crop) {
  if (crop.width <= 0 || crop.height <= 0 ||
      crop.pixels.size() != static_cast<std::size_t>(crop.width) * static_cast<std::size_t>(crop.height)) {
    throw Error(ErrorCode::InvalidArgument, "malformed raster crop");
  }
}

void require_source_size(const RasterCrop& crop) {
  require_crop(crop);
  if (crop.width < kMinCropSide || crop.height < kMinCropSide) {
    throw Error(ErrorCode::DegenerateCrop, "crop " + std::to_string(crop.width) + "x" +
                                               std::to_string(crop.height) + " is below 8x8");
  }
}

RasterCrop to_window(const RasterCrop& crop) {
  require_source_size(crop);
  if (crop.width == kDescriptorWindow && crop.height == kDescriptorWindow) return crop;
  return resize_crop(crop, kDescriptorWindow, kDescriptorWindow);
}

// Magnitude and unsigned orientation in [0, pi) on the window, central
// differences with replicated borders.
struct GradientField {
  std::vector<float> magnitude;
  std::vector<float> angle;
};

GradientField gradients(const RasterCrop& w) {
  const int n = kDescriptorWindow;
  GradientField g;
  g.magnitude.resize(static_cast<std::size_t>(n * n));
  g.angle.resize(static_cast<std::size_t>(n * n));
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double gx = double(w.at(std::min(x + 1, n - 1), y)) - double(w.at(std::max(x - 1, 0), y));
      const double gy = double(w.at(x, std::min(y + 1, n - 1))) - double(w.at(x, std::max(y - 1, 0)));
      const auto i = static_cast<std::size_t>(y * n + x);
      g.magnitude[i] = static_cast<float>(std::hypot(gx, gy));
      double a = std::atan2(gy, gx);
      if (a < 0) a += std::numbers::pi;
      if (a >= std::numbers::pi) a -= std::numbers::pi;
      g.angle[i] = static_cast<float>(a);
    }
  }
  return g;
}

// Same field for the window rotated by quarter_turns: pixels move with the
// grid and every orientation shifts by a quarter turn per step.
GradientField rotate_field(const GradientField& g, int quarter_turns) {
  const int n = kDescriptorWindow;
  GradientField out;
  out.magnitude.resize(g.magnitude.size());
  out.angle.resize(g.angle.size());
  const double shift = quarter_turns * 0.5 * std::numbers::pi;
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      int sx = x, sy = y;
      // Inverse of one counter-clockwise step: new(x, y) = old(n-1-y, x).
      for (int k = 0; k < quarter_turns; ++k) {
        const int px = n - 1 - sy, py = sx;
        sx = px;
        sy = py;
      }
      const auto src = static_cast<std::size_t>(sy * n + sx);
      const auto dst = static_cast<std::size_t>(y * n + x);
      out.magnitude[dst] = g.magnitude[src];
      double a = std::fmod(double(g.angle[src]) + shift, std::numbers::pi);
      if (a < 0) a += std::numbers::pi;
      out.angle[dst] = static_cast<float>(a);
    }
  }
  return out;
}

Descriptor hog_from_field(const GradientField& g) {
  const int n = kDescriptorWindow;
  std::vector<double> cells(static_cast<std::size_t>(kCellsPerSide * kCellsPerSide * kBins), 0.0);
  const double bin_width = std::numbers::pi / kBins;
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const auto i = static_cast<std::size_t>(y * n + x);
      const double mag = g.magnitude[i];
      if (mag == 0.0) continue;
      // Bin b is centred on b * pi/9; votes are split linearly between the
      // two nearest centres.
      const double pos = g.angle[i] / bin_width;
      const int b0 = static_cast<int>(std::floor(pos));
      const double frac = pos - b0;
      const int cell = (y / kCell) * kCellsPerSide + (x / kCell);
      const auto base = static_cast<std::size_t>(cell * kBins);
      cells[base + static_cast<std::size_t>(((b0 % kBins) + kBins) % kBins)] += mag * (1.0 - frac);
      cells[base + static_cast<std::size_t>(((b0 + 1) % kBins + kBins) % kBins)] += mag * frac;
    }
  }
  Descriptor d{Channel::Shape, {}};
  d.values.reserve(kShapeDim);
  std::array<double, 4 * kBins> block{};
  for (int by = 0; by < kBlocksPerSide; ++by) {
    for (int bx = 0; bx < kBlocksPerSide; ++bx) {
      double norm2 = 0.0;
      std::size_t j = 0;
      for (int cy = by; cy < by + 2; ++cy) {
        for (int cx = bx; cx < bx + 2; ++cx) {
          const auto base = static_cast<std::size_t>((cy * kCellsPerSide + cx) * kBins);
          for (int b = 0; b < kBins; ++b) {
            block[j] = cells[base + static_cast<std::size_t>(b)];
            norm2 += block[j] * block[j];
            ++j;
          }
        }
      }
      const double inv = norm2 > 0.0 ? 1.0 / std::sqrt(norm2 + 1e-12) : 0.0;
      for (double v : block) d.values.push_back(static_cast<float>(v * inv));
    }
  }
  return d;
}

Descriptor intensity_from_window(const RasterCrop& w) {
  const int n = kDescriptorWindow;
  const int cell = n / kGrid;
  std::vector<double> counts(static_cast<std::size_t>(kGrid * kGrid * kIntensityBins), 0.0);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double v = std::clamp(static_cast<double>(w.at(x, y)), 0.0, 255.0);
      const int bin = std::min(kIntensityBins - 1, static_cast<int>(v / (256.0 / kIntensityBins)));
      const int c = (y / cell) * kGrid + (x / cell);
      counts[static_cast<std::size_t>(c * kIntensityBins + bin)] += 1.0;
    }
  }
  Descriptor d{Channel::Appearance, {}};
  d.values.reserve(kAppearanceDim);
  const double total = static_cast<double>(n) * n;
  for (double c : counts) d.values.push_back(static_cast<float>(c / total));
  return d;
}

void require_dims(const Descriptor& a, const Descriptor& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::DimMismatch, "descriptor dims " + std::to_string(a.dim()) + " vs " +
                                            std::to_string(b.dim()));
  }
}

void require_present(const DetectionDescriptors& d) {
  for (int r = 0; r < 4; ++r) {
    if (d.appearance[static_cast<std::size_t>(r)].values.empty() ||
        d.shape[static_cast<std::size_t>(r)].values.empty()) {
      throw Error(ErrorCode::MissingDescriptor, "detection lacks descriptors for rotation " + std::to_string(r));
    }
  }
}

double lower_median(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<long>((v.size() - 1) / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

}  // namespace

GrayVideo::GrayVideo(int width, int height, std::vector<std::vector<std::uint8_t>> frames)
    : width_(width), height_(height), frames_(std::move(frames)) {
  if (width <= 0 || height <= 0) throw Error(ErrorCode::InvalidArgument, "frame size must be positive");
  for (const auto& f : frames_) {
    if (f.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
      throw Error(ErrorCode::Format, "frame buffer size does not match frame dimensions");
    }
  }
}

std::array<int, 4> GrayVideo::crop_bounds(const BoundingBox& box, int min_side) const {
  auto span = [min_side](double lo, double hi, int limit) {
    int a = static_cast<int>(std::ceil(lo - 0.5));
    int b = static_cast<int>(std::ceil(hi - 0.5));
    a = std::clamp(a, 0, limit - 1);
    b = std::clamp(b, a + 1, limit);
    const int want = std::min(min_side, limit);
    while (b - a < want) {
      if (a > 0) --a;
      if (b - a < want && b < limit) ++b;
    }
    return std::pair{a, b};
  };
  const auto [x0, x1] = span(box.x_min(), box.x_max(), width_);
  const auto [y0, y1] = span(box.y_min(), box.y_max(), height_);
  return {x0, y0, x1, y1};
}

RasterCrop GrayVideo::crop(int t, const BoundingBox& box, int min_side) const {
  if (t < 1 || t > frame_count()) throw Error(ErrorCode::InvalidArgument, "crop frame out of range");
  const auto [x0, y0, x1, y1] = crop_bounds(box, min_side);
  RasterCrop c{x1 - x0, y1 - y0, {}};
  c.pixels.reserve(static_cast<std::size_t>(c.width * c.height));
  const auto& f = frame(t);
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) c.pixels.push_back(f[static_cast<std::size_t>(y * width_ + x)]);
  }
  return c;
}

RasterCrop rotate_crop(const RasterCrop& crop, int quarter_turns) {
  require_crop(crop);
  if (quarter_turns < 0 || quarter_turns > 3) {
    throw Error(ErrorCode::InvalidArgument, "quarter turns must lie in 0..3");
  }
  RasterCrop out = crop;
  for (int k = 0; k < quarter_turns; ++k) {
    RasterCrop next{out.height, out.width, std::vector<float>(out.pixels.size())};
    // Counter-clockwise: new(x, y) = old(w-1-y, x).
    for (int y = 0; y < next.height; ++y) {
      for (int x = 0; x < next.width; ++x) {
        next.pixels[static_cast<std::size_t>(y * next.width + x)] = out.at(out.width - 1 - y, x);
      }
    }
    out = std::move(next);
  }
  return out;
}

RasterCrop resize_crop(const RasterCrop& crop, int width, int height) {
  require_crop(crop);
  if (width <= 0 || height <= 0) throw Error(ErrorCode::InvalidArgument, "resize target must be positive");
  RasterCrop out{width, height, std::vector<float>(static_cast<std::size_t>(width * height))};
  const double rx = static_cast<double>(crop.width) / width;
  const double ry = static_cast<double>(crop.height) / height;
  auto sample = [](double s, int n) {
    s = std::clamp(s, 0.0, static_cast<double>(n - 1));
    const int i0 = static_cast<int>(std::floor(s));
    const int i1 = std::min(i0 + 1, n - 1);
    return std::tuple{i0, i1, s - i0};
  };
  for (int y = 0; y < height; ++y) {
    const auto [y0, y1, fy] = sample((y + 0.5) * ry - 0.5, crop.height);
    for (int x = 0; x < width; ++x) {
      const auto [x0, x1, fx] = sample((x + 0.5) * rx - 0.5, crop.width);
      const double top = crop.at(x0, y0) * (1.0 - fx) + crop.at(x1, y0) * fx;
      const double bottom = crop.at(x0, y1) * (1.0 - fx) + crop.at(x1, y1) * fx;
      out.pixels[static_cast<std::size_t>(y * width + x)] = static_cast<float>(top * (1.0 - fy) + bottom * fy);
    }
  }
  return out;
}

Descriptor gradient_histogram_descriptor(const RasterCrop& crop) {
  return hog_from_field(gradients(to_window(crop)));
}

Descriptor intensity_histogram_descriptor(const RasterCrop& crop) {
  return intensity_from_window(to_window(crop));
}

double chi2_distance(const Descriptor& a, const Descriptor& b) {
  require_dims(a, b);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double s = double(a.values[i]) + double(b.values[i]);
    if (s == 0.0) continue;
    const double d = double(a.values[i]) - double(b.values[i]);
    sum += d * d / s;
  }
  return 0.5 * sum;
}

double l2_distance(const Descriptor& a, const Descriptor& b) {
  require_dims(a, b);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double d = double(a.values[i]) - double(b.values[i]);
    sum += d * d;
  }
  return std::sqrt(sum);
}

DetectionDescriptors describe_crop(const RasterCrop& crop) {
  const RasterCrop window = to_window(crop);
  const GradientField field = gradients(window);
  DetectionDescriptors out;
  for (int k = 0; k < 4; ++k) {
    const auto i = static_cast<std::size_t>(k);
    out.appearance[i] = intensity_from_window(k == 0 ? window : rotate_crop(window, k));
    out.shape[i] = hog_from_field(k == 0 ? field : rotate_field(field, k));
  }
  return out;
}

std::vector<int> sample_frames(int frame_count, int m) {
  if (m < 1 || frame_count < 1) throw Error(ErrorCode::InvalidArgument, "sampling needs M >= 1 and T >= 1");
  if (m == 1) return {(frame_count + 1) / 2};
  std::vector<int> frames;
  frames.reserve(static_cast<std::size_t>(m));
  for (long i = 1; i <= m; ++i) {
    frames.push_back(static_cast<int>(1 + ((i - 1) * (frame_count - 1)) / (m - 1)));
  }
  return frames;
}

std::vector<Detection> sample_detections(const Proposal& p, int m) {
  std::vector<Detection> out;
  for (int t : sample_frames(p.frame_count(), m)) out.push_back(p.at(t));
  return out;
}

double DistanceScale::scale(double d) const {
  if (!(hi > lo)) return 0.0;
  return std::clamp((d - lo) / (hi - lo), 0.0, 1.0);
}

void DistanceScale::include(double d) {
  lo = std::min(lo, d);
  hi = std::max(hi, d);
}

DistanceScale DistanceScale::empty() {
  return {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
}

NormalizedDistances normalize_distances(std::span<const double> raw) {
  NormalizedDistances out{{}, DistanceScale::empty()};
  for (double d : raw) {
    if (std::isfinite(d)) out.scale.include(d);
  }
  if (out.scale.lo > out.scale.hi) throw Error(ErrorCode::InvalidArgument, "no finite distance to scale");
  out.scaled.reserve(raw.size());
  for (double d : raw) out.scaled.push_back(out.scale.scale(d));
  return out;
}

double similarity_from_scaled(double scaled_distance) {
  return std::log(kSimilarityEpsilon + (1.0 - kSimilarityEpsilon) * (1.0 - scaled_distance));
}

RotationDistances rotation_distances(const DetectionDescriptors& a, const DetectionDescriptors& b) {
  require_present(a);
  require_present(b);
  RotationDistances d;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      d.chi2[i * 4 + j] = chi2_distance(a.appearance[i], b.appearance[j]);
      d.l2[i * 4 + j] = l2_distance(a.shape[i], b.shape[j]);
    }
  }
  return d;
}

Score detection_similarity(const RotationDistances& d, const DistanceScale& chi2_scale,
                           const DistanceScale& l2_scale) {
  double best = kNegInf;
  for (std::size_t r = 0; r < 16; ++r) {
    const double s = 0.5 * (similarity_from_scaled(chi2_scale.scale(d.chi2[r])) +
                            similarity_from_scaled(l2_scale.scale(d.l2[r])));
    best = std::max(best, s);
  }
  return Score(best);
}

Score proposal_similarity(std::span<const double> per_sample) {
  if (per_sample.empty()) throw Error(ErrorCode::MissingDescriptor, "no sampled detections to compare");
  return Score(lower_median({per_sample.begin(), per_sample.end()}));
}

SimilarityTable::SimilarityTable(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows * cols) throw Error(ErrorCode::DimMismatch, "similarity table size mismatch");
}

SimilarityTable SimilarityTable::transposed() const {
  std::vector<double> t(values_.size());
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) t[c * rows_ + r] = values_[r * cols_ + c];
  }
  return SimilarityTable(cols_, rows_, std::move(t));
}

namespace {

using RowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Per-video, per-sample stacked descriptors: row k*4 + r holds proposal k
// under rotation r.
struct StackedVideo {
  std::vector<RowMatrix> shape;       // per m
  std::vector<Eigen::VectorXf> norms;  // squared row norms per m
  std::vector<RowMatrix> appearance;  // per m
  std::size_t proposals = 0;
};

StackedVideo stack(const std::vector<ProposalDescriptors>& props, std::size_t m) {
  StackedVideo s;
  s.proposals = props.size();
  if (props.empty()) return s;
  const std::size_t ds = props[0][0].shape[0].dim();
  const std::size_t da = props[0][0].appearance[0].dim();
  for (std::size_t mi = 0; mi < m; ++mi) {
    RowMatrix sh(static_cast<long>(props.size() * 4), static_cast<long>(ds));
    RowMatrix ap(static_cast<long>(props.size() * 4), static_cast<long>(da));
    for (std::size_t k = 0; k < props.size(); ++k) {
      const auto& det = props[k][mi];
      require_present(det);
      for (std::size_t r = 0; r < 4; ++r) {
        if (det.shape[r].dim() != ds || det.appearance[r].dim() != da) {
          throw Error(ErrorCode::DimMismatch, "descriptor dims differ within a set");
        }
        const long row = static_cast<long>(k * 4 + r);
        sh.row(row) = Eigen::Map<const Eigen::RowVectorXf>(det.shape[r].values.data(), static_cast<long>(ds));
        ap.row(row) = Eigen::Map<const Eigen::RowVectorXf>(det.appearance[r].values.data(), static_cast<long>(da));
      }
    }
    s.norms.push_back(sh.rowwise().squaredNorm());
    s.shape.push_back(std::move(sh));
    s.appearance.push_back(std::move(ap));
  }
  return s;
}

// Raw distances for one video pair: index ((m * Ra) + ra) * Rb + rb with
// R = 4 * proposals.
struct RawPair {
  std::vector<float> chi2;
  std::vector<float> l2;
};

RawPair raw_pair(const StackedVideo& a, const StackedVideo& b, std::size_t m) {
  const auto ra = static_cast<long>(a.proposals * 4);
  const auto rb = static_cast<long>(b.proposals * 4);
  RawPair out;
  out.chi2.resize(m * static_cast<std::size_t>(ra * rb));
  out.l2.resize(out.chi2.size());
  for (std::size_t mi = 0; mi < m; ++mi) {
    const RowMatrix gram = a.shape[mi] * b.shape[mi].transpose();
    const std::size_t base = mi * static_cast<std::size_t>(ra * rb);
    const auto& A = a.appearance[mi];
    const auto& B = b.appearance[mi];
    const Eigen::VectorXf sum_a = A.rowwise().sum();
    const Eigen::VectorXf sum_b = B.rowwise().sum();
    for (long i = 0; i < ra; ++i) {
      const auto pa = A.row(i).array();
      for (long j = 0; j < rb; ++j) {
        const auto idx = base + static_cast<std::size_t>(i * rb + j);
        const float d2 = a.norms[mi](i) + b.norms[mi](j) - 2.0f * gram(i, j);
        out.l2[idx] = std::sqrt(std::max(d2, 0.0f));
        // chi2 = 1/2 sum (a-b)^2/(a+b) = 1/2 (sum a + sum b) - 2 sum ab/(a+b).
        // Histograms are nonnegative, so a+b = 0 forces ab = 0 and the floor
        // on the denominator only guards the division.
        const auto pb = B.row(j).array();
        const float cross = (pa * pb / (pa + pb).max(1e-30f)).sum();
        out.chi2[idx] = std::max(0.5f * (sum_a(i) + sum_b(j)) - 2.0f * cross, 0.0f);
      }
    }
  }
  return out;
}

}  // namespace

SimilarityMatrix SimilarityMatrix::compute(
    const std::map<std::string, std::vector<ProposalDescriptors>>& videos,
    const std::vector<VideoPair>& pairs) {
  std::size_t m = 0;
  for (const auto& [id, props] : videos) {
    for (const auto& p : props) {
      if (p.empty()) throw Error(ErrorCode::MissingDescriptor, "proposal in '" + id + "' has no samples");
      if (m == 0) m = p.size();
      if (p.size() != m) throw Error(ErrorCode::DimMismatch, "sample counts differ within a set");
    }
  }
  std::map<std::string, StackedVideo> stacked;
  auto stacked_of = [&](const std::string& id) -> const StackedVideo& {
    auto it = stacked.find(id);
    if (it != stacked.end()) return it->second;
    auto v = videos.find(id);
    if (v == videos.end()) throw Error(ErrorCode::MissingDescriptor, "no descriptors for video '" + id + "'");
    return stacked.emplace(id, stack(v->second, m)).first->second;
  };

  // Phase one gathers every raw distance so the scale sees the whole set.
  SimilarityMatrix out;
  std::vector<RawPair> raws;
  for (const auto& [a, b] : pairs) {
    raws.push_back(raw_pair(stacked_of(a), stacked_of(b), m));
    for (float d : raws.back().chi2) out.chi2_scale_.include(d);
    for (float d : raws.back().l2) out.l2_scale_.include(d);
  }

  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto& [a, b] = pairs[p];
    const std::size_t ka = stacked.at(a).proposals, kb = stacked.at(b).proposals;
    const std::size_t ra = ka * 4, rb = kb * 4;
    const auto& raw = raws[p];
    std::vector<double> values(ka * kb);
    std::vector<double> per_m(m);
    for (std::size_t i = 0; i < ka; ++i) {
      for (std::size_t j = 0; j < kb; ++j) {
        for (std::size_t mi = 0; mi < m; ++mi) {
          double best = kNegInf;
          for (std::size_t r1 = 0; r1 < 4; ++r1) {
            for (std::size_t r2 = 0; r2 < 4; ++r2) {
              const std::size_t idx = (mi * ra + i * 4 + r1) * rb + j * 4 + r2;
              const double s = 0.5 * (similarity_from_scaled(out.chi2_scale_.scale(raw.chi2[idx])) +
                                      similarity_from_scaled(out.l2_scale_.scale(raw.l2[idx])));
              best = std::max(best, s);
            }
          }
          per_m[mi] = best;
        }
        values[i * kb + j] = lower_median(per_m);
      }
    }
    out.insert(a, b, SimilarityTable(ka, kb, std::move(values)));
  }
  return out;
}

bool SimilarityMatrix::contains(const std::string& a, const std::string& b) const {
  return tables_.contains({a, b}) || tables_.contains({b, a});
}

SimilarityTable SimilarityMatrix::table(const std::string& a, const std::string& b) const {
  if (auto it = tables_.find({a, b}); it != tables_.end()) return it->second;
  if (auto it = tables_.find({b, a}); it != tables_.end()) return it->second.transposed();
  throw Error(ErrorCode::MissingScore, "no similarity table for '" + a + "' and '" + b + "'");
}

void SimilarityMatrix::insert(const std::string& a, const std::string& b, SimilarityTable table) {
  tables_[{a, b}] = std::move(table);
}

}  // namespace codetect
