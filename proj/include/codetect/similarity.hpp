#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "codetect/core.hpp"

namespace codetect {

// Grayscale intensity grid, row-major, values nominally in [0, 255].
struct RasterCrop {
  int width = 0;
  int height = 0;
  std::vector<float> pixels;

  float at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(x)];
  }
};

// 8-bit grayscale frames of one video.
class GrayVideo {
 public:
  GrayVideo(int width, int height, std::vector<std::vector<std::uint8_t>> frames);

  int width() const { return width_; }
  int height() const { return height_; }
  int frame_count() const { return static_cast<int>(frames_.size()); }
  const std::vector<std::uint8_t>& frame(int t) const { return frames_[static_cast<std::size_t>(t - 1)]; }

  // Pixel range [x0, x1) x [y0, y1) whose centers fall inside the box,
  // grown symmetrically (within the frame) to at least min_side per axis.
  std::array<int, 4> crop_bounds(const BoundingBox& box, int min_side = 1) const;
  RasterCrop crop(int t, const BoundingBox& box, int min_side = 1) const;

 private:
  int width_, height_;
  std::vector<std::vector<std::uint8_t>> frames_;
};

enum class Channel { Appearance, Shape };

struct Descriptor {
  Channel channel = Channel::Shape;
  std::vector<float> values;

  std::size_t dim() const { return values.size(); }
};

inline constexpr int kDescriptorWindow = 64;
inline constexpr int kMinCropSide = 8;
inline constexpr std::size_t kShapeDim = 1764;      // 7x7 blocks of 2x2 cells x 9 bins
inline constexpr std::size_t kAppearanceDim = 128;  // 4x4 cells x 8 intensity bins
inline constexpr double kSimilarityEpsilon = 1e-3;

// Exact counter-clockwise rotation by 90 degrees * quarter_turns.
RasterCrop rotate_crop(const RasterCrop& crop, int quarter_turns);
// Bilinear resampling with pixel-center alignment.
RasterCrop resize_crop(const RasterCrop& crop, int width, int height);

// Oriented-gradient histogram on the 64x64 window: 8x8-pixel cells, 9
// unsigned orientation bins, L2-normalized 2x2-cell blocks.
Descriptor gradient_histogram_descriptor(const RasterCrop& crop);
// 4x4 spatial grid x 8 intensity bins, L1-normalized.
Descriptor intensity_histogram_descriptor(const RasterCrop& crop);

double chi2_distance(const Descriptor& a, const Descriptor& b);
double l2_distance(const Descriptor& a, const Descriptor& b);

// Descriptors of one detection under the four quarter-turn rotations.
struct DetectionDescriptors {
  std::array<Descriptor, 4> appearance;
  std::array<Descriptor, 4> shape;
};

DetectionDescriptors describe_crop(const RasterCrop& crop);

// Frames floor(1 + (i-1)(T-1)/(M-1)), i = 1..M; the middle frame when M = 1.
std::vector<int> sample_frames(int frame_count, int m);
std::vector<Detection> sample_detections(const Proposal& p, int m);

// Per-channel min-max scaling onto [0, 1]; max == min maps everything to 0.
struct DistanceScale {
  double lo = 0.0;
  double hi = 0.0;

  double scale(double d) const;
  void include(double d);
  static DistanceScale empty();
};

struct NormalizedDistances {
  std::vector<double> scaled;
  DistanceScale scale;
};

NormalizedDistances normalize_distances(std::span<const double> raw);
// log(eps + (1 - eps)(1 - d_hat)).
double similarity_from_scaled(double scaled_distance);

// Raw distances between two detections for every rotation pair (i, j),
// indexed i * 4 + j.
struct RotationDistances {
  std::array<double, 16> chi2{};
  std::array<double, 16> l2{};
};

RotationDistances rotation_distances(const DetectionDescriptors& a, const DetectionDescriptors& b);
Score detection_similarity(const RotationDistances& d, const DistanceScale& chi2_scale,
                           const DistanceScale& l2_scale);
// Lower median of per-sample detection similarities.
Score proposal_similarity(std::span<const double> per_sample);

// K_a x K_b log-similarity table between the proposals of two videos.
class SimilarityTable {
 public:
  SimilarityTable() = default;
  SimilarityTable(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double at(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  const std::vector<double>& values() const { return values_; }
  SimilarityTable transposed() const;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> values_;
};

// Descriptors for the M sampled detections of each proposal in one video.
using ProposalDescriptors = std::vector<DetectionDescriptors>;

// Pairwise proposal similarities for a codetection set. Raw distances of
// every requested video pair are gathered first; the min-max scale is then
// shared by the whole set.
class SimilarityMatrix {
 public:
  using VideoPair = std::pair<std::string, std::string>;

  static SimilarityMatrix compute(const std::map<std::string, std::vector<ProposalDescriptors>>& videos,
                                  const std::vector<VideoPair>& pairs);

  bool contains(const std::string& a, const std::string& b) const;
  // Table with rows indexed by proposals of `a`.
  SimilarityTable table(const std::string& a, const std::string& b) const;
  const DistanceScale& chi2_scale() const { return chi2_scale_; }
  const DistanceScale& l2_scale() const { return l2_scale_; }
  const std::map<VideoPair, SimilarityTable>& tables() const { return tables_; }

  void insert(const std::string& a, const std::string& b, SimilarityTable table);

 private:
  std::map<VideoPair, SimilarityTable> tables_;
  DistanceScale chi2_scale_ = DistanceScale::empty();
  DistanceScale l2_scale_ = DistanceScale::empty();
};

}  // namespace codetect
