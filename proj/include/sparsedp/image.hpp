#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sparsedp {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Integer pixel coordinate. `x` is the column, `y` the row.
struct Point {
  int x = 0;
  int y = 0;

  friend bool operator==(const Point&, const Point&) = default;
  friend auto operator<=>(const Point&, const Point&) = default;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }

/// Squared Euclidean distance.
inline double squared_distance(Point a, Point b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

struct PointHash {
  std::size_t operator()(Point p) const noexcept {
    const auto ux = static_cast<std::uint32_t>(p.x);
    const auto uy = static_cast<std::uint32_t>(p.y);
    return std::hash<std::uint64_t>{}((std::uint64_t{ux} << 32) | uy);
  }
};

/// Grayscale image with intensities in [0,1], row-major.
class Frame {
 public:
  Frame() = default;
  Frame(int width, int height, double fill = 0.0);
  Frame(int width, int height, std::vector<double> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return pixels_.size(); }

  double operator()(int x, int y) const { return pixels_[index(x, y)]; }
  double& operator()(int x, int y) { return pixels_[index(x, y)]; }

  std::span<const double> pixels() const { return pixels_; }
  std::span<double> pixels() { return pixels_; }

  bool contains(Point p) const {
    return p.x >= 0 && p.y >= 0 && p.x < width_ && p.y < height_;
  }

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> pixels_;
};

/// Frames of equal size plus one target location per frame.
struct ImageSequence {
  std::vector<Frame> frames;
  std::vector<Point> targets;

  std::size_t length() const { return frames.size(); }
  int width() const { return frames.empty() ? 0 : frames.front().width(); }
  int height() const { return frames.empty() ? 0 : frames.front().height(); }

  /// Throws ValidationError if frames disagree in size or a target is out of
  /// bounds.
  void validate() const;
};

/// a x a block of a frame, flattened row-major. `origin` is the top-left
/// corner.
struct Region {
  Point origin;
  int side = 0;
  std::vector<double> data;
};

// --- PGM I/O ---------------------------------------------------------------

Frame read_pgm(const std::filesystem::path& path);
Frame parse_pgm(std::span<const std::uint8_t> bytes);
/// Writes an 8-bit P5 file; intensities are rounded to maxval 255.
void write_pgm(const Frame& frame, const std::filesystem::path& path);

/// Parses "k x y" lines (k is 1-based). Blank lines and '#' comments are
/// skipped.
std::vector<Point> read_targets(const std::filesystem::path& path,
                                std::size_t expected_count);
void write_targets(std::span<const Point> targets,
                   const std::filesystem::path& path);

ImageSequence load_pgm_sequence(std::span<const std::filesystem::path> paths,
                                const std::filesystem::path& targets_file);

// --- Synthetic data --------------------------------------------------------

struct SyntheticOptions {
  int width = 64;
  int height = 64;
  int frames = 5;
  std::uint64_t seed = 1;
  /// Power spectrum falls off as |f|^-spectral_exponent.
  double spectral_exponent = 2.0;
  /// Maximum Euclidean displacement of the target per frame.
  double target_speed = 8.0;
  /// Per-frame advection of the shared field, in pixels.
  Point drift{2, 1};
};

/// Gaussian random field sequence with power-law spectrum and a random-walk
/// target. Equal options give bit-identical output.
ImageSequence generate_synthetic_sequence(const SyntheticOptions& options);

/// Single power-law field rescaled to [0,1].
Frame generate_power_law_field(int width, int height, double spectral_exponent,
                               std::uint64_t seed);

// --- Regions ---------------------------------------------------------------

/// Returns true when [x, x+side) x [y, y+side) lies inside a width x height
/// frame.
inline bool region_fits(Point origin, int side, int width, int height) {
  return origin.x >= 0 && origin.y >= 0 && origin.x + side <= width &&
         origin.y + side <= height;
}

Region extract_region(const Frame& frame, Point origin, int side);
/// Frame index `k` is 1-based.
Region extract_region(const ImageSequence& seq, int k, Point origin, int side);

/// Splits a square region into row-major tiles of patch_side x patch_side.
std::vector<std::vector<double>> tile_region(const Region& region,
                                             int patch_side);
/// Inverse of tile_region.
Region assemble_tiles(const std::vector<std::vector<double>>& tiles,
                      int region_side, int patch_side, Point origin = {});

/// Sample Pearson correlation of horizontally adjacent pixel pairs at
/// `count` positions drawn uniformly over the frames.
double adjacent_pixel_correlation(std::span<const Frame> frames,
                                  std::size_t count, std::uint64_t seed);

}  // namespace sparsedp
