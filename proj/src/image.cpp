#include "sparsedp/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

#include "fft.hpp"
#include "sparsedp/stats.hpp"

namespace sparsedp {

Frame::Frame(int width, int height, double fill)
    : width_(width), height_(height) {
  if (width < 1 || height < 1)
    throw ValidationError("frame dimensions must be positive");
  pixels_.assign(static_cast<std::size_t>(width) * height, fill);
}

Frame::Frame(int width, int height, std::vector<double> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width < 1 || height < 1)
    throw ValidationError("frame dimensions must be positive");
  if (pixels_.size() != static_cast<std::size_t>(width) * height)
    throw ValidationError("pixel count does not match frame dimensions");
}

void ImageSequence::validate() const {
  if (frames.empty()) throw ValidationError("empty sequence");
  if (targets.size() != frames.size())
    throw ValidationError("target count " + std::to_string(targets.size()) +
                          " does not match frame count " +
                          std::to_string(frames.size()));
  for (std::size_t k = 0; k < frames.size(); ++k) {
    if (frames[k].width() != width() || frames[k].height() != height())
      throw ValidationError("frame " + std::to_string(k + 1) +
                            " has mismatched dimensions");
    if (!frames[k].contains(targets[k]))
      throw ValidationError("target for frame k=" + std::to_string(k + 1) +
                            " at (" + std::to_string(targets[k].x) + "," +
                            std::to_string(targets[k].y) +
                            ") lies outside the frame");
  }
}

// --- PGM ---------------------------------------------------------------------

namespace {

class PgmReader {
 public:
  explicit PgmReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void expect_magic() {
    if (bytes_.size() < 2 || bytes_[0] != 'P' || bytes_[1] != '5')
      fail("expected P5 magic number");
    pos_ = 2;
  }

  int read_header_int() {
    skip_whitespace_and_comments();
    const std::size_t start = pos_;
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000'000) fail("header value too large");
      ++pos_;
    }
    if (pos_ == start) fail("expected unsigned integer");
    return static_cast<int>(value);
  }

  void expect_single_whitespace() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_]))
      fail("expected whitespace before raster");
    ++pos_;
  }

  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::uint8_t at(std::size_t i) const { return bytes_[i]; }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("malformed PGM at byte offset " + std::to_string(pos_) +
                     ": " + what);
  }

 private:
  void skip_whitespace_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

Frame parse_pgm(std::span<const std::uint8_t> bytes) {
  PgmReader reader(bytes);
  reader.expect_magic();
  const int width = reader.read_header_int();
  const int height = reader.read_header_int();
  const int maxval = reader.read_header_int();
  if (width < 1 || height < 1) reader.fail("nonpositive dimensions");
  if (maxval < 1 || maxval > 255) reader.fail("only 8-bit maxval is supported");
  reader.expect_single_whitespace();

  const std::size_t count = static_cast<std::size_t>(width) * height;
  if (reader.remaining() < count) reader.fail("truncated raster");
  std::vector<double> pixels(count);
  const std::size_t base = reader.position();
  for (std::size_t i = 0; i < count; ++i) {
    const int level = reader.at(base + i);
    if (level > maxval) reader.fail("sample exceeds maxval");
    pixels[i] = static_cast<double>(level) / maxval;
  }
  return Frame(width, height, std::move(pixels));
}

Frame read_pgm(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  try {
    return parse_pgm(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_pgm(const Frame& frame, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "P5\n" << frame.width() << ' ' << frame.height() << "\n255\n";
  std::vector<char> raster(frame.size());
  const auto px = frame.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    const double v = std::clamp(px[i], 0.0, 1.0);
    raster[i] = static_cast<char>(static_cast<std::uint8_t>(std::lround(v * 255.0)));
  }
  out.write(raster.data(), static_cast<std::streamsize>(raster.size()));
  if (!out) throw std::runtime_error("short write to " + path.string());
}

std::vector<Point> read_targets(const std::filesystem::path& path,
                                std::size_t expected_count) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::vector<Point> targets(expected_count);
  std::vector<bool> seen(expected_count, false);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    long k = 0;
    int x = 0, y = 0;
    if (!(fields >> k >> x >> y))
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected 'k x y'");
    if (k < 1 || static_cast<std::size_t>(k) > expected_count)
      throw ValidationError("target index k=" + std::to_string(k) +
                            " outside 1.." + std::to_string(expected_count));
    targets[k - 1] = {x, y};
    seen[k - 1] = true;
  }
  for (std::size_t k = 0; k < expected_count; ++k)
    if (!seen[k])
      throw ValidationError("missing target for k=" + std::to_string(k + 1));
  return targets;
}

void write_targets(std::span<const Point> targets,
                   const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t k = 0; k < targets.size(); ++k)
    out << (k + 1) << ' ' << targets[k].x << ' ' << targets[k].y << '\n';
}

ImageSequence load_pgm_sequence(std::span<const std::filesystem::path> paths,
                                const std::filesystem::path& targets_file) {
  if (paths.empty()) throw ValidationError("empty sequence");
  ImageSequence seq;
  seq.frames.reserve(paths.size());
  for (const auto& p : paths) seq.frames.push_back(read_pgm(p));
  seq.targets = read_targets(targets_file, paths.size());
  seq.validate();
  return seq;
}

// --- Synthetic data ----------------------------------------------------------

Frame generate_power_law_field(int width, int height, double spectral_exponent,
                               std::uint64_t seed) {
  if (width < 1 || height < 1)
    throw ValidationError("frame dimensions must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> noise(static_cast<std::size_t>(width) * height);
  for (double& v : noise) v = normal(rng);

  const double half_exponent = spectral_exponent / 2.0;
  auto field = detail::filter_real_2d(noise, width, height,
                                      [&](double fx, double fy) {
                                        const double f = std::hypot(fx, fy);
                                        if (f == 0.0) return 0.0;
                                        return std::pow(f, -half_exponent);
                                      });

  const auto [lo, hi] = std::minmax_element(field.begin(), field.end());
  const double min = *lo, span = *hi - *lo;
  for (double& v : field) v = span > 0.0 ? (v - min) / span : 0.0;
  return Frame(width, height, std::move(field));
}

ImageSequence generate_synthetic_sequence(const SyntheticOptions& options) {
  if (options.width < 1 || options.height < 1)
    throw ValidationError("frame dimensions must be positive");
  if (options.frames < 1) throw ValidationError("frame count must be >= 1");

  const int w = options.width, h = options.height;
  const Frame base =
      generate_power_law_field(w, h, options.spectral_exponent, options.seed);

  ImageSequence seq;
  for (int k = 0; k < options.frames; ++k) {
    Frame frame(w, h);
    const int ox = k * options.drift.x, oy = k * options.drift.y;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        frame(x, y) = base(((x + ox) % w + w) % w, ((y + oy) % h + h) % h);
    seq.frames.push_back(std::move(frame));
  }

  // Separate stream for the trajectory so frame content and trajectory do not
  // depend on each other's draw counts.
  std::mt19937_64 rng(options.seed ^ 0x9e3779b97f4a7c15ULL);
  const int speed = static_cast<int>(std::floor(std::max(0.0, options.target_speed)));
  std::uniform_int_distribution<int> ux(0, w - 1), uy(0, h - 1);
  std::uniform_int_distribution<int> step(-speed, speed);
  Point p{ux(rng), uy(rng)};
  seq.targets.push_back(p);
  for (int k = 1; k < options.frames; ++k) {
    int dx, dy;
    do {
      dx = step(rng);
      dy = step(rng);
    } while (dx * dx + dy * dy > options.target_speed * options.target_speed);
    p = {std::clamp(p.x + dx, 0, w - 1), std::clamp(p.y + dy, 0, h - 1)};
    seq.targets.push_back(p);
  }
  return seq;
}

// --- Regions -----------------------------------------------------------------

Region extract_region(const Frame& frame, Point origin, int side) {
  if (side < 1 || !region_fits(origin, side, frame.width(), frame.height()))
    throw ValidationError("region of side " + std::to_string(side) + " at x=(" +
                          std::to_string(origin.x) + "," +
                          std::to_string(origin.y) + ") is out of bounds");
  Region r{origin, side, {}};
  r.data.reserve(static_cast<std::size_t>(side) * side);
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x) r.data.push_back(frame(origin.x + x, origin.y + y));
  return r;
}

Region extract_region(const ImageSequence& seq, int k, Point origin, int side) {
  if (k < 1 || static_cast<std::size_t>(k) > seq.length())
    throw ValidationError("stage k=" + std::to_string(k) + " out of range");
  try {
    return extract_region(seq.frames[k - 1], origin, side);
  } catch (const ValidationError& e) {
    throw ValidationError("stage k=" + std::to_string(k) + ": " + e.what());
  }
}

std::vector<std::vector<double>> tile_region(const Region& region,
                                             int patch_side) {
  if (patch_side < 1 || region.side % patch_side != 0)
    throw ValidationError("region side " + std::to_string(region.side) +
                          " is not divisible by patch side " +
                          std::to_string(patch_side));
  const int tiles = region.side / patch_side;
  std::vector<std::vector<double>> out;
  out.reserve(static_cast<std::size_t>(tiles) * tiles);
  for (int ty = 0; ty < tiles; ++ty)
    for (int tx = 0; tx < tiles; ++tx) {
      std::vector<double> patch;
      patch.reserve(static_cast<std::size_t>(patch_side) * patch_side);
      for (int y = 0; y < patch_side; ++y)
        for (int x = 0; x < patch_side; ++x)
          patch.push_back(region.data[static_cast<std::size_t>(ty * patch_side + y) *
                                          region.side +
                                      tx * patch_side + x]);
      out.push_back(std::move(patch));
    }
  return out;
}

Region assemble_tiles(const std::vector<std::vector<double>>& tiles,
                      int region_side, int patch_side, Point origin) {
  if (patch_side < 1 || region_side % patch_side != 0)
    throw ValidationError("region side is not divisible by patch side");
  const int per_row = region_side / patch_side;
  if (tiles.size() != static_cast<std::size_t>(per_row) * per_row)
    throw ValidationError("tile count does not match region layout");
  Region r{origin, region_side,
           std::vector<double>(static_cast<std::size_t>(region_side) * region_side)};
  for (std::size_t t = 0; t < tiles.size(); ++t) {
    const int tx = static_cast<int>(t) % per_row, ty = static_cast<int>(t) / per_row;
    for (int y = 0; y < patch_side; ++y)
      for (int x = 0; x < patch_side; ++x)
        r.data[static_cast<std::size_t>(ty * patch_side + y) * region_side +
               tx * patch_side + x] = tiles[t][static_cast<std::size_t>(y) * patch_side + x];
  }
  return r;
}

double adjacent_pixel_correlation(std::span<const Frame> frames,
                                  std::size_t count, std::uint64_t seed) {
  if (frames.empty() || frames.front().width() < 2)
    throw ValidationError("need frames at least two pixels wide");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, frames.size() - 1);
  std::vector<double> left, right;
  left.reserve(count);
  right.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Frame& f = frames[pick(rng)];
    std::uniform_int_distribution<int> ux(0, f.width() - 2), uy(0, f.height() - 1);
    const int x = ux(rng), y = uy(rng);
    left.push_back(f(x, y));
    right.push_back(f(x + 1, y));
  }
  return pearson(left, right).value_or(0.0);
}

}  // namespace sparsedp
