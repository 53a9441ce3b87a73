#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "sparsedp/image.hpp"

using namespace sparsedp;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("sparsedp_test_image_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::uint8_t> bytes_of(const std::string& header, std::vector<std::uint8_t> body) {
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

}  // namespace

TEST_CASE("parse_pgm divides raw levels by maxval") {
  const auto bytes = bytes_of("P5\n2 2\n255\n", {0, 255, 128, 64});
  const Frame f = parse_pgm(bytes);
  REQUIRE(f.width() == 2);
  REQUIRE(f.height() == 2);
  CHECK(f(0, 0) == 0.0);
  CHECK(f(1, 0) == 1.0);
  CHECK(f(0, 1) == doctest::Approx(128.0 / 255.0).epsilon(1e-12));
  CHECK(f(1, 1) == doctest::Approx(64.0 / 255.0).epsilon(1e-12));
  CHECK(f(0, 1) == doctest::Approx(0.50196).epsilon(1e-5));
}

TEST_CASE("parse_pgm handles comments and smaller maxval") {
  const auto bytes = bytes_of("P5 # comment\n# more\n3 1 # w h\n15\n", {0, 15, 5});
  const Frame f = parse_pgm(bytes);
  CHECK(f.width() == 3);
  CHECK(f(1, 0) == 1.0);
  CHECK(f(2, 0) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("parse_pgm rejects malformed input") {
  CHECK_THROWS_AS(parse_pgm(bytes_of("P2\n1 1\n255\n", {0})), ParseError);
  CHECK_THROWS_AS(parse_pgm(bytes_of("P5\n2 2\n255\n", {0, 1, 2})), ParseError);
  CHECK_THROWS_AS(parse_pgm(bytes_of("P5\n0 2\n255\n", {})), ParseError);
  CHECK_THROWS_AS(parse_pgm(bytes_of("P5\n1 1\n70000\n", {0, 0})), ParseError);
  CHECK_THROWS_AS(parse_pgm(bytes_of("P5\n1 1\n15\n", {16})), ParseError);
  CHECK_THROWS_AS(parse_pgm(bytes_of("P5\nx 1\n255\n", {0})), ParseError);
}

TEST_CASE("PGM round trip stays within half a level") {
  const auto dir = temp_dir("roundtrip");
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> dim(1, 40);
  for (int trial = 0; trial < 25; ++trial) {
    Frame f(dim(rng), dim(rng));
    for (double& v : f.pixels()) v = unit(rng);
    const auto path = dir / "f.pgm";
    write_pgm(f, path);
    const Frame g = read_pgm(path);
    REQUIRE(g.width() == f.width());
    REQUIRE(g.height() == f.height());
    for (std::size_t i = 0; i < f.size(); ++i)
      CHECK(std::abs(g.pixels()[i] - f.pixels()[i]) <= 0.5 / 255.0 + 1e-15);
  }
}

TEST_CASE("targets file is validated against the frame bounds") {
  const auto dir = temp_dir("targets");
  Frame f(4, 4, 0.5);
  write_pgm(f, dir / "a.pgm");
  {
    std::ofstream t(dir / "t.txt");
    t << "1 5 7\n";
  }
  const std::vector<fs::path> paths{dir / "a.pgm"};
  CHECK_THROWS_AS(load_pgm_sequence(paths, dir / "t.txt"), ValidationError);

  {
    std::ofstream t(dir / "t.txt");
    t << "# header\n1 2 3\n";
  }
  const ImageSequence s = load_pgm_sequence(paths, dir / "t.txt");
  CHECK(s.targets.front() == Point{2, 3});
}

TEST_CASE("targets round trip and missing lines") {
  const auto dir = temp_dir("targets_io");
  const std::vector<Point> pts{{1, 2}, {3, 4}, {0, 0}};
  write_targets(pts, dir / "t.txt");
  CHECK(read_targets(dir / "t.txt", 3) == pts);
  CHECK_THROWS(read_targets(dir / "t.txt", 4));
}

TEST_CASE("empty path list is an empty sequence") {
  const std::vector<fs::path> none;
  CHECK_THROWS_WITH_AS(load_pgm_sequence(none, "t.txt"), doctest::Contains("empty sequence"),
                       ValidationError);
}

TEST_CASE("synthetic sequences are deterministic") {
  SyntheticOptions o;
  o.seed = 7;
  const ImageSequence a = generate_synthetic_sequence(o);
  const ImageSequence b = generate_synthetic_sequence(o);
  REQUIRE(a.length() == 5);
  CHECK(a.targets == b.targets);
  for (std::size_t k = 0; k < a.length(); ++k) {
    const auto pa = a.frames[k].pixels(), pb = b.frames[k].pixels();
    CHECK(std::equal(pa.begin(), pa.end(), pb.begin()));
  }
  o.seed = 8;
  const ImageSequence c = generate_synthetic_sequence(o);
  CHECK_FALSE(std::equal(c.frames[0].pixels().begin(), c.frames[0].pixels().end(),
                         a.frames[0].pixels().begin()));
}

TEST_CASE("synthetic targets stay within speed and bounds") {
  SyntheticOptions o;
  o.seed = 3;
  o.frames = 20;
  const ImageSequence s = generate_synthetic_sequence(o);
  s.validate();
  for (std::size_t k = 1; k < s.length(); ++k) {
    const double step = std::sqrt(squared_distance(s.targets[k], s.targets[k - 1]));
    CHECK(step <= o.target_speed + 1e-9);
  }
  for (const Frame& f : s.frames)
    for (double v : f.pixels()) CHECK((v >= 0.0 && v <= 1.0));
}

TEST_CASE("spectral exponent controls adjacent-pixel correlation") {
  // Independent estimate: draw 10^4 horizontal neighbour pairs directly.
  auto sampled_corr = [](double exponent) {
    std::vector<Frame> frames;
    for (std::uint64_t s = 0; s < 4; ++s) frames.push_back(generate_power_law_field(64, 64, exponent, s + 11));
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> pick_f(0, 3), pick_x(0, 62), pick_y(0, 63);
    double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
      const Frame& f = frames[static_cast<std::size_t>(pick_f(rng))];
      const int x = pick_x(rng), y = pick_y(rng);
      const double a = f(x, y), b = f(x + 1, y);
      sa += a; sb += b; saa += a * a; sbb += b * b; sab += a * b;
    }
    const double cov = sab / n - sa / n * sb / n;
    return cov / std::sqrt((saa / n - sa * sa / n / n) * (sbb / n - sb * sb / n / n));
  };
  CHECK(std::abs(sampled_corr(0.0)) < 0.1);
  CHECK(sampled_corr(2.0) >= 0.5);

  std::vector<Frame> frames;
  for (std::uint64_t s = 0; s < 4; ++s) frames.push_back(generate_power_law_field(64, 64, 2.0, s + 11));
  CHECK(adjacent_pixel_correlation(frames, 10000, 1) >= 0.5);
}

TEST_CASE("extract_region edge cases") {
  Frame f(100, 100);
  for (int y = 0; y < 100; ++y)
    for (int x = 0; x < 100; ++x) f(x, y) = (x + 100 * y) / 10000.0;

  const Region one = extract_region(f, {0, 0}, 1);
  REQUIRE(one.data.size() == 1);
  CHECK(one.data[0] == f(0, 0));

  const Region whole = extract_region(f, {0, 0}, 100);
  CHECK(std::equal(whole.data.begin(), whole.data.end(), f.pixels().begin()));

  CHECK_THROWS_AS(extract_region(f, {0, 0}, 110), ValidationError);
  CHECK_THROWS_AS(extract_region(f, {-1, 0}, 5), ValidationError);
  CHECK_THROWS_AS(extract_region(f, {96, 0}, 5), ValidationError);

  const Region r = extract_region(f, {10, 20}, 3);
  CHECK(r.data[4] == f(11, 21));
}

TEST_CASE("tiling and reassembly reproduce the region exactly") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int d : {1, 2, 5, 10}) {
    Frame f(30, 30);
    for (double& v : f.pixels()) v = unit(rng);
    const Region r = extract_region(f, {0, 10}, 20);
    const auto tiles = tile_region(r, d);
    CHECK(tiles.size() == static_cast<std::size_t>((20 / d) * (20 / d)));
    const Region back = assemble_tiles(tiles, 20, d, r.origin);
    CHECK(back.data == r.data);
    CHECK(back.origin == r.origin);
  }
  const Region r = extract_region(Frame(30, 30), {0, 0}, 20);
  CHECK_THROWS_AS(tile_region(r, 3), ValidationError);
}

TEST_CASE("sequence validation") {
  ImageSequence s;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s.frames = {Frame(4, 4), Frame(5, 4)};
  s.targets = {{0, 0}, {0, 0}};
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s.frames = {Frame(4, 4), Frame(4, 4)};
  s.targets = {{0, 0}};
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s.targets = {{0, 0}, {3, 3}};
  CHECK_NOTHROW(s.validate());
  CHECK(extract_region(s, 2, {1, 1}, 3).data.size() == 9);
  CHECK_THROWS_AS(extract_region(s, 3, {0, 0}, 1), ValidationError);
}
