#include <gtest/gtest.h>

#include <thread>

#include "test_support.hpp"
#include "urbangen/common/base64.hpp"
#include "urbangen/common/diagnostics.hpp"
#include "urbangen/common/error.hpp"
#include "urbangen/common/fs.hpp"
#include "urbangen/common/geometry.hpp"
#include "urbangen/common/hash.hpp"
#include "urbangen/common/image.hpp"
#include "urbangen/common/random.hpp"

namespace urbangen {
namespace {

namespace ut = urbangen::testing;

TEST(Hash, KnownVectors) {
  // FIPS 180-2 examples.
  EXPECT_EQ(sha256_hex(std::string_view("abc")),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(std::string_view("")), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  Sha256 h;
  h.update(std::string_view("ab")).update(std::string_view("c"));
  EXPECT_EQ(h.hex_digest(), sha256_hex(std::string_view("abc")));
  EXPECT_EQ(hash64("abc"), 0xba7816bf8f01cfeaULL);
}

TEST(Base64, RoundTripAndRfcVectors) {
  const std::string s = "foobar";
  const std::vector<std::uint8_t> bytes(s.begin(), s.end());
  EXPECT_EQ(base64_encode(bytes), "Zm9vYmFy");
  EXPECT_EQ(base64_encode(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 4)), "Zm9vYg==");
  EXPECT_EQ(base64_decode("Zm9vYg=="), std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 4));
  EXPECT_THROW(base64_decode("Zm9v*g=="), Error);
}

TEST(Image, PngRoundTripAndCrop) {
  RgbImage img(5, 3, {1, 2, 3});
  img.set(4, 2, {250, 0, 7});
  const auto back = decode_png(encode_png(img));
  EXPECT_EQ(back, img);
  const auto c = crop(img, {3, 1, 2, 2});
  EXPECT_EQ(c.width(), 2);
  EXPECT_EQ(c.at(1, 1), (Rgb{250, 0, 7}));
  EXPECT_THROW(crop(img, {4, 0, 2, 1}), Error);
  EXPECT_THROW(decode_png({1, 2, 3}), Error);
}

TEST(Fs, AtomicWritesFromManyThreads) {
  ut::TempDir dir("fs");
  const auto path = dir / "f.txt";
  std::vector<std::thread> pool;
  for (int t = 0; t < 4; ++t)
    pool.emplace_back([&, t] {
      for (int i = 0; i < 20; ++i) write_file_atomic(path, std::string(1000, static_cast<char>('a' + t)));
    });
  for (auto& t : pool) t.join();
  const auto text = read_file_text(path);
  ASSERT_EQ(text.size(), 1000u);
  EXPECT_EQ(text.find_first_not_of(text[0]), std::string::npos);
  // No temp files left behind.
  EXPECT_EQ(std::distance(std::filesystem::directory_iterator(dir.path()), {}), 1);
}

TEST(Diagnostics, CountsAndMerges) {
  Diagnostics a, b;
  a.warn("x", "s", "m");
  b.info("x", "t", "n");
  b.info("y", "t", "n");
  a.merge(b);
  EXPECT_EQ(a.count("x"), 2u);
  EXPECT_EQ(a.entries().size(), 3u);
}

TEST(Errors, ExitCodes) {
  EXPECT_EQ(exit_code_for(ErrorCode::kConfig), ExitCode::kConfig);
  EXPECT_EQ(exit_code_for(ErrorCode::kReplayMiss), ExitCode::kTool);
  EXPECT_EQ(exit_code_for(ErrorCode::kToolUnavailable), ExitCode::kTool);
  EXPECT_EQ(exit_code_for(ErrorCode::kParse), ExitCode::kData);
  EXPECT_EQ(exit_code_for(ErrorCode::kCorruptLedger), ExitCode::kData);
}

TEST(Random, StreamIsPinned) {
  // mt19937_64 with the default seed yields 9981545732273789042 as its
  // 10000th output (C++ standard, [rand.predef]).
  DeterministicRng rng(5489u);
  std::uint64_t v = 0;
  for (int i = 0; i < 10000; ++i) v = rng.next();
  EXPECT_EQ(v, 9981545732273789042ULL);
  DeterministicRng a(3), b(3);
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
  }
}

TEST(Geometry, PolygonHelpers) {
  std::vector<Vec2> sq{{0, 0}, {0, 2}, {2, 2}, {2, 0}};  // clockwise
  EXPECT_DOUBLE_EQ(polygon::signed_area(sq), -4.0);
  polygon::make_ccw(sq);
  EXPECT_DOUBLE_EQ(polygon::signed_area(sq), 4.0);
  EXPECT_EQ(polygon::centroid(sq), (Vec2{1, 1}));
  EXPECT_TRUE(polygon::contains(sq, {1, 1}));
  EXPECT_FALSE(polygon::contains(sq, {3, 1}));
  const std::vector<Vec2> bowtie{{0, 0}, {2, 2}, {2, 0}, {0, 2}};
  EXPECT_FALSE(polygon::is_simple(bowtie));
  const std::vector<Vec2> line{{0, 0}, {3, 4}, {3, 10}};
  EXPECT_DOUBLE_EQ(polyline::length(line), 11.0);
}

}  // namespace
}  // namespace urbangen
