#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "puma/error.hpp"
#include "puma/mask_io.hpp"
#include "puma/rng.hpp"

using namespace puma;

TEST_CASE("2x2 fixture round-trips exactly") {
  LabelMask mask(2, 2);
  mask.at(0, 0) = 0;
  mask.at(1, 0) = 1;
  mask.at(0, 1) = 2;
  mask.at(1, 1) = 0;

  const LabelMask back = read_mask(write_mask(mask));
  CHECK(back == mask);
}

TEST_CASE("random masks round-trip losslessly") {
  SplitMix64 rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    const int w = 1 + static_cast<int>(rng.below(48));
    const int h = 1 + static_cast<int>(rng.below(48));
    LabelMask mask(w, h);
    for (auto& v : mask.data) v = static_cast<std::uint8_t>(rng.below(256));
    CHECK(read_mask(write_mask(mask)) == mask);
  }
}

TEST_CASE("truncated and garbage streams are rejected") {
  LabelMask mask(16, 16);
  mask.at(3, 3) = 5;
  const std::string bytes = write_mask(mask);

  try {
    read_mask(bytes.substr(0, bytes.size() / 2));
    FAIL("expected UnsupportedImageFormat");
  } catch (const Error& e) {
    CHECK(e.code() == errc::unsupported_image_format);
  }

  try {
    read_mask("definitely not a png");
    FAIL("expected UnsupportedImageFormat");
  } catch (const Error& e) {
    CHECK(e.code() == errc::unsupported_image_format);
  }

  try {
    read_mask("");
    FAIL("expected UnsupportedImageFormat");
  } catch (const Error& e) {
    CHECK(e.code() == errc::unsupported_image_format);
  }
}

TEST_CASE("file round-trip") {
  const auto png_path = std::filesystem::temp_directory_path() / "pumaeval_mask_io_test.png";
  LabelMask mask(9, 7);
  for (std::size_t i = 0; i < mask.data.size(); ++i)
    mask.data[i] = static_cast<std::uint8_t>(i % 6);

  write_mask_file(mask, png_path);
  CHECK(read_mask_file(png_path) == mask);
  std::filesystem::remove(png_path);

  CHECK_THROWS_AS(read_mask_file("/nonexistent/path/mask.png"), Error);
}
