#include <gtest/gtest.h>

#include <cstring>
#include <fstream>
#include <iterator>
#include <random>

#include "coff/codec.hpp"
#include "helpers.hpp"

namespace coff {
namespace {

using codec::DecodeError;
using codec::DecodeErrorKind;

FeatureMap golden_map() {
  const GridSpec spec({0.0, 1.2}, {0.0, 0.8}, {-3.0, 1.0}, 0.4, 0.4);
  std::vector<float> values(12);
  for (std::size_t k = 0; k < 12; ++k) values[k] = 0.25F * static_cast<float>(k);
  return FeatureMap(spec, 2, {}, values);
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

DecodeErrorKind kind_of(const std::vector<std::uint8_t>& bytes) {
  try {
    codec::decode(bytes);
  } catch (const DecodeError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "decode accepted the message";
  return DecodeErrorKind::BadHeader;
}

TEST(Codec, UnitMapLayout) {
  const FeatureMap m(testing::small_spec(1, 1), 1, {});
  const auto bytes = codec::encode(m, {});
  ASSERT_EQ(bytes.size(), 4U + 24U + 48U + 8U + 12U + 4U + 4U);
  EXPECT_EQ(bytes.size(), codec::message_size(1, 1, 1));
  EXPECT_EQ(std::memcmp(bytes.data(), "CFF1", 4), 0);
  for (std::size_t i = 96; i < 100; ++i) EXPECT_EQ(bytes[i], 0);
}

TEST(Codec, SizeIsAffineInElementCount) {
  for (std::size_t n : {1U, 6U, 35200U}) {
    EXPECT_EQ(codec::message_size(1, 1, n), 100 + 4 * n);
  }
  EXPECT_EQ(codec::message_size(128, 200, 176), 18022500U);
}

TEST(Codec, RandomRoundTrips) {
  std::mt19937_64 rng(61);
  for (int i = 0; i < 100; ++i) {
    const std::size_t c = testing::pick(rng, 1, 16);
    const std::size_t h = testing::pick(rng, 1, 20);
    const std::size_t w = testing::pick(rng, 1, 20);
    const double voxel = testing::uniform(rng, 0.1, 1.0);
    const double x0 = testing::uniform(rng, -50, 50);
    const double y0 = testing::uniform(rng, -50, 50);
    const GridSpec spec({x0, x0 + static_cast<double>(w) * voxel}, {y0, y0 + static_cast<double>(h) * voxel},
                        {-3.0, 1.0}, voxel, voxel);
    if (spec.cells_x() != w || spec.cells_y() != h) continue;
    const Pose2D pose(testing::uniform(rng, -1e3, 1e3), testing::uniform(rng, -1e3, 1e3),
                      testing::uniform(rng, -3.1, 3.1));
    const FeatureMap m(spec, c, pose, oracle::random_values(rng, c * h * w));
    const auto bytes = codec::encode(m, pose);
    const codec::Decoded d = codec::decode(bytes);
    ASSERT_EQ(d.map, m);
    ASSERT_EQ(d.pose, pose);
    ASSERT_EQ(codec::encode(d.map, d.pose), bytes);
  }
}

TEST(Codec, EverySingleByteCorruptionIsDetected) {
  const auto good = codec::encode(golden_map(), {1.5, -2.25, 0.5});
  for (std::size_t i = 0; i < good.size(); ++i) {
    for (int flip = 1; flip < 256; ++flip) {
      auto bad = good;
      bad[i] ^= static_cast<std::uint8_t>(flip);
      ASSERT_THROW(codec::decode(bad), DecodeError) << "byte " << i << " xor " << flip;
    }
  }
}

TEST(Codec, PayloadCorruptionIsCrcMismatch) {
  auto bytes = codec::encode(golden_map(), {});
  bytes[codec::kHeaderSize + 5] ^= 0x10;
  EXPECT_EQ(kind_of(bytes), DecodeErrorKind::CrcMismatch);
}

TEST(Codec, GoldenFile) {
  const auto golden = read_file(COFF_TEST_DATA_DIR "/golden_c2_h2_w3.bin");
  ASSERT_EQ(golden.size(), 148U);
  EXPECT_EQ(codec::encode(golden_map(), {1.5, -2.25, 0.5}), golden);
  const codec::Decoded d = codec::decode(golden);
  EXPECT_EQ(d.map.at(1, 1, 2), 2.75F);
  EXPECT_EQ(d.pose, Pose2D(1.5, -2.25, 0.5));
}

TEST(Codec, Crc32CheckValue) {
  const std::string s = "123456789";
  EXPECT_EQ(codec::crc32({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()}), 0xCBF43926U);
}

TEST(Codec, DistinctErrorKinds) {
  const auto good = codec::encode(golden_map(), {});

  auto magic = good;
  magic[0] = 'X';
  EXPECT_EQ(kind_of(magic), DecodeErrorKind::BadMagic);

  EXPECT_EQ(kind_of({good.begin(), good.end() - 1}), DecodeErrorKind::Truncated);
  EXPECT_EQ(kind_of({good.begin(), good.begin() + 50}), DecodeErrorKind::Truncated);

  auto extra = good;
  extra.push_back(0);
  EXPECT_EQ(kind_of(extra), DecodeErrorKind::TrailingBytes);

  auto crc = good;
  crc.back() ^= 1;
  EXPECT_EQ(kind_of(crc), DecodeErrorKind::CrcMismatch);

  auto huge = good;
  const std::uint32_t big = 0xFFFFFFFFU;
  std::memcpy(huge.data() + 84, &big, 4);  // channels
  EXPECT_EQ(kind_of(huge), DecodeErrorKind::DimOverflow);

  // Swap H and W with a valid CRC: dimensions no longer agree with the grid.
  auto swapped = good;
  const std::uint32_t three = 3, two = 2;
  std::memcpy(swapped.data() + 88, &three, 4);
  std::memcpy(swapped.data() + 92, &two, 4);
  const std::uint32_t fixed = codec::crc32({swapped.data(), swapped.size() - 4});
  std::memcpy(swapped.data() + swapped.size() - 4, &fixed, 4);
  EXPECT_EQ(kind_of(swapped), DecodeErrorKind::BadHeader);
}

TEST(Bandwidth, ThreeMegabytesAtTwentyFps) {
  const auto rep = codec::bandwidth_report(250000, 1000, 20.0, 27e6);
  EXPECT_EQ(rep.raw_bytes, 3000000U);
  EXPECT_EQ(rep.raw_throughput_bps, 480e6);
}

TEST(Bandwidth, ZeroPoints) {
  const auto rep = codec::bandwidth_report(0, 104, 20.0, 27e6);
  EXPECT_EQ(rep.raw_bytes, 0U);
  EXPECT_EQ(rep.ratio, 0.0);
  EXPECT_THROW(codec::bandwidth_report(0, 104, 0.0, 27e6), std::invalid_argument);
}

TEST(Bandwidth, DefaultGridRatio) {
  // 96 + 4 * 128 * 200 * 176 + 4 = 18,022,500 bytes against 12 * 250,000 = 3,000,000.
  const std::size_t msg = codec::message_size(128, 200, 176);
  const auto rep = codec::bandwidth_report(250000, msg, 20.0, 27e6);
  EXPECT_EQ(msg, 18022500U);
  EXPECT_DOUBLE_EQ(rep.ratio, 3000000.0 / 18022500.0);
  EXPECT_DOUBLE_EQ(rep.feature_transfer_s, 18022500.0 * 8.0 / 27e6);
}

}  // namespace
}  // namespace coff
