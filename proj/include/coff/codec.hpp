#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "coff/grid.hpp"

namespace coff::codec {

// Wire layout, all little-endian:
//   "CFF1"
//   pose x, y, heading                       3 x f64
//   x_min, x_max, y_min, y_max, vx, vy       6 x f64
//   cells_x, cells_y                         2 x u32
//   channels, height, width                  3 x u32
//   payload, channel-major then row-major    C*H*W x f32
//   CRC-32 (IEEE, reflected) of everything above
inline constexpr std::size_t kHeaderSize = 4 + 3 * 8 + 6 * 8 + 2 * 4 + 3 * 4;
inline constexpr std::size_t kTrailerSize = 4;

enum class DecodeErrorKind { BadMagic, Truncated, TrailingBytes, CrcMismatch, DimOverflow, BadHeader };

const char* to_string(DecodeErrorKind kind);

class DecodeError : public std::runtime_error {
 public:
  DecodeError(DecodeErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  DecodeErrorKind kind() const { return kind_; }

 private:
  DecodeErrorKind kind_;
};

std::size_t message_size(std::size_t channels, std::size_t height, std::size_t width);

std::vector<std::uint8_t> encode(const FeatureMap& map, const Pose2D& pose);

struct Decoded {
  FeatureMap map;
  Pose2D pose;
};

/// Throws DecodeError. The decoded grid carries the default z range, which is
/// not part of the wire format.
Decoded decode(std::span<const std::uint8_t> bytes);

std::uint32_t crc32(std::span<const std::uint8_t> bytes);

struct BandwidthReport {
  std::size_t points = 0;
  std::uint64_t raw_bytes = 0;
  std::uint64_t feature_bytes = 0;
  double ratio = 0.0;  // raw / feature
  double frame_rate = 0.0;
  double link_rate_bps = 0.0;
  double raw_throughput_bps = 0.0;
  double feature_throughput_bps = 0.0;
  double raw_transfer_s = 0.0;
  double feature_transfer_s = 0.0;
};

inline constexpr std::uint64_t kBytesPerRawPoint = 12;

/// Raw clouds are costed at three 32-bit reals per point.
BandwidthReport bandwidth_report(std::size_t point_count, std::uint64_t msg_bytes,
                                 double frame_rate, double link_rate_bps);

}  // namespace coff::codec
