#include "coff/codec.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <limits>

namespace coff::codec {

namespace {

static_assert(std::endian::native == std::endian::little, "codec assumes a little-endian host");

constexpr char kMagic[4] = {'C', 'F', 'F', '1'};
constexpr std::uint64_t kMaxElements = (std::numeric_limits<std::uint32_t>::max() - kHeaderSize) / 4;

class Writer {
 public:
  explicit Writer(std::size_t reserve) { bytes_.reserve(reserve); }
  template <typename T>
  void put(T v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    bytes_.insert(bytes_.end(), p, p + sizeof(T));
  }
  void put_raw(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    bytes_.insert(bytes_.end(), p, p + n);
  }
  std::vector<std::uint8_t>& bytes() { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}
  template <typename T>
  T get() {
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::size_t pos() const { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

const char* to_string(DecodeErrorKind kind) {
  switch (kind) {
    case DecodeErrorKind::BadMagic: return "bad magic";
    case DecodeErrorKind::Truncated: return "truncated";
    case DecodeErrorKind::TrailingBytes: return "trailing bytes";
    case DecodeErrorKind::CrcMismatch: return "crc mismatch";
    case DecodeErrorKind::DimOverflow: return "dimension overflow";
    case DecodeErrorKind::BadHeader: return "bad header";
  }
  return "?";
}

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in pieces.
  constexpr std::size_t kChunk = 1U << 30;
  for (std::size_t off = 0; off < bytes.size(); off += kChunk) {
    const std::size_t n = std::min(kChunk, bytes.size() - off);
    crc = ::crc32(crc, bytes.data() + off, static_cast<uInt>(n));
  }
  return static_cast<std::uint32_t>(crc);
}

std::size_t message_size(std::size_t channels, std::size_t height, std::size_t width) {
  return kHeaderSize + 4 * channels * height * width + kTrailerSize;
}

std::vector<std::uint8_t> encode(const FeatureMap& map, const Pose2D& pose) {
  const GridSpec& spec = map.spec();
  Writer w(message_size(map.channels(), map.height(), map.width()));
  w.put_raw(kMagic, 4);
  w.put(pose.x());
  w.put(pose.y());
  w.put(pose.heading());
  w.put(spec.x_range().min);
  w.put(spec.x_range().max);
  w.put(spec.y_range().min);
  w.put(spec.y_range().max);
  w.put(spec.voxel_x());
  w.put(spec.voxel_y());
  w.put(static_cast<std::uint32_t>(spec.cells_x()));
  w.put(static_cast<std::uint32_t>(spec.cells_y()));
  w.put(static_cast<std::uint32_t>(map.channels()));
  w.put(static_cast<std::uint32_t>(map.height()));
  w.put(static_cast<std::uint32_t>(map.width()));
  std::span<const float> values = map.values();
  w.put_raw(values.data(), values.size_bytes());
  w.put(crc32(w.bytes()));
  return std::move(w.bytes());
}

Decoded decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw DecodeError(DecodeErrorKind::Truncated, "message shorter than magic");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw DecodeError(DecodeErrorKind::BadMagic, "magic is not CFF1");
  }
  if (bytes.size() < kHeaderSize + kTrailerSize) {
    throw DecodeError(DecodeErrorKind::Truncated, "message shorter than header");
  }

  Reader r(bytes.subspan(4));
  const auto px = r.get<double>();
  const auto py = r.get<double>();
  const auto heading = r.get<double>();
  const auto x_min = r.get<double>();
  const auto x_max = r.get<double>();
  const auto y_min = r.get<double>();
  const auto y_max = r.get<double>();
  const auto vx = r.get<double>();
  const auto vy = r.get<double>();
  const auto cells_x = r.get<std::uint32_t>();
  const auto cells_y = r.get<std::uint32_t>();
  const auto channels = r.get<std::uint32_t>();
  const auto height = r.get<std::uint32_t>();
  const auto width = r.get<std::uint32_t>();

  const std::uint64_t elements = static_cast<std::uint64_t>(channels) * height * width;
  if ((height != 0 && width != 0 && channels > kMaxElements / (static_cast<std::uint64_t>(height) * width)) ||
      elements > kMaxElements) {
    throw DecodeError(DecodeErrorKind::DimOverflow, "C*H*W exceeds the message size limit");
  }
  const std::size_t expected = kHeaderSize + 4 * elements + kTrailerSize;
  if (bytes.size() < expected) throw DecodeError(DecodeErrorKind::Truncated, "payload truncated");
  if (bytes.size() > expected) throw DecodeError(DecodeErrorKind::TrailingBytes, "bytes after CRC");

  std::uint32_t stored;
  std::memcpy(&stored, bytes.data() + expected - kTrailerSize, 4);
  if (crc32(bytes.first(expected - kTrailerSize)) != stored) {
    throw DecodeError(DecodeErrorKind::CrcMismatch, "CRC-32 does not match");
  }

  if (channels == 0 || height != cells_y || width != cells_x) {
    throw DecodeError(DecodeErrorKind::BadHeader, "dimensions disagree with grid");
  }
  try {
    GridSpec defaults;
    GridSpec spec({x_min, x_max}, {y_min, y_max}, defaults.z_range(), vx, vy);
    if (spec.cells_x() != cells_x || spec.cells_y() != cells_y) {
      throw DecodeError(DecodeErrorKind::BadHeader, "cell counts disagree with extents");
    }
    std::vector<float> values(elements);
    std::memcpy(values.data(), bytes.data() + kHeaderSize, 4 * elements);
    const Pose2D pose(px, py, heading);
    return {FeatureMap(spec, channels, pose, std::move(values)), pose};
  } catch (const std::invalid_argument& e) {
    throw DecodeError(DecodeErrorKind::BadHeader, e.what());
  }
}

BandwidthReport bandwidth_report(std::size_t point_count, std::uint64_t msg_bytes,
                                 double frame_rate, double link_rate_bps) {
  if (!(frame_rate > 0.0) || !(link_rate_bps > 0.0)) {
    throw std::invalid_argument("bandwidth_report: rates must be positive");
  }
  BandwidthReport rep;
  rep.points = point_count;
  rep.raw_bytes = kBytesPerRawPoint * point_count;
  rep.feature_bytes = msg_bytes;
  rep.ratio = msg_bytes == 0 ? 0.0 : static_cast<double>(rep.raw_bytes) / static_cast<double>(msg_bytes);
  rep.frame_rate = frame_rate;
  rep.link_rate_bps = link_rate_bps;
  rep.raw_throughput_bps = static_cast<double>(rep.raw_bytes) * 8.0 * frame_rate;
  rep.feature_throughput_bps = static_cast<double>(msg_bytes) * 8.0 * frame_rate;
  rep.raw_transfer_s = static_cast<double>(rep.raw_bytes) * 8.0 / link_rate_bps;
  rep.feature_transfer_s = static_cast<double>(msg_bytes) * 8.0 / link_rate_bps;
  return rep;
}

}  // namespace coff::codec
