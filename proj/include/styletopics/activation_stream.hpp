#pragma once

// Reader and writer for the "OVAC" activation interchange stream.
//
// Layout (all integers little-endian):
//   header:  "OVAC"  u16 version (=1)  u16 reserved (=0)
//   record:  u16 len + item_id bytes
//            u16 len + image_id bytes
//            u32 layer_id  u32 C  u32 H  u32 W
//            C*H*W IEEE-754 binary32 values, channel-major then row-major
// Records repeat until EOF.

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "styletopics/errors.hpp"

namespace styletopics {

inline constexpr std::array<char, 4> kActivationMagic = {'O', 'V', 'A', 'C'};
inline constexpr std::uint16_t kActivationVersion = 1;

struct ActivationRecord {
  std::string item_id;
  std::string image_id;
  std::uint32_t layer_id = 0;
  std::uint32_t channels = 1;
  std::uint32_t height = 1;
  std::uint32_t width = 1;
  std::vector<float> values;  // channels * height * width

  std::size_t grid_size() const noexcept { return std::size_t{height} * width; }

  float at(std::uint32_t c, std::uint32_t h, std::uint32_t w) const {
    return values[(std::size_t{c} * height + h) * width + w];
  }

  std::span<const float> channel(std::uint32_t c) const {
    return std::span<const float>(values).subspan(std::size_t{c} * grid_size(), grid_size());
  }

  // Bitwise comparison of payloads, so -0.0f and 0.0f differ.
  friend bool operator==(const ActivationRecord& a, const ActivationRecord& b) {
    return a.item_id == b.item_id && a.image_id == b.image_id && a.layer_id == b.layer_id &&
           a.channels == b.channels && a.height == b.height && a.width == b.width &&
           a.values.size() == b.values.size() &&
           (a.values.empty() ||
            std::memcmp(a.values.data(), b.values.data(), a.values.size() * sizeof(float)) == 0);
  }
};

// Throws ValidationError if the record cannot be written.
inline void validate(const ActivationRecord& r) {
  if (r.item_id.empty()) throw ValidationError("activation record has empty item_id");
  if (r.item_id.size() > UINT16_MAX || r.image_id.size() > UINT16_MAX)
    throw ValidationError("activation record id longer than 65535 bytes");
  if (r.channels == 0 || r.height == 0 || r.width == 0)
    throw ValidationError("activation record for item '" + r.item_id + "' has a zero dimension");
  const std::uint64_t n = std::uint64_t{r.channels} * r.height * r.width;
  if (r.values.size() != n)
    throw ValidationError("activation record for item '" + r.item_id + "' has " +
                          std::to_string(r.values.size()) + " values, expected " + std::to_string(n));
  for (float v : r.values) {
    if (!std::isfinite(v))
      throw ValidationError("activation record for item '" + r.item_id + "' image '" + r.image_id +
                            "' contains a non-finite value");
  }
}

namespace detail {

inline void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline std::uint32_t get_u32(const unsigned char* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) |
         (std::uint32_t{p[3]} << 24);
}

}  // namespace detail

class ActivationWriter {
 public:
  // Writes the header immediately.
  explicit ActivationWriter(std::ostream& out) : out_(out) {
    std::string header(kActivationMagic.begin(), kActivationMagic.end());
    detail::put_u16(header, kActivationVersion);
    detail::put_u16(header, 0);
    emit(header);
  }

  // A record failing validation is rejected before any of its bytes are written.
  void write(const ActivationRecord& r) {
    validate(r);
    std::string buf;
    buf.reserve(4 + r.item_id.size() + r.image_id.size() + 16 + r.values.size() * 4);
    detail::put_u16(buf, static_cast<std::uint16_t>(r.item_id.size()));
    buf += r.item_id;
    detail::put_u16(buf, static_cast<std::uint16_t>(r.image_id.size()));
    buf += r.image_id;
    detail::put_u32(buf, r.layer_id);
    detail::put_u32(buf, r.channels);
    detail::put_u32(buf, r.height);
    detail::put_u32(buf, r.width);
    if constexpr (std::endian::native == std::endian::little) {
      const auto* bytes = reinterpret_cast<const char*>(r.values.data());
      buf.append(bytes, r.values.size() * sizeof(float));
    } else {
      for (float v : r.values) detail::put_u32(buf, std::bit_cast<std::uint32_t>(v));
    }
    emit(buf);
  }

 private:
  void emit(const std::string& bytes) {
    out_.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out_) throw std::runtime_error("failed writing activation stream");
  }

  std::ostream& out_;
};

// Pulls one record at a time; only the current record is held in memory.
class ActivationReader {
 public:
  explicit ActivationReader(std::istream& in) : in_(in) {
    unsigned char header[8];
    const std::size_t got = read_some(header, 4);
    if (got < 4 || std::memcmp(header, kActivationMagic.data(), 4) != 0)
      throw FormatError("not an OVAC activation stream (bad magic)");
    read_exact(header + 4, 4);
    const std::uint16_t version = detail::get_u16(header + 4);
    if (version != kActivationVersion) throw UnsupportedVersionError(version);
  }

  // Returns std::nullopt at a clean end of stream.
  std::optional<ActivationRecord> next() {
    unsigned char len[2];
    const std::size_t got = read_some(len, 2);
    if (got == 0) return std::nullopt;
    if (got < 2) throw TruncationError(offset_);

    ActivationRecord r;
    r.item_id = read_string(detail::get_u16(len));
    read_exact(len, 2);
    r.image_id = read_string(detail::get_u16(len));

    unsigned char dims[16];
    read_exact(dims, 16);
    r.layer_id = detail::get_u32(dims);
    r.channels = detail::get_u32(dims + 4);
    r.height = detail::get_u32(dims + 8);
    r.width = detail::get_u32(dims + 12);
    if (r.item_id.empty()) throw FormatError("record with empty item_id before offset " + std::to_string(offset_));
    if (r.channels == 0 || r.height == 0 || r.width == 0)
      throw FormatError("record with zero dimension before offset " + std::to_string(offset_));

    const std::uint64_t n = std::uint64_t{r.channels} * r.height * r.width;
    r.values.resize(n);
    if constexpr (std::endian::native == std::endian::little) {
      read_exact(reinterpret_cast<unsigned char*>(r.values.data()), n * sizeof(float));
    } else {
      std::vector<unsigned char> raw(n * 4);
      read_exact(raw.data(), raw.size());
      for (std::size_t i = 0; i < n; ++i)
        r.values[i] = std::bit_cast<float>(detail::get_u32(raw.data() + 4 * i));
    }
    for (float v : r.values) {
      if (!std::isfinite(v))
        throw FormatError("non-finite activation value in record for item '" + r.item_id + "'");
    }
    return r;
  }

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::size_t read_some(unsigned char* dst, std::size_t n) {
    in_.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
    const auto got = static_cast<std::size_t>(in_.gcount());
    offset_ += got;
    return got;
  }

  // On a short read, reports the offset of the first missing byte.
  void read_exact(unsigned char* dst, std::size_t n) {
    if (read_some(dst, n) != n) throw TruncationError(offset_);
  }

  std::string read_string(std::size_t n) {
    std::string s(n, '\0');
    read_exact(reinterpret_cast<unsigned char*>(s.data()), n);
    return s;
  }

  std::istream& in_;
  std::uint64_t offset_ = 0;
};

inline std::string write_activation_stream(std::span<const ActivationRecord> records) {
  for (const auto& r : records) validate(r);
  std::ostringstream out(std::ios::binary);
  ActivationWriter writer(out);
  for (const auto& r : records) writer.write(r);
  return std::move(out).str();
}

inline std::vector<ActivationRecord> read_activation_stream(std::istream& in) {
  ActivationReader reader(in);
  std::vector<ActivationRecord> out;
  while (auto r = reader.next()) out.push_back(std::move(*r));
  return out;
}

inline std::vector<ActivationRecord> read_activation_stream(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  return read_activation_stream(in);
}

}  // namespace styletopics
