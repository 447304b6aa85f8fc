#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace nanonat {

/// Running ones'-complement sum over big-endian 16-bit words (RFC 1071).
/// Odd-length input is padded with one zero byte. Feed any number of
/// byte ranges, then call finish() for the complemented 16-bit result.
class ChecksumAccumulator {
 public:
  void add(std::span<const std::uint8_t> data) {
    std::size_t i = 0;
    if (pending_ && !data.empty()) {
      fold(std::uint16_t((std::uint16_t(pending_byte_) << 8) | data[0]));
      pending_ = false;
      i = 1;
    }
    for (; i + 1 < data.size(); i += 2) {
      fold(std::uint16_t((std::uint16_t(data[i]) << 8) | data[i + 1]));
    }
    if (i < data.size()) {
      pending_ = true;
      pending_byte_ = data[i];
    }
  }

  void add_word(std::uint16_t word) {
    // Only meaningful on a 16-bit boundary; callers keep ranges even-sized
    // before mixing in words.
    fold(word);
  }

  std::uint16_t finish() const {
    std::uint32_t sum = sum_;
    if (pending_) {
      sum += std::uint32_t(pending_byte_) << 8;
      while (sum >> 16) sum = (sum & 0xFFFF) + (sum >> 16);
    }
    return std::uint16_t(~sum);
  }

 private:
  void fold(std::uint16_t word) {
    sum_ += word;
    if (sum_ > 0xFFFF) sum_ = (sum_ & 0xFFFF) + (sum_ >> 16);
  }

  std::uint32_t sum_ = 0;
  bool pending_ = false;
  std::uint8_t pending_byte_ = 0;
};

/// Internet checksum of one byte range. Empty input gives 0xFFFF.
inline std::uint16_t checksum16(std::span<const std::uint8_t> data) {
  ChecksumAccumulator acc;
  acc.add(data);
  return acc.finish();
}

}  // namespace nanonat
