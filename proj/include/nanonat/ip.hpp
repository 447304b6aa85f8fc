#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>

namespace nanonat {

/// IPv4 address held in host byte order; rendered as dotted quad.
class Ipv4Address {
 public:
  constexpr Ipv4Address() = default;
  constexpr explicit Ipv4Address(std::uint32_t value) : value_(value) {}
  constexpr Ipv4Address(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d)
      : value_((std::uint32_t(a) << 24) | (std::uint32_t(b) << 16) | (std::uint32_t(c) << 8) | d) {}

  constexpr std::uint32_t value() const { return value_; }
  constexpr std::uint8_t octet(int i) const { return std::uint8_t(value_ >> (8 * (3 - i))); }

  std::string to_string() const;

  // Strict dotted-quad parse: four decimal octets 0..255, nothing else.
  static std::optional<Ipv4Address> parse(const std::string& text);

  auto operator<=>(const Ipv4Address&) const = default;

 private:
  std::uint32_t value_ = 0;
};

/// IPv4 prefix. The stored base has all host bits cleared, so two Cidr
/// values compare equal iff they denote the same network.
class Cidr {
 public:
  constexpr Cidr() = default;
  Cidr(Ipv4Address base, int prefix_len);

  Ipv4Address base() const { return base_; }
  int prefix_len() const { return prefix_len_; }

  bool contains(Ipv4Address addr) const;

  std::string to_string() const;  // "a.b.c.d/len"

  // Accepts "a.b.c.d/len" or a bare address (read as /32).
  static std::optional<Cidr> parse(const std::string& text);

  auto operator<=>(const Cidr&) const = default;

 private:
  Ipv4Address base_;
  int prefix_len_ = 0;
};

std::uint32_t prefix_mask(int prefix_len);

}  // namespace nanonat
