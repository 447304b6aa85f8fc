#include "nanonat/ip.hpp"

#include <cctype>
#include <sstream>

namespace nanonat {

std::uint32_t prefix_mask(int prefix_len) {
  if (prefix_len <= 0) return 0;
  if (prefix_len >= 32) return 0xFFFFFFFFu;
  return ~std::uint32_t(0) << (32 - prefix_len);
}

std::string Ipv4Address::to_string() const {
  std::ostringstream out;
  out << int(octet(0)) << '.' << int(octet(1)) << '.' << int(octet(2)) << '.' << int(octet(3));
  return out.str();
}

std::optional<Ipv4Address> Ipv4Address::parse(const std::string& text) {
  std::uint32_t value = 0;
  std::size_t pos = 0;
  for (int i = 0; i < 4; ++i) {
    if (i > 0) {
      if (pos >= text.size() || text[pos] != '.') return std::nullopt;
      ++pos;
    }
    if (pos >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos]))) return std::nullopt;
    std::uint32_t octet = 0;
    std::size_t digits = 0;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      octet = octet * 10 + std::uint32_t(text[pos] - '0');
      ++digits;
      ++pos;
      if (digits > 3 || octet > 255) return std::nullopt;
    }
    value = (value << 8) | octet;
  }
  if (pos != text.size()) return std::nullopt;
  return Ipv4Address(value);
}

Cidr::Cidr(Ipv4Address base, int prefix_len)
    : base_(base.value() & prefix_mask(prefix_len)), prefix_len_(prefix_len) {}

bool Cidr::contains(Ipv4Address addr) const {
  return (addr.value() & prefix_mask(prefix_len_)) == base_.value();
}

std::string Cidr::to_string() const {
  return base_.to_string() + "/" + std::to_string(prefix_len_);
}

std::optional<Cidr> Cidr::parse(const std::string& text) {
  auto slash = text.find('/');
  if (slash == std::string::npos) {
    auto addr = Ipv4Address::parse(text);
    if (!addr) return std::nullopt;
    return Cidr(*addr, 32);
  }
  auto addr = Ipv4Address::parse(text.substr(0, slash));
  if (!addr) return std::nullopt;
  const std::string len_text = text.substr(slash + 1);
  if (len_text.empty() || len_text.size() > 2) return std::nullopt;
  int len = 0;
  for (char c : len_text) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    len = len * 10 + (c - '0');
  }
  if (len > 32) return std::nullopt;
  return Cidr(*addr, len);
}

}  // namespace nanonat
