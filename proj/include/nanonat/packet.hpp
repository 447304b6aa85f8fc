#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "nanonat/ip.hpp"

namespace nanonat {

enum class Proto : std::uint8_t { Icmp = 1, Tcp = 6, Udp = 17 };

const char* proto_name(Proto p);  // "icmp" / "tcp" / "udp"
std::optional<Proto> proto_from_name(const std::string& name);

/// Fixed 20-byte IPv4 header: version 4, ihl 5, zero DSCP/ECN, zero
/// flags/fragment-offset. Fields not listed here are not representable.
struct Ipv4Header {
  std::uint16_t total_length = 0;
  std::uint16_t identification = 0;
  std::uint8_t ttl = 64;
  Proto protocol = Proto::Icmp;
  std::uint16_t header_checksum = 0;
  Ipv4Address src;
  Ipv4Address dst;

  bool operator==(const Ipv4Header&) const = default;
};

inline constexpr std::size_t kIpv4HeaderLen = 20;
inline constexpr std::size_t kTcpHeaderLen = 20;
inline constexpr std::size_t kUdpHeaderLen = 8;
inline constexpr std::size_t kIcmpEchoLen = 8;

// TCP carried header-only: flags are not interpreted anywhere, but every
// on-wire field of the option-less header is kept so parse/serialize
// round-trips byte-exactly.
struct TcpSegment {
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  std::uint32_t seq = 0;
  std::uint32_t ack = 0;
  std::uint8_t flags = 0;
  std::uint16_t window = 0;
  std::uint16_t checksum = 0;
  std::uint16_t urgent = 0;

  bool operator==(const TcpSegment&) const = default;
};

struct UdpDatagram {
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  std::uint16_t length = 0;  // header + payload bytes
  std::uint16_t checksum = 0;

  bool operator==(const UdpDatagram&) const = default;
};

enum class IcmpEchoKind : std::uint8_t { Reply = 0, Request = 8 };

struct IcmpEcho {
  IcmpEchoKind kind = IcmpEchoKind::Request;
  std::uint16_t identifier = 0;
  std::uint16_t sequence = 0;
  std::uint16_t checksum = 0;

  bool operator==(const IcmpEcho&) const = default;
};

using Transport = std::variant<TcpSegment, UdpDatagram, IcmpEcho>;

struct Packet {
  Ipv4Header ip;
  Transport transport;
  std::vector<std::uint8_t> payload;

  bool operator==(const Packet&) const = default;
};

/// The flow key. For ICMP echo the identifier stands in for both ports,
/// so src_id == dst_id always holds there.
struct FiveTuple {
  Proto protocol = Proto::Icmp;
  Ipv4Address src;
  std::uint16_t src_id = 0;
  Ipv4Address dst;
  std::uint16_t dst_id = 0;

  auto operator<=>(const FiveTuple&) const = default;
};

FiveTuple tuple_of(const Packet& p);

struct PacketError : std::runtime_error {
  enum class Kind {
    Truncated,
    BadVersion,
    BadChecksum,
    UnsupportedProtocol,
    OptionsPresent,
    Fragmented,
    BadLength,
    UnsupportedIcmpType,
  };

  PacketError(Kind kind, const std::string& message)
      : std::runtime_error(message), kind(kind) {}

  Kind kind;
};

/// Parses one IPv4 datagram. Accepts exactly the byte sequences this
/// module's serializer can reproduce, with one exception: a UDP checksum
/// of zero (checksum disabled) is accepted, though serialization always
/// emits the computed value.
Packet parse_packet(std::span<const std::uint8_t> bytes);

/// Wire form, big-endian throughout. IP and transport checksums are
/// computed from content; a computed UDP checksum of zero is sent as
/// 0xFFFF per the UDP rules.
std::vector<std::uint8_t> serialize_packet(const Packet& p);

/// Recomputes the length and checksum fields from the packet content.
/// Builders and mutators call this so the in-memory fields always match
/// the bytes serialize_packet would emit.
void finalize_packet(Packet& p);

enum class Endpoint { Source, Destination };

/// Replaces one endpoint address and, when `id` is given, its port (the
/// echo identifier for ICMP, which lives on both conceptual sides).
/// Checksums are recomputed; every other field is untouched.
Packet rewrite_endpoint(const Packet& p, Endpoint which, Ipv4Address addr,
                        std::optional<std::uint16_t> id);

/// One router hop. Empty result means the incoming TTL was already <= 1
/// and the caller must drop the packet.
std::optional<Packet> decrement_ttl(const Packet& p);

// Convenience builders; all return finalized packets.
Packet make_icmp_echo(Ipv4Address src, Ipv4Address dst, IcmpEchoKind kind,
                      std::uint16_t identifier, std::uint16_t sequence,
                      std::uint8_t ttl = 64, std::vector<std::uint8_t> payload = {});
Packet make_udp(Ipv4Address src, std::uint16_t src_port, Ipv4Address dst,
                std::uint16_t dst_port, std::uint8_t ttl = 64,
                std::vector<std::uint8_t> payload = {});
Packet make_tcp(Ipv4Address src, std::uint16_t src_port, Ipv4Address dst,
                std::uint16_t dst_port, std::uint32_t seq = 0, std::uint8_t flags = 0x02,
                std::uint8_t ttl = 64, std::vector<std::uint8_t> payload = {});

}  // namespace nanonat
