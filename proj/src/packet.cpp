#include "nanonat/packet.hpp"

#include <algorithm>

#include "nanonat/checksum.hpp"

namespace nanonat {

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(std::uint8_t(v >> 8));
  out.push_back(std::uint8_t(v & 0xFF));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(std::uint8_t(v >> 24));
  out.push_back(std::uint8_t(v >> 16));
  out.push_back(std::uint8_t(v >> 8));
  out.push_back(std::uint8_t(v));
}

std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t off) {
  return std::uint16_t((std::uint16_t(b[off]) << 8) | b[off + 1]);
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t off) {
  return (std::uint32_t(b[off]) << 24) | (std::uint32_t(b[off + 1]) << 16) |
         (std::uint32_t(b[off + 2]) << 8) | b[off + 3];
}

std::size_t transport_header_len(const Transport& t) {
  if (std::holds_alternative<TcpSegment>(t)) return kTcpHeaderLen;
  if (std::holds_alternative<UdpDatagram>(t)) return kUdpHeaderLen;
  return kIcmpEchoLen;
}

// Transport bytes with the checksum field zeroed, for checksum computation.
std::vector<std::uint8_t> transport_bytes(const Packet& p, bool zero_checksum) {
  std::vector<std::uint8_t> out;
  out.reserve(transport_header_len(p.transport) + p.payload.size());
  if (const auto* tcp = std::get_if<TcpSegment>(&p.transport)) {
    put_u16(out, tcp->src_port);
    put_u16(out, tcp->dst_port);
    put_u32(out, tcp->seq);
    put_u32(out, tcp->ack);
    out.push_back(0x50);  // data offset 5, no options
    out.push_back(tcp->flags);
    put_u16(out, tcp->window);
    put_u16(out, zero_checksum ? 0 : tcp->checksum);
    put_u16(out, tcp->urgent);
  } else if (const auto* udp = std::get_if<UdpDatagram>(&p.transport)) {
    put_u16(out, udp->src_port);
    put_u16(out, udp->dst_port);
    put_u16(out, udp->length);
    put_u16(out, zero_checksum ? 0 : udp->checksum);
  } else {
    const auto& echo = std::get<IcmpEcho>(p.transport);
    out.push_back(std::uint8_t(echo.kind));
    out.push_back(0);  // code
    put_u16(out, zero_checksum ? 0 : echo.checksum);
    put_u16(out, echo.identifier);
    put_u16(out, echo.sequence);
  }
  out.insert(out.end(), p.payload.begin(), p.payload.end());
  return out;
}

std::uint16_t compute_transport_checksum(const Packet& p) {
  const auto segment = transport_bytes(p, /*zero_checksum=*/true);
  ChecksumAccumulator acc;
  if (!std::holds_alternative<IcmpEcho>(p.transport)) {
    // TCP/UDP pseudo-header: src, dst, zero byte, protocol, segment length.
    std::uint8_t pseudo[12];
    for (int i = 0; i < 4; ++i) pseudo[i] = p.ip.src.octet(i);
    for (int i = 0; i < 4; ++i) pseudo[4 + i] = p.ip.dst.octet(i);
    pseudo[8] = 0;
    pseudo[9] = std::uint8_t(p.ip.protocol);
    pseudo[10] = std::uint8_t(segment.size() >> 8);
    pseudo[11] = std::uint8_t(segment.size() & 0xFF);
    acc.add(pseudo);
  }
  acc.add(segment);
  std::uint16_t sum = acc.finish();
  if (std::holds_alternative<UdpDatagram>(p.transport) && sum == 0) sum = 0xFFFF;
  return sum;
}

std::vector<std::uint8_t> ip_header_bytes(const Packet& p, bool zero_checksum) {
  std::vector<std::uint8_t> out;
  out.reserve(kIpv4HeaderLen);
  out.push_back(0x45);  // version 4, ihl 5
  out.push_back(0x00);  // DSCP/ECN
  put_u16(out, p.ip.total_length);
  put_u16(out, p.ip.identification);
  put_u16(out, 0x0000);  // flags + fragment offset: never fragmented
  out.push_back(p.ip.ttl);
  out.push_back(std::uint8_t(p.ip.protocol));
  put_u16(out, zero_checksum ? 0 : p.ip.header_checksum);
  put_u32(out, p.ip.src.value());
  put_u32(out, p.ip.dst.value());
  return out;
}

bool transport_checksum_ok(const Packet& p) {
  if (const auto* udp = std::get_if<UdpDatagram>(&p.transport)) {
    if (udp->checksum == 0) return true;  // disabled
  }
  // Valid iff recomputation reproduces the stored value. For UDP the
  // computed 0 -> 0xFFFF mapping makes both encodings of a zero sum agree.
  std::uint16_t stored = std::visit([](const auto& t) { return t.checksum; }, p.transport);
  return compute_transport_checksum(p) == stored;
}

}  // namespace

const char* proto_name(Proto p) {
  switch (p) {
    case Proto::Icmp: return "icmp";
    case Proto::Tcp: return "tcp";
    case Proto::Udp: return "udp";
  }
  return "?";
}

std::optional<Proto> proto_from_name(const std::string& name) {
  if (name == "icmp") return Proto::Icmp;
  if (name == "tcp") return Proto::Tcp;
  if (name == "udp") return Proto::Udp;
  return std::nullopt;
}

FiveTuple tuple_of(const Packet& p) {
  FiveTuple t;
  t.protocol = p.ip.protocol;
  t.src = p.ip.src;
  t.dst = p.ip.dst;
  if (const auto* tcp = std::get_if<TcpSegment>(&p.transport)) {
    t.src_id = tcp->src_port;
    t.dst_id = tcp->dst_port;
  } else if (const auto* udp = std::get_if<UdpDatagram>(&p.transport)) {
    t.src_id = udp->src_port;
    t.dst_id = udp->dst_port;
  } else {
    const auto& echo = std::get<IcmpEcho>(p.transport);
    t.src_id = echo.identifier;
    t.dst_id = echo.identifier;
  }
  return t;
}

void finalize_packet(Packet& p) {
  if (auto* udp = std::get_if<UdpDatagram>(&p.transport)) {
    udp->length = std::uint16_t(kUdpHeaderLen + p.payload.size());
  }
  p.ip.total_length =
      std::uint16_t(kIpv4HeaderLen + transport_header_len(p.transport) + p.payload.size());
  std::uint16_t transport_sum = compute_transport_checksum(p);
  std::visit([&](auto& t) { t.checksum = transport_sum; }, p.transport);
  p.ip.header_checksum = checksum16(ip_header_bytes(p, /*zero_checksum=*/true));
}

std::vector<std::uint8_t> serialize_packet(const Packet& p) {
  Packet copy = p;
  std::uint16_t transport_sum = compute_transport_checksum(copy);
  std::visit([&](auto& t) { t.checksum = transport_sum; }, copy.transport);
  copy.ip.header_checksum = checksum16(ip_header_bytes(copy, /*zero_checksum=*/true));

  std::vector<std::uint8_t> out = ip_header_bytes(copy, /*zero_checksum=*/false);
  const auto segment = transport_bytes(copy, /*zero_checksum=*/false);
  out.insert(out.end(), segment.begin(), segment.end());
  return out;
}

Packet parse_packet(std::span<const std::uint8_t> bytes) {
  using Kind = PacketError::Kind;
  if (bytes.size() < kIpv4HeaderLen) throw PacketError(Kind::Truncated, "short of an IPv4 header");

  const std::uint8_t version = bytes[0] >> 4;
  if (version != 4) throw PacketError(Kind::BadVersion, "IP version " + std::to_string(version));
  const std::uint8_t ihl = bytes[0] & 0x0F;
  if (ihl != 5) throw PacketError(Kind::OptionsPresent, "ihl " + std::to_string(ihl));

  const std::uint16_t flags_frag = get_u16(bytes, 6);
  if (flags_frag != 0) throw PacketError(Kind::Fragmented, "flags/fragment-offset set");

  Packet p;
  p.ip.total_length = get_u16(bytes, 2);
  p.ip.identification = get_u16(bytes, 4);
  p.ip.ttl = bytes[8];
  const std::uint8_t proto = bytes[9];
  p.ip.header_checksum = get_u16(bytes, 10);
  p.ip.src = Ipv4Address(get_u32(bytes, 12));
  p.ip.dst = Ipv4Address(get_u32(bytes, 16));

  if (p.ip.total_length > bytes.size())
    throw PacketError(Kind::Truncated, "total_length exceeds the byte count");
  if (p.ip.total_length < bytes.size())
    throw PacketError(Kind::BadLength, "bytes beyond total_length");
  if (checksum16(bytes.subspan(0, kIpv4HeaderLen)) != 0)
    throw PacketError(Kind::BadChecksum, "IP header checksum");

  if (proto != std::uint8_t(Proto::Icmp) && proto != std::uint8_t(Proto::Tcp) &&
      proto != std::uint8_t(Proto::Udp))
    throw PacketError(Kind::UnsupportedProtocol, "protocol " + std::to_string(proto));
  p.ip.protocol = Proto(proto);

  auto segment = bytes.subspan(kIpv4HeaderLen);
  switch (p.ip.protocol) {
    case Proto::Tcp: {
      if (segment.size() < kTcpHeaderLen) throw PacketError(Kind::Truncated, "short TCP header");
      if (segment[12] != 0x50) throw PacketError(Kind::OptionsPresent, "TCP data offset != 5");
      TcpSegment tcp;
      tcp.src_port = get_u16(segment, 0);
      tcp.dst_port = get_u16(segment, 2);
      tcp.seq = get_u32(segment, 4);
      tcp.ack = get_u32(segment, 8);
      tcp.flags = segment[13];
      tcp.window = get_u16(segment, 14);
      tcp.checksum = get_u16(segment, 16);
      tcp.urgent = get_u16(segment, 18);
      p.transport = tcp;
      p.payload.assign(segment.begin() + kTcpHeaderLen, segment.end());
      break;
    }
    case Proto::Udp: {
      if (segment.size() < kUdpHeaderLen) throw PacketError(Kind::Truncated, "short UDP header");
      UdpDatagram udp;
      udp.src_port = get_u16(segment, 0);
      udp.dst_port = get_u16(segment, 2);
      udp.length = get_u16(segment, 4);
      udp.checksum = get_u16(segment, 6);
      if (udp.length != segment.size())
        throw PacketError(Kind::BadLength, "UDP length disagrees with total_length");
      p.transport = udp;
      p.payload.assign(segment.begin() + kUdpHeaderLen, segment.end());
      break;
    }
    case Proto::Icmp: {
      if (segment.size() < kIcmpEchoLen) throw PacketError(Kind::Truncated, "short ICMP message");
      const std::uint8_t type = segment[0];
      if (type != std::uint8_t(IcmpEchoKind::Request) && type != std::uint8_t(IcmpEchoKind::Reply))
        throw PacketError(Kind::UnsupportedIcmpType, "ICMP type " + std::to_string(type));
      if (segment[1] != 0)
        throw PacketError(Kind::UnsupportedIcmpType, "ICMP code " + std::to_string(segment[1]));
      IcmpEcho echo;
      echo.kind = IcmpEchoKind(type);
      echo.checksum = get_u16(segment, 2);
      echo.identifier = get_u16(segment, 4);
      echo.sequence = get_u16(segment, 6);
      p.transport = echo;
      p.payload.assign(segment.begin() + kIcmpEchoLen, segment.end());
      break;
    }
  }

  if (!transport_checksum_ok(p)) throw PacketError(Kind::BadChecksum, "transport checksum");
  return p;
}

Packet rewrite_endpoint(const Packet& p, Endpoint which, Ipv4Address addr,
                        std::optional<std::uint16_t> id) {
  Packet out = p;
  if (which == Endpoint::Source) {
    out.ip.src = addr;
  } else {
    out.ip.dst = addr;
  }
  if (id) {
    if (auto* tcp = std::get_if<TcpSegment>(&out.transport)) {
      (which == Endpoint::Source ? tcp->src_port : tcp->dst_port) = *id;
    } else if (auto* udp = std::get_if<UdpDatagram>(&out.transport)) {
      (which == Endpoint::Source ? udp->src_port : udp->dst_port) = *id;
    } else {
      std::get<IcmpEcho>(out.transport).identifier = *id;
    }
  }
  finalize_packet(out);
  return out;
}

std::optional<Packet> decrement_ttl(const Packet& p) {
  if (p.ip.ttl <= 1) return std::nullopt;
  Packet out = p;
  out.ip.ttl = std::uint8_t(out.ip.ttl - 1);
  finalize_packet(out);
  return out;
}

Packet make_icmp_echo(Ipv4Address src, Ipv4Address dst, IcmpEchoKind kind,
                      std::uint16_t identifier, std::uint16_t sequence, std::uint8_t ttl,
                      std::vector<std::uint8_t> payload) {
  Packet p;
  p.ip.src = src;
  p.ip.dst = dst;
  p.ip.ttl = ttl;
  p.ip.protocol = Proto::Icmp;
  p.transport = IcmpEcho{kind, identifier, sequence, 0};
  p.payload = std::move(payload);
  finalize_packet(p);
  return p;
}

Packet make_udp(Ipv4Address src, std::uint16_t src_port, Ipv4Address dst,
                std::uint16_t dst_port, std::uint8_t ttl, std::vector<std::uint8_t> payload) {
  Packet p;
  p.ip.src = src;
  p.ip.dst = dst;
  p.ip.ttl = ttl;
  p.ip.protocol = Proto::Udp;
  p.transport = UdpDatagram{src_port, dst_port, 0, 0};
  p.payload = std::move(payload);
  finalize_packet(p);
  return p;
}

Packet make_tcp(Ipv4Address src, std::uint16_t src_port, Ipv4Address dst,
                std::uint16_t dst_port, std::uint32_t seq, std::uint8_t flags, std::uint8_t ttl,
                std::vector<std::uint8_t> payload) {
  Packet p;
  p.ip.src = src;
  p.ip.dst = dst;
  p.ip.ttl = ttl;
  p.ip.protocol = Proto::Tcp;
  TcpSegment tcp;
  tcp.src_port = src_port;
  tcp.dst_port = dst_port;
  tcp.seq = seq;
  tcp.flags = flags;
  p.transport = tcp;
  p.payload = std::move(payload);
  finalize_packet(p);
  return p;
}

}  // namespace nanonat
