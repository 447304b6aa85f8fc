#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nanonat/packet.hpp"

namespace nanonat {

enum class TraceKind { Emit, Recv, Verdict, Xlate, Drop, Deliver };

const char* trace_kind_name(TraceKind k);

/// One observable event. Line form:
/// `<time_ms> <node> <KIND> <proto> <src>:<id> > <dst>:<id> ttl=<n>
///  [iface=<name>] [chain=<table>/<CHAIN> verdict=<V>] [reason=<text>]`
struct TraceEvent {
  std::int64_t time_ms = 0;
  std::string node;
  TraceKind kind = TraceKind::Emit;
  Proto proto = Proto::Icmp;
  Ipv4Address src;
  std::uint16_t src_id = 0;
  Ipv4Address dst;
  std::uint16_t dst_id = 0;
  std::uint8_t ttl = 0;
  std::optional<std::string> iface;
  std::optional<std::string> chain;    // e.g. "nat/POSTROUTING"
  std::optional<std::string> verdict;  // e.g. "MASQUERADE"
  std::optional<std::string> reason;   // e.g. "no-conntrack-entry"

  std::string render() const;
};

TraceEvent make_event(std::int64_t time_ms, std::string node, TraceKind kind, const Packet& p);

/// Append-only, totally ordered by append sequence.
class Trace {
 public:
  void add(TraceEvent event) { events_.push_back(std::move(event)); }

  const std::vector<TraceEvent>& events() const { return events_; }

  std::vector<std::string> lines() const;
  std::string to_text() const;  // one rendered event per line

 private:
  std::vector<TraceEvent> events_;
};

}  // namespace nanonat
