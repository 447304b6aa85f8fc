#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "nanonat/chains.hpp"
#include "nanonat/packet.hpp"

namespace nanonat {

// Virtual clock ticks are milliseconds; conntrack lifetimes are whole
// virtual seconds.
inline constexpr int kTcpTimeoutSecs = 120;
inline constexpr int kUdpTimeoutSecs = 30;
inline constexpr int kIcmpTimeoutSecs = 30;

int timeout_secs_for(Proto proto);

/// Translation-id allocator. Source-port preservation first; otherwise ids
/// come from [61000, 65535] scanning from a cursor with wraparound. The
/// default scan order is sequential so traces are reproducible; a seeded
/// shuffle reorders the scan.
class PortAllocator {
 public:
  static constexpr std::uint16_t kRangeLo = 61000;
  static constexpr std::uint16_t kRangeHi = 65535;

  PortAllocator();

  /// Deterministic Fisher-Yates reorder of the scan sequence.
  void set_shuffle_seed(std::uint64_t seed);

  std::optional<std::uint16_t> allocate(Proto proto, Ipv4Address addr, std::uint16_t preferred);
  void release(Proto proto, Ipv4Address addr, std::uint16_t id);
  bool in_use(Proto proto, Ipv4Address addr, std::uint16_t id) const;

 private:
  std::vector<std::uint16_t> order_;
  std::size_t cursor_ = 0;
  std::set<std::tuple<Proto, std::uint32_t, std::uint16_t>> in_use_;
};

/// One tracked bidirectional flow.
struct ConnEntry {
  FiveTuple original;
  FiveTuple translated;
  NatKind kind = NatKind::Snat;
  std::int64_t created_ms = 0;
  std::int64_t last_seen_ms = 0;
  int ttl_secs = 0;

  bool expired(std::int64_t now_ms) const {
    return now_ms - last_seen_ms > std::int64_t(ttl_secs) * 1000;
  }
};

struct NatApply {
  Packet packet;
  ConnEntry entry;  // snapshot after the refresh
};

/// The cache that maps WAN-side ids back to local addresses: entries are
/// indexed by their original tuple and by the reply tuple (the translated
/// tuple with the two endpoints mirrored).
class ConnTable {
 public:
  /// Translates an egress packet. Reuses a live entry for the same tuple,
  /// else allocates an id (preferring `preferred_id`, defaulting to the
  /// packet's own source id) and records the binding. Empty on allocator
  /// exhaustion.
  std::optional<NatApply> snat_egress(PortAllocator& alloc, const Packet& p, Ipv4Address nat_addr,
                                      std::optional<std::uint16_t> preferred_id, NatKind kind,
                                      std::int64_t now_ms);

  /// Rewrites an ingress packet's destination and records the binding so
  /// the reply path can invert it.
  NatApply dnat_ingress(PortAllocator& alloc, const Packet& p, Ipv4Address to,
                        std::optional<std::uint16_t> port, std::int64_t now_ms);

  /// Restores a reply packet to the original flow. Empty when no live
  /// entry's reply tuple matches — the caller drops the packet.
  std::optional<Packet> reverse_translate(const Packet& p, std::int64_t now_ms);

  /// Removes entries idle past their lifetime, freeing their ids.
  std::size_t expire(PortAllocator& alloc, std::int64_t now_ms);

  /// Drops live MASQUERADE bindings translated to `addr`; used when an
  /// interface address changes.
  std::size_t flush_masquerade(PortAllocator& alloc, Ipv4Address addr);

  const ConnEntry* find_original(const FiveTuple& t) const;

  std::size_t live_count() const { return entries_.size(); }
  std::uint64_t created_total() const { return created_total_; }
  std::uint64_t removed_total() const { return removed_total_; }

  /// One line per live entry in creation order:
  /// `<proto> orig=<src>:<id>-><dst>:<id> repl=<src>:<id>-><dst>:<id>
  ///  kind=<SNAT|DNAT|MASQ> age=<secs>`
  std::string dump(std::int64_t now_ms) const;

 private:
  ConnEntry* lookup_original(const FiveTuple& t, std::int64_t now_ms, PortAllocator* alloc);
  ConnEntry* insert(ConnEntry entry);
  void remove(const ConnEntry* entry, PortAllocator* alloc);

  std::vector<std::unique_ptr<ConnEntry>> entries_;  // creation order
  std::map<FiveTuple, ConnEntry*> by_original_;
  std::map<FiveTuple, ConnEntry*> by_reply_;
  std::uint64_t created_total_ = 0;
  std::uint64_t removed_total_ = 0;
};

FiveTuple reply_tuple(const FiveTuple& translated);

}  // namespace nanonat
