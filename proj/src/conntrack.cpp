#include "nanonat/conntrack.hpp"

#include <algorithm>
#include <sstream>

namespace nanonat {

int timeout_secs_for(Proto proto) {
  switch (proto) {
    case Proto::Tcp: return kTcpTimeoutSecs;
    case Proto::Udp: return kUdpTimeoutSecs;
    case Proto::Icmp: return kIcmpTimeoutSecs;
  }
  return kUdpTimeoutSecs;
}

PortAllocator::PortAllocator() {
  order_.resize(std::size_t(kRangeHi) - kRangeLo + 1);
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = std::uint16_t(kRangeLo + i);
}

void PortAllocator::set_shuffle_seed(std::uint64_t seed) {
  // Hand-rolled Fisher-Yates: std::shuffle's draw sequence is not pinned
  // by the standard, and the scan order must be stable across toolchains.
  std::uint64_t state = seed ? seed : 0x9E3779B97F4A7C15ull;
  auto next = [&state]() {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    return state;
  };
  for (std::size_t i = order_.size() - 1; i > 0; --i) {
    std::size_t j = std::size_t(next() % (i + 1));
    std::swap(order_[i], order_[j]);
  }
  cursor_ = 0;
}

std::optional<std::uint16_t> PortAllocator::allocate(Proto proto, Ipv4Address addr,
                                                     std::uint16_t preferred) {
  const auto key = [&](std::uint16_t id) { return std::make_tuple(proto, addr.value(), id); };
  if (!in_use_.count(key(preferred))) {
    in_use_.insert(key(preferred));
    return preferred;
  }
  for (std::size_t probe = 0; probe < order_.size(); ++probe) {
    const std::size_t slot = (cursor_ + probe) % order_.size();
    const std::uint16_t id = order_[slot];
    if (in_use_.count(key(id))) continue;
    in_use_.insert(key(id));
    cursor_ = (slot + 1) % order_.size();
    return id;
  }
  return std::nullopt;
}

void PortAllocator::release(Proto proto, Ipv4Address addr, std::uint16_t id) {
  in_use_.erase(std::make_tuple(proto, addr.value(), id));
}

bool PortAllocator::in_use(Proto proto, Ipv4Address addr, std::uint16_t id) const {
  return in_use_.count(std::make_tuple(proto, addr.value(), id)) > 0;
}

FiveTuple reply_tuple(const FiveTuple& translated) {
  FiveTuple r;
  r.protocol = translated.protocol;
  r.src = translated.dst;
  r.src_id = translated.dst_id;
  r.dst = translated.src;
  r.dst_id = translated.src_id;
  return r;
}

ConnEntry* ConnTable::insert(ConnEntry entry) {
  auto owned = std::make_unique<ConnEntry>(entry);
  ConnEntry* raw = owned.get();
  entries_.push_back(std::move(owned));
  by_original_[raw->original] = raw;
  by_reply_[reply_tuple(raw->translated)] = raw;
  ++created_total_;
  return raw;
}

void ConnTable::remove(const ConnEntry* entry, PortAllocator* alloc) {
  if (alloc && (entry->kind == NatKind::Snat || entry->kind == NatKind::Masquerade)) {
    alloc->release(entry->translated.protocol, entry->translated.src, entry->translated.src_id);
  }
  by_original_.erase(entry->original);
  by_reply_.erase(reply_tuple(entry->translated));
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [&](const auto& e) { return e.get() == entry; });
  entries_.erase(it);
  ++removed_total_;
}

ConnEntry* ConnTable::lookup_original(const FiveTuple& t, std::int64_t now_ms,
                                      PortAllocator* alloc) {
  auto it = by_original_.find(t);
  if (it == by_original_.end()) return nullptr;
  ConnEntry* entry = it->second;
  if (entry->expired(now_ms)) {
    remove(entry, alloc);  // expired entries never translate
    return nullptr;
  }
  return entry;
}

const ConnEntry* ConnTable::find_original(const FiveTuple& t) const {
  auto it = by_original_.find(t);
  return it == by_original_.end() ? nullptr : it->second;
}

std::optional<NatApply> ConnTable::snat_egress(PortAllocator& alloc, const Packet& p,
                                               Ipv4Address nat_addr,
                                               std::optional<std::uint16_t> preferred_id,
                                               NatKind kind, std::int64_t now_ms) {
  const FiveTuple t = tuple_of(p);
  if (ConnEntry* entry = lookup_original(t, now_ms, &alloc)) {
    entry->last_seen_ms = now_ms;
    Packet out =
        rewrite_endpoint(p, Endpoint::Source, entry->translated.src, entry->translated.src_id);
    return NatApply{std::move(out), *entry};
  }

  const std::uint16_t preferred = preferred_id.value_or(t.src_id);
  auto id = alloc.allocate(t.protocol, nat_addr, preferred);
  if (!id) return std::nullopt;

  Packet out = rewrite_endpoint(p, Endpoint::Source, nat_addr, *id);
  ConnEntry entry;
  entry.original = t;
  entry.translated = tuple_of(out);
  entry.kind = kind;
  entry.created_ms = now_ms;
  entry.last_seen_ms = now_ms;
  entry.ttl_secs = timeout_secs_for(t.protocol);
  ConnEntry* stored = insert(entry);
  return NatApply{std::move(out), *stored};
}

NatApply ConnTable::dnat_ingress(PortAllocator& alloc, const Packet& p, Ipv4Address to,
                                 std::optional<std::uint16_t> port, std::int64_t now_ms) {
  const FiveTuple t = tuple_of(p);
  if (ConnEntry* entry = lookup_original(t, now_ms, &alloc)) {
    entry->last_seen_ms = now_ms;
    Packet out =
        rewrite_endpoint(p, Endpoint::Destination, entry->translated.dst, entry->translated.dst_id);
    return NatApply{std::move(out), *entry};
  }

  Packet out = rewrite_endpoint(p, Endpoint::Destination, to, port);
  ConnEntry entry;
  entry.original = t;
  entry.translated = tuple_of(out);
  entry.kind = NatKind::Dnat;
  entry.created_ms = now_ms;
  entry.last_seen_ms = now_ms;
  entry.ttl_secs = timeout_secs_for(t.protocol);
  ConnEntry* stored = insert(entry);
  return NatApply{std::move(out), *stored};
}

std::optional<Packet> ConnTable::reverse_translate(const Packet& p, std::int64_t now_ms) {
  const FiveTuple t = tuple_of(p);
  auto it = by_reply_.find(t);
  if (it == by_reply_.end()) return std::nullopt;
  ConnEntry* entry = it->second;
  if (entry->expired(now_ms)) return std::nullopt;  // left for the sweep to free
  entry->last_seen_ms = now_ms;
  if (entry->kind == NatKind::Dnat) {
    // Reply from the DNAT'd host: restore the public destination as source.
    return rewrite_endpoint(p, Endpoint::Source, entry->original.dst, entry->original.dst_id);
  }
  // Reply to a SNAT/MASQUERADE flow: hand it back to the original source.
  return rewrite_endpoint(p, Endpoint::Destination, entry->original.src, entry->original.src_id);
}

std::size_t ConnTable::expire(PortAllocator& alloc, std::int64_t now_ms) {
  std::vector<const ConnEntry*> dead;
  for (const auto& entry : entries_) {
    if (entry->expired(now_ms)) dead.push_back(entry.get());
  }
  for (const ConnEntry* entry : dead) remove(entry, &alloc);
  return dead.size();
}

std::size_t ConnTable::flush_masquerade(PortAllocator& alloc, Ipv4Address addr) {
  std::vector<const ConnEntry*> hit;
  for (const auto& entry : entries_) {
    if (entry->kind == NatKind::Masquerade && entry->translated.src == addr)
      hit.push_back(entry.get());
  }
  for (const ConnEntry* entry : hit) remove(entry, &alloc);
  return hit.size();
}

std::string ConnTable::dump(std::int64_t now_ms) const {
  std::ostringstream out;
  for (const auto& entry : entries_) {
    if (entry->expired(now_ms)) continue;
    const FiveTuple& o = entry->original;
    const FiveTuple r = reply_tuple(entry->translated);
    out << proto_name(o.protocol) << " orig=" << o.src.to_string() << ':' << o.src_id << "->"
        << o.dst.to_string() << ':' << o.dst_id << " repl=" << r.src.to_string() << ':' << r.src_id
        << "->" << r.dst.to_string() << ':' << r.dst_id << " kind=" << nat_kind_name(entry->kind)
        << " age=" << (now_ms - entry->created_ms) / 1000 << "\n";
  }
  return out.str();
}

}  // namespace nanonat
