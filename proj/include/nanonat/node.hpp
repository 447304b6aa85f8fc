#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nanonat/chains.hpp"
#include "nanonat/conntrack.hpp"
#include "nanonat/trace.hpp"

namespace nanonat {

struct Interface {
  std::string name;
  Ipv4Address address;
  int prefix_len = 24;

  Cidr network() const { return Cidr(address, prefix_len); }
};

struct RouteEntry {
  Cidr prefix;
  std::optional<Ipv4Address> via;  // absent for directly connected
  std::string iface;
};

/// Longest prefix containing dst; empty means no route (caller drops).
const RouteEntry* lpm_lookup(const std::vector<RouteEntry>& routes, Ipv4Address dst);

struct Emission {
  std::string iface;
  Packet packet;
};

/// A simulated router: interfaces, routes, rule tables, conntrack. All
/// mutation happens inside process_packet/originate on the owning thread.
class RouterNode {
 public:
  std::string name;
  std::vector<Interface> interfaces;
  std::vector<RouteEntry> routes;
  TableSet tables;
  ConnTable conntrack;
  PortAllocator allocator;

  const Interface* find_interface(const std::string& iface_name) const;
  bool is_local_address(Ipv4Address addr) const;

  /// Adds the directly-connected route for each interface.
  void add_connected_routes();

  /// Rewrites an interface address, flushing MASQUERADE bindings that
  /// translated to the old address.
  void set_interface_address(const std::string& iface_name, Ipv4Address addr);

  /// Runs one received packet through the netfilter order:
  /// conntrack restore / nat PREROUTING, routing, filter INPUT or
  /// TTL + filter FORWARD, nat POSTROUTING, emission. Every chain
  /// traverse and translation lands in the trace.
  std::vector<Emission> process_packet(const Packet& p, const std::string& in_iface,
                                       std::int64_t now_ms, Trace& trace);

  /// Locally generated traffic: nat OUTPUT, filter OUTPUT, routing,
  /// nat POSTROUTING.
  std::vector<Emission> originate(const Packet& p, std::int64_t now_ms, Trace& trace);

 private:
  std::vector<Emission> run_pipeline(Packet p, std::optional<std::string> in_iface,
                                     std::int64_t now_ms, Trace& trace);

  /// Addresses this node source-NATs onto. An inbound packet addressed to
  /// one of them that matches no conntrack entry and no DNAT has nowhere
  /// to go and is dropped (`no-conntrack-entry`).
  std::vector<Ipv4Address> nat_front_addresses() const;
};

/// A simulated end host: one interface, a default gateway, and just enough
/// behavior to answer echo requests.
class HostNode {
 public:
  std::string name;
  Interface interface;
  Ipv4Address gateway;

  /// Emits an injected packet out the interface (toward the gateway).
  Emission send(const Packet& p, std::int64_t now_ms, Trace& trace) const;

  /// Delivers received packets; an echo request also produces the echo
  /// reply (endpoints swapped, same identifier and sequence, fresh TTL 64).
  std::vector<Emission> receive(const Packet& p, const std::string& in_iface, std::int64_t now_ms,
                                Trace& trace) const;
};

}  // namespace nanonat
