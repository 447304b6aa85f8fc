#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <string>
#include <variant>
#include <vector>

#include "nanonat/node.hpp"
#include "nanonat/trace.hpp"

namespace nanonat {

/// One end of a point-to-point link, addressed by (node, interface).
struct LinkPeer {
  std::string node;
  std::string iface;
};

/// Lossless ordered link; every hop costs one virtual millisecond. A named
/// link models a transit segment (the paper-style "internet" cloud): it
/// relays with its own EMIT trace event and one extra millisecond.
struct Link {
  LinkPeer a;
  LinkPeer b;
  std::optional<std::string> name;
};

struct Injection {
  std::int64_t time_ms = 0;
  std::string host;
  Packet packet;
};

/// The whole simulated network: nodes, links, and a virtual-time event
/// queue. Deterministic by construction — events are processed in
/// (time, schedule-sequence) order and conntrack expiry sweeps run on
/// every whole virtual second.
class World {
 public:
  void add_host(HostNode host);
  void add_router(RouterNode router);
  void add_link(Link link);

  HostNode* find_host(const std::string& name);
  RouterNode* find_router(const std::string& name);
  bool has_node(const std::string& name) const;

  void inject(Injection injection);

  /// Runs the queue up to and including `until_ms`, returning the trace.
  Trace run(std::int64_t until_ms);

  /// Conntrack dump of every router (declaration order) at `now_ms`.
  std::string dump_conntrack(std::int64_t now_ms) const;

  const std::vector<std::string>& node_order() const { return node_order_; }

 private:
  struct QueuedPacket {
    std::int64_t time_ms = 0;
    std::uint64_t seq = 0;
    enum class What { HostSend, Arrive, LinkRelay } what = What::HostSend;
    std::string node;        // receiving node, sending host, or link name
    std::string iface;       // arrival interface
    std::string relay_node;  // far end a LinkRelay continues to
    Packet packet;
  };

  struct QueueOrder {
    bool operator()(const QueuedPacket& x, const QueuedPacket& y) const {
      if (x.time_ms != y.time_ms) return x.time_ms > y.time_ms;
      return x.seq > y.seq;
    }
  };

  void schedule(QueuedPacket event);
  void emit_onto_link(const std::string& node, const Emission& emission, std::int64_t now_ms);
  void run_expiry_up_to(std::int64_t time_ms);

  const Link* link_at(const std::string& node, const std::string& iface,
                      const LinkPeer** far_end) const;

  std::vector<std::string> node_order_;
  std::map<std::string, HostNode> hosts_;
  std::map<std::string, RouterNode> routers_;
  std::vector<Link> links_;
  std::priority_queue<QueuedPacket, std::vector<QueuedPacket>, QueueOrder> queue_;
  std::uint64_t next_seq_ = 0;
  std::int64_t next_sweep_ms_ = 1000;
  Trace trace_;
};

}  // namespace nanonat
