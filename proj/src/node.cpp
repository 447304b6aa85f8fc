#include "nanonat/node.hpp"

#include <algorithm>

namespace nanonat {

namespace {

std::string verdict_text(const Verdict& v) {
  if (std::holds_alternative<VerdictAccept>(v)) return "ACCEPT";
  if (std::holds_alternative<VerdictDrop>(v)) return "DROP";
  const auto& t = std::get<VerdictTranslate>(v);
  switch (t.kind) {
    case NatKind::Snat: return "SNAT";
    case NatKind::Dnat: return "DNAT";
    case NatKind::Masquerade: return "MASQUERADE";
  }
  return "?";
}

TraceEvent verdict_event(std::int64_t now_ms, const std::string& node, const Packet& p,
                         TableId table, ChainId chain, const Verdict& v) {
  TraceEvent ev = make_event(now_ms, node, TraceKind::Verdict, p);
  ev.chain = std::string(table_name(table)) + "/" + chain_name(chain);
  ev.verdict = verdict_text(v);
  return ev;
}

TraceEvent drop_event(std::int64_t now_ms, const std::string& node, const Packet& p,
                      const std::string& reason) {
  TraceEvent ev = make_event(now_ms, node, TraceKind::Drop, p);
  ev.reason = reason;
  return ev;
}

}  // namespace

const RouteEntry* lpm_lookup(const std::vector<RouteEntry>& routes, Ipv4Address dst) {
  const RouteEntry* best = nullptr;
  for (const RouteEntry& route : routes) {
    if (!route.prefix.contains(dst)) continue;
    if (!best || route.prefix.prefix_len() > best->prefix.prefix_len()) best = &route;
  }
  return best;
}

const Interface* RouterNode::find_interface(const std::string& iface_name) const {
  for (const Interface& iface : interfaces) {
    if (iface.name == iface_name) return &iface;
  }
  return nullptr;
}

bool RouterNode::is_local_address(Ipv4Address addr) const {
  return std::any_of(interfaces.begin(), interfaces.end(),
                     [&](const Interface& i) { return i.address == addr; });
}

void RouterNode::add_connected_routes() {
  for (const Interface& iface : interfaces) {
    routes.push_back(RouteEntry{iface.network(), std::nullopt, iface.name});
  }
}

void RouterNode::set_interface_address(const std::string& iface_name, Ipv4Address addr) {
  for (Interface& iface : interfaces) {
    if (iface.name != iface_name) continue;
    conntrack.flush_masquerade(allocator, iface.address);
    iface.address = addr;
    return;
  }
}

std::vector<Ipv4Address> RouterNode::nat_front_addresses() const {
  std::vector<Ipv4Address> out;
  const Chain& post = tables.chain(TableId::Nat, ChainId::Postrouting);
  for (const Rule& rule : post.rules) {
    if (const auto* snat = std::get_if<SnatTarget>(&rule.target)) {
      out.push_back(snat->to);
    } else if (std::holds_alternative<MasqueradeTarget>(rule.target)) {
      for (const Interface& iface : interfaces) {
        if (!rule.match.out_iface || *rule.match.out_iface == iface.name)
          out.push_back(iface.address);
      }
    }
  }
  return out;
}

std::vector<Emission> RouterNode::process_packet(const Packet& p, const std::string& in_iface,
                                                 std::int64_t now_ms, Trace& trace) {
  TraceEvent recv = make_event(now_ms, name, TraceKind::Recv, p);
  recv.iface = in_iface;
  trace.add(recv);
  return run_pipeline(p, in_iface, now_ms, trace);
}

std::vector<Emission> RouterNode::originate(const Packet& p, std::int64_t now_ms, Trace& trace) {
  return run_pipeline(p, std::nullopt, now_ms, trace);
}

std::vector<Emission> RouterNode::run_pipeline(Packet p, std::optional<std::string> in_iface,
                                               std::int64_t now_ms, Trace& trace) {
  bool flow_restored = false;
  bool dnat_applied = false;

  if (in_iface) {
    // Established flows are restored from the cache before any nat rule
    // runs; restored packets skip nat rule evaluation entirely.
    if (auto restored = conntrack.reverse_translate(p, now_ms)) {
      p = std::move(*restored);
      flow_restored = true;
      trace.add(make_event(now_ms, name, TraceKind::Xlate, p));
    } else {
      PacketContext ctx{&p, in_iface, std::nullopt};
      const Chain& pre = tables.chain(TableId::Nat, ChainId::Prerouting);
      Verdict v = traverse(pre, ctx);
      trace.add(verdict_event(now_ms, name, p, TableId::Nat, ChainId::Prerouting, v));
      if (std::holds_alternative<VerdictDrop>(v)) {
        trace.add(drop_event(now_ms, name, p, "rule-drop"));
        return {};
      }
      if (const auto* t = std::get_if<VerdictTranslate>(&v); t && t->kind == NatKind::Dnat) {
        NatApply applied = conntrack.dnat_ingress(allocator, p, *t->to, t->id, now_ms);
        p = std::move(applied.packet);
        dnat_applied = true;
        trace.add(make_event(now_ms, name, TraceKind::Xlate, p));
      }
    }
  } else {
    PacketContext ctx{&p, std::nullopt, std::nullopt};
    const Chain& nat_out = tables.chain(TableId::Nat, ChainId::Output);
    Verdict v = traverse(nat_out, ctx);
    trace.add(verdict_event(now_ms, name, p, TableId::Nat, ChainId::Output, v));
    if (std::holds_alternative<VerdictDrop>(v)) {
      trace.add(drop_event(now_ms, name, p, "rule-drop"));
      return {};
    }
    if (const auto* t = std::get_if<VerdictTranslate>(&v); t && t->kind == NatKind::Dnat) {
      NatApply applied = conntrack.dnat_ingress(allocator, p, *t->to, t->id, now_ms);
      p = std::move(applied.packet);
      dnat_applied = true;
      trace.add(make_event(now_ms, name, TraceKind::Xlate, p));
    }
    const Chain& filter_out = tables.chain(TableId::Filter, ChainId::Output);
    Verdict fv = traverse(filter_out, PacketContext{&p, std::nullopt, std::nullopt});
    trace.add(verdict_event(now_ms, name, p, TableId::Filter, ChainId::Output, fv));
    if (std::holds_alternative<VerdictDrop>(fv)) {
      trace.add(drop_event(now_ms, name, p, "rule-drop"));
      return {};
    }
  }

  // Routing decision on the (possibly rewritten) destination.
  if (is_local_address(p.ip.dst)) {
    if (in_iface && !flow_restored && !dnat_applied) {
      const auto fronts = nat_front_addresses();
      if (std::find(fronts.begin(), fronts.end(), p.ip.dst) != fronts.end()) {
        // Unsolicited traffic to the NAT address: nothing to restore, so
        // the outside cannot reach the inside.
        trace.add(drop_event(now_ms, name, p, "no-conntrack-entry"));
        return {};
      }
    }
    if (in_iface) {
      PacketContext ctx{&p, in_iface, std::nullopt};
      const Chain& input = tables.chain(TableId::Filter, ChainId::Input);
      Verdict v = traverse(input, ctx);
      trace.add(verdict_event(now_ms, name, p, TableId::Filter, ChainId::Input, v));
      if (std::holds_alternative<VerdictDrop>(v)) {
        trace.add(drop_event(now_ms, name, p, "rule-drop"));
        return {};
      }
    }
    trace.add(make_event(now_ms, name, TraceKind::Deliver, p));
    return {};
  }

  const RouteEntry* route = lpm_lookup(routes, p.ip.dst);
  if (!route) {
    trace.add(drop_event(now_ms, name, p, "no-route"));
    return {};
  }
  const Interface* out_iface = find_interface(route->iface);

  if (in_iface) {
    auto forwarded = decrement_ttl(p);
    if (!forwarded) {
      trace.add(drop_event(now_ms, name, p, "ttl-expired"));
      return {};
    }
    p = std::move(*forwarded);

    PacketContext ctx{&p, in_iface, out_iface->name};
    const Chain& forward = tables.chain(TableId::Filter, ChainId::Forward);
    Verdict v = traverse(forward, ctx);
    trace.add(verdict_event(now_ms, name, p, TableId::Filter, ChainId::Forward, v));
    if (std::holds_alternative<VerdictDrop>(v)) {
      trace.add(drop_event(now_ms, name, p, "rule-drop"));
      return {};
    }
  }

  if (!flow_restored) {
    PacketContext ctx{&p, in_iface, out_iface->name};
    const Chain& post = tables.chain(TableId::Nat, ChainId::Postrouting);
    Verdict v = traverse(post, ctx);
    trace.add(verdict_event(now_ms, name, p, TableId::Nat, ChainId::Postrouting, v));
    if (std::holds_alternative<VerdictDrop>(v)) {
      trace.add(drop_event(now_ms, name, p, "rule-drop"));
      return {};
    }
    if (const auto* t = std::get_if<VerdictTranslate>(&v);
        t && (t->kind == NatKind::Snat || t->kind == NatKind::Masquerade)) {
      const Ipv4Address nat_addr = t->kind == NatKind::Masquerade ? out_iface->address : *t->to;
      auto applied = conntrack.snat_egress(allocator, p, nat_addr, t->id, t->kind, now_ms);
      if (!applied) {
        trace.add(drop_event(now_ms, name, p, "port-exhausted"));
        return {};
      }
      p = std::move(applied->packet);
      trace.add(make_event(now_ms, name, TraceKind::Xlate, p));
    }
  }

  TraceEvent emit = make_event(now_ms, name, TraceKind::Emit, p);
  emit.iface = out_iface->name;
  trace.add(emit);
  return {Emission{out_iface->name, std::move(p)}};
}

Emission HostNode::send(const Packet& p, std::int64_t now_ms, Trace& trace) const {
  TraceEvent emit = make_event(now_ms, name, TraceKind::Emit, p);
  emit.iface = interface.name;
  trace.add(emit);
  return Emission{interface.name, p};
}

std::vector<Emission> HostNode::receive(const Packet& p, const std::string& in_iface,
                                        std::int64_t now_ms, Trace& trace) const {
  TraceEvent recv = make_event(now_ms, name, TraceKind::Recv, p);
  recv.iface = in_iface;
  trace.add(recv);

  if (p.ip.dst != interface.address) {
    TraceEvent drop = make_event(now_ms, name, TraceKind::Drop, p);
    drop.reason = "not-addressed-to-host";
    trace.add(drop);
    return {};
  }

  trace.add(make_event(now_ms, name, TraceKind::Deliver, p));

  const auto* echo = std::get_if<IcmpEcho>(&p.transport);
  if (echo && echo->kind == IcmpEchoKind::Request) {
    Packet reply = make_icmp_echo(p.ip.dst, p.ip.src, IcmpEchoKind::Reply, echo->identifier,
                                  echo->sequence, 64, p.payload);
    TraceEvent emit = make_event(now_ms, name, TraceKind::Emit, reply);
    emit.iface = interface.name;
    trace.add(emit);
    return {Emission{interface.name, std::move(reply)}};
  }
  return {};
}

}  // namespace nanonat
