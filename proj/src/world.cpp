#include "nanonat/world.hpp"

#include <stdexcept>

namespace nanonat {

void World::add_host(HostNode host) {
  node_order_.push_back(host.name);
  hosts_.emplace(host.name, std::move(host));
}

void World::add_router(RouterNode router) {
  node_order_.push_back(router.name);
  routers_.emplace(router.name, std::move(router));
}

void World::add_link(Link link) { links_.push_back(std::move(link)); }

HostNode* World::find_host(const std::string& name) {
  auto it = hosts_.find(name);
  return it == hosts_.end() ? nullptr : &it->second;
}

RouterNode* World::find_router(const std::string& name) {
  auto it = routers_.find(name);
  return it == routers_.end() ? nullptr : &it->second;
}

bool World::has_node(const std::string& name) const {
  return hosts_.count(name) > 0 || routers_.count(name) > 0;
}

void World::inject(Injection injection) {
  QueuedPacket ev;
  ev.time_ms = injection.time_ms;
  ev.seq = next_seq_++;
  ev.what = QueuedPacket::What::HostSend;
  ev.node = injection.host;
  ev.packet = std::move(injection.packet);
  queue_.push(std::move(ev));
}

void World::schedule(QueuedPacket event) {
  event.seq = next_seq_++;
  queue_.push(std::move(event));
}

const Link* World::link_at(const std::string& node, const std::string& iface,
                           const LinkPeer** far_end) const {
  for (const Link& link : links_) {
    if (link.a.node == node && link.a.iface == iface) {
      *far_end = &link.b;
      return &link;
    }
    if (link.b.node == node && link.b.iface == iface) {
      *far_end = &link.a;
      return &link;
    }
  }
  return nullptr;
}

void World::emit_onto_link(const std::string& node, const Emission& emission,
                           std::int64_t now_ms) {
  const LinkPeer* far = nullptr;
  const Link* link = link_at(node, emission.iface, &far);
  if (!link) return;  // unlinked interface: the packet goes nowhere

  QueuedPacket ev;
  ev.time_ms = now_ms + 1;
  ev.packet = emission.packet;
  ev.iface = far->iface;
  if (link->name) {
    ev.what = QueuedPacket::What::LinkRelay;
    ev.node = *link->name;
    ev.relay_node = far->node;
  } else {
    ev.what = QueuedPacket::What::Arrive;
    ev.node = far->node;
  }
  schedule(std::move(ev));
}

void World::run_expiry_up_to(std::int64_t time_ms) {
  while (next_sweep_ms_ <= time_ms) {
    for (const std::string& name : node_order_) {
      if (auto it = routers_.find(name); it != routers_.end()) {
        it->second.conntrack.expire(it->second.allocator, next_sweep_ms_);
      }
    }
    next_sweep_ms_ += 1000;
  }
}

Trace World::run(std::int64_t until_ms) {
  while (!queue_.empty() && queue_.top().time_ms <= until_ms) {
    QueuedPacket ev = queue_.top();
    queue_.pop();
    run_expiry_up_to(ev.time_ms);

    switch (ev.what) {
      case QueuedPacket::What::HostSend: {
        HostNode* host = find_host(ev.node);
        if (!host) break;
        Emission emission = host->send(ev.packet, ev.time_ms, trace_);
        emit_onto_link(host->name, emission, ev.time_ms);
        break;
      }
      case QueuedPacket::What::Arrive: {
        if (RouterNode* router = find_router(ev.node)) {
          auto emissions = router->process_packet(ev.packet, ev.iface, ev.time_ms, trace_);
          for (const Emission& emission : emissions)
            emit_onto_link(router->name, emission, ev.time_ms);
        } else if (HostNode* host = find_host(ev.node)) {
          auto emissions = host->receive(ev.packet, ev.iface, ev.time_ms, trace_);
          for (const Emission& emission : emissions)
            emit_onto_link(host->name, emission, ev.time_ms);
        }
        break;
      }
      case QueuedPacket::What::LinkRelay: {
        trace_.add(make_event(ev.time_ms, ev.node, TraceKind::Emit, ev.packet));
        QueuedPacket next;
        next.time_ms = ev.time_ms + 1;
        next.what = QueuedPacket::What::Arrive;
        next.node = ev.relay_node;
        next.iface = ev.iface;
        next.packet = std::move(ev.packet);
        schedule(std::move(next));
        break;
      }
    }
  }
  run_expiry_up_to(until_ms);
  return trace_;
}

std::string World::dump_conntrack(std::int64_t now_ms) const {
  std::string out;
  for (const std::string& name : node_order_) {
    auto it = routers_.find(name);
    if (it == routers_.end()) continue;
    out += "# conntrack " + name + "\n";
    out += it->second.conntrack.dump(now_ms);
  }
  return out;
}

}  // namespace nanonat
