#include "nanonat/trace.hpp"

#include <sstream>

namespace nanonat {

const char* trace_kind_name(TraceKind k) {
  switch (k) {
    case TraceKind::Emit: return "EMIT";
    case TraceKind::Recv: return "RECV";
    case TraceKind::Verdict: return "VERDICT";
    case TraceKind::Xlate: return "XLATE";
    case TraceKind::Drop: return "DROP";
    case TraceKind::Deliver: return "DELIVER";
  }
  return "?";
}

std::string TraceEvent::render() const {
  std::ostringstream out;
  out << time_ms << ' ' << node << ' ' << trace_kind_name(kind) << ' ' << proto_name(proto) << ' '
      << src.to_string() << ':' << src_id << " > " << dst.to_string() << ':' << dst_id
      << " ttl=" << int(ttl);
  if (iface) out << " iface=" << *iface;
  if (chain) out << " chain=" << *chain << " verdict=" << verdict.value_or("?");
  if (reason) out << " reason=" << *reason;
  return out.str();
}

TraceEvent make_event(std::int64_t time_ms, std::string node, TraceKind kind, const Packet& p) {
  TraceEvent ev;
  ev.time_ms = time_ms;
  ev.node = std::move(node);
  ev.kind = kind;
  const FiveTuple t = tuple_of(p);
  ev.proto = t.protocol;
  ev.src = t.src;
  ev.src_id = t.src_id;
  ev.dst = t.dst;
  ev.dst_id = t.dst_id;
  ev.ttl = p.ip.ttl;
  return ev;
}

std::vector<std::string> Trace::lines() const {
  std::vector<std::string> out;
  out.reserve(events_.size());
  for (const auto& ev : events_) out.push_back(ev.render());
  return out;
}

std::string Trace::to_text() const {
  std::ostringstream out;
  for (const auto& ev : events_) out << ev.render() << '\n';
  return out.str();
}

}  // namespace nanonat
