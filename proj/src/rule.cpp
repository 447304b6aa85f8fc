#include "nanonat/rule.hpp"

#include <sstream>
#include <vector>

namespace nanonat {

namespace {

using Kind = RuleError::Kind;

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

std::optional<ChainId> chain_from_name(const std::string& name) {
  if (name == "PREROUTING") return ChainId::Prerouting;
  if (name == "INPUT") return ChainId::Input;
  if (name == "FORWARD") return ChainId::Forward;
  if (name == "OUTPUT") return ChainId::Output;
  if (name == "POSTROUTING") return ChainId::Postrouting;
  return std::nullopt;
}

std::optional<int> parse_int(const std::string& text) {
  if (text.empty() || text.size() > 9) return std::nullopt;
  std::size_t start = text[0] == '-' ? 1 : 0;
  if (start == text.size()) return std::nullopt;
  long value = 0;
  for (std::size_t i = start; i < text.size(); ++i) {
    if (text[i] < '0' || text[i] > '9') return std::nullopt;
    value = value * 10 + (text[i] - '0');
  }
  return int(start ? -value : value);
}

std::uint16_t parse_port(const std::string& text, const char* what) {
  auto v = parse_int(text);
  if (!v || *v < 0 || *v > 65535) throw RuleError(Kind::BadValue, std::string(what) + ": '" + text + "'");
  return std::uint16_t(*v);
}

// IP[:PORT] for SNAT/DNAT target arguments.
std::pair<Ipv4Address, std::optional<std::uint16_t>> parse_addr_port(const std::string& text,
                                                                     const char* what) {
  std::string addr_text = text;
  std::optional<std::uint16_t> port;
  if (auto colon = text.find(':'); colon != std::string::npos) {
    addr_text = text.substr(0, colon);
    port = parse_port(text.substr(colon + 1), what);
  }
  auto addr = Ipv4Address::parse(addr_text);
  if (!addr) throw RuleError(Kind::BadValue, std::string(what) + ": '" + text + "'");
  return {*addr, port};
}

class TokenCursor {
 public:
  explicit TokenCursor(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {}

  bool done() const { return pos_ >= tokens_.size(); }
  const std::string& peek() const { return tokens_[pos_]; }
  std::string next() { return tokens_[pos_++]; }

  std::string value_for(const std::string& flag) {
    if (done()) throw RuleError(Kind::BadValue, "missing value for " + flag);
    return next();
  }

 private:
  std::vector<std::string> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace

bool is_nat_target(const Target& t) {
  return std::holds_alternative<MasqueradeTarget>(t) || std::holds_alternative<SnatTarget>(t) ||
         std::holds_alternative<DnatTarget>(t);
}

const char* table_name(TableId t) { return t == TableId::Filter ? "filter" : "nat"; }

const char* chain_name(ChainId c) {
  switch (c) {
    case ChainId::Prerouting: return "PREROUTING";
    case ChainId::Input: return "INPUT";
    case ChainId::Forward: return "FORWARD";
    case ChainId::Output: return "OUTPUT";
    case ChainId::Postrouting: return "POSTROUTING";
  }
  return "?";
}

bool chain_valid_for_table(TableId t, ChainId c) {
  if (t == TableId::Filter)
    return c == ChainId::Input || c == ChainId::Forward || c == ChainId::Output;
  return c == ChainId::Prerouting || c == ChainId::Output || c == ChainId::Postrouting;
}

bool valid_iface_name(const std::string& name) {
  if (name.empty() || name.size() > 15) return false;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

RuleCommand parse_rule_command(const std::string& text) {
  TokenCursor cur(tokenize(text));
  if (cur.done() || cur.next() != "iptables")
    throw RuleError(Kind::BadValue, "command must start with 'iptables'");

  RuleCommand cmd;
  bool have_table = false, have_action = false, have_target = false;

  while (!cur.done()) {
    const std::string flag = cur.next();
    if (flag == "-t") {
      const std::string v = cur.value_for(flag);
      if (v == "filter") cmd.table = TableId::Filter;
      else if (v == "nat") cmd.table = TableId::Nat;
      else throw RuleError(Kind::BadValue, "unknown table '" + v + "'");
      have_table = true;
    } else if (flag == "-A" || flag == "-I" || flag == "-D") {
      if (have_action) throw RuleError(Kind::BadValue, "duplicate action flag");
      have_action = true;
      if (flag == "-A") cmd.action = RuleCommand::Action::Append;
      if (flag == "-D") cmd.action = RuleCommand::Action::Delete;
      if (flag == "-I") {
        cmd.action = RuleCommand::Action::Insert;
        auto pos = parse_int(cur.value_for(flag));
        if (!pos) throw RuleError(Kind::BadValue, "-I position must be an integer");
        cmd.insert_pos = *pos;
      }
      const std::string name = cur.value_for(flag);
      auto chain = chain_from_name(name);
      if (!chain) throw RuleError(Kind::BadChain, "unknown chain '" + name + "'");
      cmd.chain = *chain;
    } else if (flag == "-s" || flag == "-d") {
      auto cidr = Cidr::parse(cur.value_for(flag));
      if (!cidr) throw RuleError(Kind::BadValue, "bad address for " + flag);
      (flag == "-s" ? cmd.rule.match.src : cmd.rule.match.dst) = *cidr;
    } else if (flag == "-i" || flag == "-o") {
      const std::string name = cur.value_for(flag);
      if (!valid_iface_name(name)) throw RuleError(Kind::BadValue, "bad interface name '" + name + "'");
      (flag == "-i" ? cmd.rule.match.in_iface : cmd.rule.match.out_iface) = name;
    } else if (flag == "-p") {
      auto proto = proto_from_name(cur.value_for(flag));
      if (!proto) throw RuleError(Kind::BadValue, "unknown protocol for -p");
      cmd.rule.match.protocol = *proto;
    } else if (flag == "--sport") {
      cmd.rule.match.sport = parse_port(cur.value_for(flag), "--sport");
    } else if (flag == "--dport") {
      cmd.rule.match.dport = parse_port(cur.value_for(flag), "--dport");
    } else if (flag == "--icmp-type") {
      auto v = parse_int(cur.value_for(flag));
      if (!v || *v < 0 || *v > 255) throw RuleError(Kind::BadValue, "--icmp-type out of range");
      cmd.rule.match.icmp_type = std::uint8_t(*v);
    } else if (flag == "-j") {
      if (have_target) throw RuleError(Kind::BadValue, "duplicate -j");
      have_target = true;
      const std::string name = cur.value_for(flag);
      if (name == "ACCEPT") {
        cmd.rule.target = AcceptTarget{};
      } else if (name == "DROP") {
        cmd.rule.target = DropTarget{};
      } else if (name == "RETURN") {
        cmd.rule.target = ReturnTarget{};
      } else if (name == "MASQUERADE") {
        cmd.rule.target = MasqueradeTarget{};
      } else if (name == "SNAT") {
        if (cur.done() || cur.next() != "--to-source")
          throw RuleError(Kind::BadValue, "SNAT requires --to-source");
        auto [addr, port] = parse_addr_port(cur.value_for("--to-source"), "--to-source");
        cmd.rule.target = SnatTarget{addr, port};
      } else if (name == "DNAT") {
        if (cur.done() || cur.next() != "--to-destination")
          throw RuleError(Kind::BadValue, "DNAT requires --to-destination");
        auto [addr, port] = parse_addr_port(cur.value_for("--to-destination"), "--to-destination");
        cmd.rule.target = DnatTarget{addr, port};
      } else {
        throw RuleError(Kind::UnknownTarget, "unknown target '" + name + "'");
      }
    } else {
      throw RuleError(Kind::UnknownFlag, "unknown flag '" + flag + "'");
    }
  }

  (void)have_table;
  if (!have_action) throw RuleError(Kind::BadValue, "missing -A/-I/-D");
  if (!have_target) throw RuleError(Kind::MissingTarget, "missing -j target");
  if (!chain_valid_for_table(cmd.table, cmd.chain))
    throw RuleError(Kind::BadChain, std::string(chain_name(cmd.chain)) + " not in table " +
                                        table_name(cmd.table));

  const MatchSpec& m = cmd.rule.match;
  const bool ports_ok = m.protocol == Proto::Tcp || m.protocol == Proto::Udp;
  if ((m.sport || m.dport) && !ports_ok)
    throw RuleError(Kind::BadValue, "--sport/--dport require -p tcp or -p udp");
  if (m.icmp_type && m.protocol != Proto::Icmp)
    throw RuleError(Kind::BadValue, "--icmp-type requires -p icmp");

  return cmd;
}

std::string render_rule_command(const RuleCommand& cmd) {
  std::ostringstream out;
  out << "iptables -t " << table_name(cmd.table);
  switch (cmd.action) {
    case RuleCommand::Action::Append: out << " -A"; break;
    case RuleCommand::Action::Insert: out << " -I " << cmd.insert_pos; break;
    case RuleCommand::Action::Delete: out << " -D"; break;
  }
  out << ' ' << chain_name(cmd.chain);

  const MatchSpec& m = cmd.rule.match;
  if (m.src) out << " -s " << m.src->to_string();
  if (m.dst) out << " -d " << m.dst->to_string();
  if (m.in_iface) out << " -i " << *m.in_iface;
  if (m.out_iface) out << " -o " << *m.out_iface;
  if (m.protocol) out << " -p " << proto_name(*m.protocol);
  if (m.sport) out << " --sport " << *m.sport;
  if (m.dport) out << " --dport " << *m.dport;
  if (m.icmp_type) out << " --icmp-type " << int(*m.icmp_type);

  out << " -j ";
  std::visit(
      [&](const auto& target) {
        using T = std::decay_t<decltype(target)>;
        if constexpr (std::is_same_v<T, AcceptTarget>) {
          out << "ACCEPT";
        } else if constexpr (std::is_same_v<T, DropTarget>) {
          out << "DROP";
        } else if constexpr (std::is_same_v<T, ReturnTarget>) {
          out << "RETURN";
        } else if constexpr (std::is_same_v<T, MasqueradeTarget>) {
          out << "MASQUERADE";
        } else if constexpr (std::is_same_v<T, SnatTarget>) {
          out << "SNAT --to-source " << target.to.to_string();
          if (target.port_base) out << ':' << *target.port_base;
        } else {
          out << "DNAT --to-destination " << target.to.to_string();
          if (target.port) out << ':' << *target.port;
        }
      },
      cmd.rule.target);
  return out.str();
}

bool rule_matches(const Rule& rule, const PacketContext& ctx) {
  const MatchSpec& m = rule.match;
  const Packet& p = *ctx.packet;

  if (m.src && !m.src->contains(p.ip.src)) return false;
  if (m.dst && !m.dst->contains(p.ip.dst)) return false;
  if (m.in_iface && ctx.in_iface != *m.in_iface) return false;
  if (m.out_iface && ctx.out_iface != *m.out_iface) return false;
  if (m.protocol && p.ip.protocol != *m.protocol) return false;

  if (m.sport || m.dport) {
    const std::uint16_t* sport = nullptr;
    const std::uint16_t* dport = nullptr;
    if (const auto* tcp = std::get_if<TcpSegment>(&p.transport)) {
      sport = &tcp->src_port;
      dport = &tcp->dst_port;
    } else if (const auto* udp = std::get_if<UdpDatagram>(&p.transport)) {
      sport = &udp->src_port;
      dport = &udp->dst_port;
    } else {
      return false;  // ICMP identifiers are not ports
    }
    if (m.sport && *sport != *m.sport) return false;
    if (m.dport && *dport != *m.dport) return false;
  }

  if (m.icmp_type) {
    const auto* echo = std::get_if<IcmpEcho>(&p.transport);
    if (!echo || std::uint8_t(echo->kind) != *m.icmp_type) return false;
  }
  return true;
}

}  // namespace nanonat
