#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

#include "nanonat/ip.hpp"
#include "nanonat/packet.hpp"

namespace nanonat {

/// Conjunction of optional matchers; an all-empty spec matches everything.
struct MatchSpec {
  std::optional<Cidr> src;
  std::optional<Cidr> dst;
  std::optional<std::string> in_iface;
  std::optional<std::string> out_iface;
  std::optional<Proto> protocol;
  std::optional<std::uint16_t> sport;  // requires protocol tcp/udp
  std::optional<std::uint16_t> dport;  // requires protocol tcp/udp
  std::optional<std::uint8_t> icmp_type;  // requires protocol icmp

  bool empty() const {
    return !src && !dst && !in_iface && !out_iface && !protocol && !sport && !dport && !icmp_type;
  }

  bool operator==(const MatchSpec&) const = default;
};

struct AcceptTarget {
  bool operator==(const AcceptTarget&) const = default;
};
struct DropTarget {
  bool operator==(const DropTarget&) const = default;
};
struct ReturnTarget {
  bool operator==(const ReturnTarget&) const = default;
};
// Translation address resolved from the egress interface at apply time.
struct MasqueradeTarget {
  bool operator==(const MasqueradeTarget&) const = default;
};
struct SnatTarget {
  Ipv4Address to;
  std::optional<std::uint16_t> port_base;
  bool operator==(const SnatTarget&) const = default;
};
struct DnatTarget {
  Ipv4Address to;
  std::optional<std::uint16_t> port;
  bool operator==(const DnatTarget&) const = default;
};

using Target =
    std::variant<AcceptTarget, DropTarget, ReturnTarget, MasqueradeTarget, SnatTarget, DnatTarget>;

bool is_nat_target(const Target& t);

struct Rule {
  MatchSpec match;
  Target target = AcceptTarget{};

  bool operator==(const Rule&) const = default;
};

enum class TableId { Filter, Nat };
enum class ChainId { Prerouting, Input, Forward, Output, Postrouting };

const char* table_name(TableId t);
const char* chain_name(ChainId c);
bool chain_valid_for_table(TableId t, ChainId c);

struct RuleCommand {
  enum class Action { Append, Insert, Delete };

  TableId table = TableId::Filter;
  Action action = Action::Append;
  int insert_pos = 1;  // meaningful for Insert only; 1-based
  ChainId chain = ChainId::Input;
  Rule rule;

  bool operator==(const RuleCommand&) const = default;
};

struct RuleError : std::runtime_error {
  enum class Kind { UnknownFlag, UnknownTarget, BadChain, BadValue, MissingTarget };

  RuleError(Kind kind, const std::string& message) : std::runtime_error(message), kind(kind) {}

  Kind kind;
};

/// Accepted grammar, tokenized on whitespace:
///   iptables -t <filter|nat> <-A|-I <pos>|-D> <CHAIN>
///     [-s CIDR] [-d CIDR] [-i NAME] [-o NAME] [-p tcp|udp|icmp]
///     [--sport N] [--dport N] [--icmp-type N]
///     -j <ACCEPT|DROP|RETURN|MASQUERADE|SNAT --to-source IP[:PORT]
///         |DNAT --to-destination IP[:PORT]>
/// -t defaults to filter. A bare -s/-d address reads as /32. Unknown flags
/// are hard errors. Interface names: [a-z0-9_-]{1,15}.
RuleCommand parse_rule_command(const std::string& text);

/// Canonical single-line form; parse(render(cmd)) == cmd.
std::string render_rule_command(const RuleCommand& cmd);

struct PacketContext {
  const Packet* packet = nullptr;
  std::optional<std::string> in_iface;   // absent for locally generated
  std::optional<std::string> out_iface;  // absent before the routing decision
};

/// True iff every present matcher is satisfied. Pure; ICMP identifiers are
/// never matched by sport/dport.
bool rule_matches(const Rule& rule, const PacketContext& ctx);

bool valid_iface_name(const std::string& name);

}  // namespace nanonat
