#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "nanonat/rule.hpp"

namespace nanonat {

enum class Policy { Accept, Drop };
enum class NatKind { Snat, Dnat, Masquerade };

const char* nat_kind_name(NatKind k);  // "SNAT" / "DNAT" / "MASQ"

struct Chain {
  ChainId id = ChainId::Input;
  std::vector<Rule> rules;
  Policy policy = Policy::Accept;
};

struct VerdictAccept {
  bool operator==(const VerdictAccept&) const = default;
};
struct VerdictDrop {
  bool operator==(const VerdictDrop&) const = default;
};
// `to`/`id` are absent for Masquerade; the caller resolves the egress
// interface address. `id` carries the SNAT port base / DNAT port.
struct VerdictTranslate {
  NatKind kind = NatKind::Snat;
  std::optional<Ipv4Address> to;
  std::optional<std::uint16_t> id;
  std::size_t by_rule = 0;
  bool operator==(const VerdictTranslate&) const = default;
};

using Verdict = std::variant<VerdictAccept, VerdictDrop, VerdictTranslate>;

struct TableError : std::runtime_error {
  enum class Kind { IllegalTarget, NotFound, BadPosition };

  TableError(Kind kind, const std::string& message) : std::runtime_error(message), kind(kind) {}

  Kind kind;
};

/// The filter and nat tables of one node. All six chains exist from
/// construction, empty with policy ACCEPT; nat chains stay ACCEPT.
class TableSet {
 public:
  TableSet();

  Chain& chain(TableId table, ChainId id);
  const Chain& chain(TableId table, ChainId id) const;

  void set_policy(TableId table, ChainId id, Policy policy);

  bool operator==(const TableSet&) const = default;

 private:
  std::array<Chain, 3> filter_;  // INPUT, FORWARD, OUTPUT
  std::array<Chain, 3> nat_;     // PREROUTING, OUTPUT, POSTROUTING
};

/// Applies one parsed command. Append adds at the end; Insert at a 1-based
/// position clamped to the end; Delete removes the first rule equal to the
/// command's rule (equality of canonical rendered form).
void apply_command(TableSet& tables, const RuleCommand& cmd);

/// First matching rule decides; RETURN and no-match fall through to the
/// chain policy.
Verdict traverse(const Chain& chain, const PacketContext& ctx);

/// `Chain <NAME> (policy <ACCEPT|DROP>)` headers with canonical rule lines
/// indented two spaces; byte-stable.
std::string list_rules(const TableSet& tables, TableId table);

}  // namespace nanonat
