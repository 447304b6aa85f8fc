#include "nanonat/chains.hpp"

#include <algorithm>
#include <sstream>

namespace nanonat {

namespace {

constexpr std::array<ChainId, 3> kFilterChains = {ChainId::Input, ChainId::Forward,
                                                  ChainId::Output};
constexpr std::array<ChainId, 3> kNatChains = {ChainId::Prerouting, ChainId::Output,
                                               ChainId::Postrouting};

std::size_t chain_index(TableId table, ChainId id) {
  const auto& order = table == TableId::Filter ? kFilterChains : kNatChains;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (order[i] == id) return i;
  }
  throw std::logic_error("chain not in table");
}

}  // namespace

const char* nat_kind_name(NatKind k) {
  switch (k) {
    case NatKind::Snat: return "SNAT";
    case NatKind::Dnat: return "DNAT";
    case NatKind::Masquerade: return "MASQ";
  }
  return "?";
}

TableSet::TableSet() {
  for (std::size_t i = 0; i < 3; ++i) {
    filter_[i].id = kFilterChains[i];
    nat_[i].id = kNatChains[i];
  }
}

Chain& TableSet::chain(TableId table, ChainId id) {
  auto& chains = table == TableId::Filter ? filter_ : nat_;
  return chains[chain_index(table, id)];
}

const Chain& TableSet::chain(TableId table, ChainId id) const {
  const auto& chains = table == TableId::Filter ? filter_ : nat_;
  return chains[chain_index(table, id)];
}

void TableSet::set_policy(TableId table, ChainId id, Policy policy) {
  if (table == TableId::Nat && policy != Policy::Accept)
    throw std::invalid_argument("nat chain policy is always ACCEPT");
  chain(table, id).policy = policy;
}

void apply_command(TableSet& tables, const RuleCommand& cmd) {
  using Kind = TableError::Kind;
  if (cmd.table == TableId::Filter && is_nat_target(cmd.rule.target))
    throw TableError(Kind::IllegalTarget, "NAT target in filter table");

  Chain& chain = tables.chain(cmd.table, cmd.chain);
  switch (cmd.action) {
    case RuleCommand::Action::Append:
      chain.rules.push_back(cmd.rule);
      break;
    case RuleCommand::Action::Insert: {
      if (cmd.insert_pos < 1) throw TableError(Kind::BadPosition, "insert position < 1");
      const std::size_t pos =
          std::min<std::size_t>(std::size_t(cmd.insert_pos) - 1, chain.rules.size());
      chain.rules.insert(chain.rules.begin() + std::ptrdiff_t(pos), cmd.rule);
      break;
    }
    case RuleCommand::Action::Delete: {
      auto it = std::find(chain.rules.begin(), chain.rules.end(), cmd.rule);
      if (it == chain.rules.end()) throw TableError(Kind::NotFound, "no matching rule to delete");
      chain.rules.erase(it);
      break;
    }
  }
}

Verdict traverse(const Chain& chain, const PacketContext& ctx) {
  for (std::size_t i = 0; i < chain.rules.size(); ++i) {
    const Rule& rule = chain.rules[i];
    if (!rule_matches(rule, ctx)) continue;
    if (std::holds_alternative<AcceptTarget>(rule.target)) return VerdictAccept{};
    if (std::holds_alternative<DropTarget>(rule.target)) return VerdictDrop{};
    if (std::holds_alternative<ReturnTarget>(rule.target)) break;  // fall to policy
    if (std::holds_alternative<MasqueradeTarget>(rule.target))
      return VerdictTranslate{NatKind::Masquerade, std::nullopt, std::nullopt, i};
    if (const auto* snat = std::get_if<SnatTarget>(&rule.target))
      return VerdictTranslate{NatKind::Snat, snat->to, snat->port_base, i};
    const auto& dnat = std::get<DnatTarget>(rule.target);
    return VerdictTranslate{NatKind::Dnat, dnat.to, dnat.port, i};
  }
  return chain.policy == Policy::Accept ? Verdict(VerdictAccept{}) : Verdict(VerdictDrop{});
}

std::string list_rules(const TableSet& tables, TableId table) {
  std::ostringstream out;
  const auto& order = table == TableId::Filter ? kFilterChains : kNatChains;
  for (ChainId id : order) {
    const Chain& chain = tables.chain(table, id);
    out << "Chain " << chain_name(id) << " (policy "
        << (chain.policy == Policy::Accept ? "ACCEPT" : "DROP") << ")\n";
    for (const Rule& rule : chain.rules) {
      RuleCommand cmd;
      cmd.table = table;
      cmd.action = RuleCommand::Action::Append;
      cmd.chain = id;
      cmd.rule = rule;
      out << "  " << render_rule_command(cmd) << "\n";
    }
  }
  return out.str();
}

}  // namespace nanonat
