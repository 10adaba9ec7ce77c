#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "interpol/adversary.hpp"
#include "interpol/field.hpp"
#include "interpol/poly.hpp"
#include "interpol/protocol.hpp"
#include "interpol/random.hpp"
#include "interpol/reed_solomon.hpp"

namespace interpol {

enum class RoundPolicy { recompute, rs_decode };

inline std::string_view policy_name(RoundPolicy p) { return p == RoundPolicy::recompute ? "recompute" : "rs-decode"; }

inline std::optional<RoundPolicy> parse_policy(std::string_view s) {
  if (s == "recompute") return RoundPolicy::recompute;
  if (s == "rs-decode") return RoundPolicy::rs_decode;
  return std::nullopt;
}

/// One participant. As a server it owns `slice` (its rows of Delta, or its
/// coded slice); as a user it holds one key per peer, checking that peer's
/// slice: Gamma_{l,j} = Lambda_{l,j} Delta_j.
struct NodeState {
  std::size_t id = 0;
  ServerSetup slice;
  std::vector<std::optional<VerificationKey>> peer_keys;
  std::unique_ptr<ServerStrategy> adversary;  // null for honest nodes
  OpCounter init_ops;

  bool honest() const { return adversary == nullptr; }
};

/// Round-synchronous broadcast: every send of a round lands before any
/// receive, and each node gets exactly one broadcast per round.
class BroadcastBus {
 public:
  explicit BroadcastBus(std::size_t nodes) : mailbox_(nodes) {}

  void begin_round() {
    for (auto& m : mailbox_) m.reset();
    sealed_ = false;
    ++round_;
  }

  void broadcast(std::size_t sender, Vector shard) {
    if (sealed_) throw std::logic_error("broadcast after the round was sealed");
    if (sender >= mailbox_.size()) throw std::out_of_range("unknown sender");
    if (mailbox_[sender]) throw std::logic_error("node " + std::to_string(sender) + " broadcast twice in one round");
    mailbox_[sender] = std::move(shard);
  }

  /// Barrier between the send and receive halves of the round.
  void seal() { sealed_ = true; }

  const std::vector<std::optional<Vector>>& receive() const {
    if (!sealed_) throw std::logic_error("receive before the round was sealed");
    return mailbox_;
  }

  std::size_t round() const { return round_; }
  std::size_t nodes() const { return mailbox_.size(); }

 private:
  std::vector<std::optional<Vector>> mailbox_;
  bool sealed_ = false;
  std::size_t round_ = 0;
};

struct Network {
  CoeffMatrix coeffs;  // public, padded so the slices have equal height
  std::optional<RSConfig> rs;
  std::vector<NodeState> nodes;
  QueryHistory history;

  std::size_t size() const { return nodes.size(); }
  const FieldContext& field() const { return coeffs.delta.field(); }
  std::size_t s() const { return coeffs.s; }
};

/// Builds n nodes. Without `data_shards`, node j serves rows
/// [j*s/n, (j+1)*s/n) of Delta; with it, the n slices are Reed-Solomon
/// coded from t = data_shards data slices. s is padded up to the least
/// multiple of n (resp. t) with zero coefficients. Node keys come from
/// independent streams derived from `seed`.
inline Network network_init(const Polynomial& f, std::size_t n, std::size_t c, std::uint64_t seed,
                            std::optional<std::size_t> data_shards = std::nullopt) {
  if (n < 2) throw std::invalid_argument("a network needs at least 2 nodes");
  if (c == 0) throw std::invalid_argument("security parameter c must be >= 1");
  std::optional<RSConfig> rs;
  if (data_shards) rs = make_rs_config(f.field(), n, *data_shards);
  const std::size_t parts = rs ? rs->t : n;
  std::size_t s = ceil_sqrt(f.degree_bound());
  s = (s + parts - 1) / parts * parts;

  Network net{decompose(f, s), rs, {}, {}};
  std::vector<Matrix> slices;
  if (rs) {
    slices = rs_encode(net.coeffs.delta, *rs);
  } else {
    const std::size_t h = s / n;
    for (std::size_t j = 0; j < n; ++j) slices.push_back(net.coeffs.delta.row_block(j * h, h));
  }
  net.nodes.reserve(n);
  for (std::size_t l = 0; l < n; ++l) net.nodes.push_back(NodeState{l, ServerSetup{slices[l]}, {}, nullptr, {}});
  for (std::size_t l = 0; l < n; ++l) {
    auto& node = net.nodes[l];
    Xoshiro256 rng(derive_seed(seed, l));
    CountingScope scope(node.init_ops, Phase::init);
    node.peer_keys.resize(n);
    for (std::size_t j = 0; j < n; ++j)
      if (j != l) node.peer_keys[j] = make_key(slices[j], c, rng);
  }
  return net;
}

/// Node l's broadcast for query z: its honest slice product, or whatever
/// its attached strategy answers.
inline Vector node_serve(Network& net, std::size_t l, std::span<const FieldElement> z) {
  auto& node = net.nodes.at(l);
  if (node.adversary) return node.adversary->respond(node.slice, z, net.history);
  return server_compute(node.slice, z);
}

/// Node l's verdict on every peer's shard (its own entry is `accepted`).
inline std::vector<Verdict> node_verify_all(const Network& net, std::size_t l, std::span<const FieldElement> z,
                                            std::span<const std::optional<Vector>> shards) {
  const auto& node = net.nodes.at(l);
  if (shards.size() != net.size()) throw std::invalid_argument("need one shard slot per node");
  std::vector<Verdict> out(net.size(), Verdict::accepted);
  for (std::size_t j = 0; j < net.size(); ++j) {
    if (j == l) continue;
    out[j] = shards[j] ? verify(*node.peer_keys[j], z, *shards[j]) : Verdict::missing;
  }
  return out;
}

struct NodeDecode {
  std::optional<FieldElement> value;
  std::vector<std::size_t> offenders;
};

namespace detail {

/// Delta z assembled from shard results that are all trusted.
inline Vector assemble(const Network& net, std::span<const std::optional<Vector>> shards) {
  if (net.rs) return rs_recover(shards, *net.rs);
  Vector w;
  for (const auto& s : shards) w.insert(w.end(), s->begin(), s->end());
  return w;
}

}  // namespace detail

/// f(x) from the stacked shards, provided every foreign verdict is an
/// acceptance; otherwise refuses and names the offending nodes.
inline NodeDecode node_decode(const Network& net, std::span<const FieldElement> p,
                              std::span<const std::optional<Vector>> shards, std::span<const Verdict> verdicts) {
  NodeDecode out;
  for (std::size_t j = 0; j < verdicts.size(); ++j)
    if (verdicts[j] != Verdict::accepted) out.offenders.push_back(j);
  if (!out.offenders.empty()) return out;
  out.value = dot(p, detail::assemble(net, shards));
  return out;
}

struct NodeRoundResult {
  std::size_t id = 0;
  bool honest = true;
  std::vector<Verdict> verdicts;
  std::vector<std::size_t> offenders;
  std::optional<FieldElement> value;
  /// Shards this node recomputed itself.
  std::vector<std::size_t> recomputed;
  /// Offending shards filled in by erasure decoding.
  std::vector<std::size_t> erased;
  OpCounter ops;
};

struct NetworkRound {
  std::size_t round = 0;
  FieldElement x;
  std::vector<Vector> broadcasts;
  std::vector<NodeRoundResult> nodes;
};

/// One synchronous round at input x. Offending shards are either redone
/// locally (`recompute`) or erased and rebuilt from the code (`rs_decode`,
/// falling back to recompute when too many shards are lost).
inline NetworkRound run_network_round(Network& net, BroadcastBus& bus, FieldElement x, RoundPolicy policy) {
  if (policy == RoundPolicy::rs_decode && !net.rs)
    throw std::invalid_argument("rs-decode policy needs a Reed-Solomon coded network");
  if (bus.nodes() != net.size()) throw std::invalid_argument("bus size does not match the network");
  const std::size_t n = net.size();
  std::vector<OpCounter> ops(n);
  std::vector<PowerVectors> pv(n);

  for (std::size_t l = 0; l < n; ++l) {
    CountingScope scope(ops[l], Phase::encode);
    pv[l] = power_vectors(x, net.s());
  }

  bus.begin_round();
  for (std::size_t l = 0; l < n; ++l) {
    CountingScope scope(ops[l], Phase::serve);
    bus.broadcast(l, node_serve(net, l, pv[l].z));
  }
  bus.seal();
  const auto& shards = bus.receive();

  NetworkRound out{bus.round(), x, {}, {}};
  for (const auto& s : shards) out.broadcasts.push_back(*s);

  for (std::size_t l = 0; l < n; ++l) {
    NodeRoundResult r;
    r.id = l;
    r.honest = net.nodes[l].honest();
    CountingScope scope(ops[l], Phase::verify);
    const auto& z = pv[l].z;
    r.verdicts = node_verify_all(net, l, z, shards);
    {
      PhaseScope phase(Phase::decode);
      auto d = node_decode(net, pv[l].p, shards, r.verdicts);
      r.offenders = d.offenders;
      r.value = d.value;
    }
    if (!r.value) {
      std::vector<std::optional<Vector>> fixed(shards.begin(), shards.end());
      bool rebuilt = false;
      if (policy == RoundPolicy::rs_decode && r.offenders.size() <= n - net.rs->t) {
        for (auto j : r.offenders) fixed[j].reset();
        PhaseScope phase(Phase::decode);
        r.value = dot(pv[l].p, rs_recover(fixed, *net.rs));
        r.erased = r.offenders;
        rebuilt = true;
      }
      if (!rebuilt) {
        {
          PhaseScope phase(Phase::serve);
          for (auto j : r.offenders) fixed[j] = server_compute(net.nodes[j].slice, z);
        }
        r.recomputed = r.offenders;
        PhaseScope phase(Phase::decode);
        r.value = dot(pv[l].p, detail::assemble(net, fixed));
      }
    }
    out.nodes.push_back(std::move(r));
  }
  for (std::size_t l = 0; l < n; ++l) out.nodes[l].ops = ops[l];
  net.history.queries.push_back(pv.front().z);
  return out;
}

}  // namespace interpol
