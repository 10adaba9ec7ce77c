#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>

namespace interpol {

/// Phase a field operation is charged to. `init` is the one-time setup and
/// is kept apart from the per-round phases.
enum class Phase : std::uint8_t { init, encode, serve, verify, decode };

inline constexpr std::size_t kPhaseCount = 5;
inline constexpr std::array<Phase, kPhaseCount> kAllPhases = {
    Phase::init, Phase::encode, Phase::serve, Phase::verify, Phase::decode};

constexpr std::string_view phase_name(Phase p) {
  switch (p) {
    case Phase::init: return "init";
    case Phase::encode: return "encode";
    case Phase::serve: return "serve";
    case Phase::verify: return "verify";
    case Phase::decode: return "decode";
  }
  return "?";
}

struct OpTally {
  std::uint64_t muls = 0;
  std::uint64_t adds = 0;
  std::uint64_t invs = 0;

  std::uint64_t total() const { return muls + adds + invs; }

  OpTally& operator+=(const OpTally& o) {
    muls += o.muls;
    adds += o.adds;
    invs += o.invs;
    return *this;
  }
  friend OpTally operator+(OpTally a, const OpTally& b) { return a += b; }
  friend OpTally operator-(OpTally a, const OpTally& b) {
    a.muls -= b.muls;
    a.adds -= b.adds;
    a.invs -= b.invs;
    return a;
  }
  friend bool operator==(const OpTally&, const OpTally&) = default;
};

/// Per-phase tallies of field operations. Filled by the field layer while a
/// CountingScope is attached on the current thread.
class OpCounter {
 public:
  OpTally& at(Phase p) { return by_phase_[static_cast<std::size_t>(p)]; }
  const OpTally& at(Phase p) const { return by_phase_[static_cast<std::size_t>(p)]; }

  /// Sum over the per-round phases (everything except init).
  OpTally per_round() const {
    OpTally t;
    for (Phase p : kAllPhases)
      if (p != Phase::init) t += at(p);
    return t;
  }

  /// Ops charged to the querying side of a round: encode + verify + decode.
  OpTally user() const { return at(Phase::encode) + at(Phase::verify) + at(Phase::decode); }

  OpTally total() const { return at(Phase::init) + per_round(); }

  OpCounter& operator+=(const OpCounter& o) {
    for (std::size_t i = 0; i < kPhaseCount; ++i) by_phase_[i] += o.by_phase_[i];
    return *this;
  }

 private:
  std::array<OpTally, kPhaseCount> by_phase_{};
};

namespace detail {

struct CountingState {
  OpCounter* sink = nullptr;
  Phase phase = Phase::serve;
  OpTally raw;  // every op on this thread, attached or not
};

inline thread_local CountingState counting_state;

inline void note_mul() {
  auto& st = counting_state;
  ++st.raw.muls;
  if (st.sink) ++st.sink->at(st.phase).muls;
}
inline void note_add() {
  auto& st = counting_state;
  ++st.raw.adds;
  if (st.sink) ++st.sink->at(st.phase).adds;
}
inline void note_inv() {
  auto& st = counting_state;
  ++st.raw.invs;
  if (st.sink) ++st.sink->at(st.phase).invs;
}

}  // namespace detail

/// Running tally of every field op performed on this thread since start.
inline OpTally field_layer_tally() { return detail::counting_state.raw; }

/// Attaches `counter` to the current thread for the scope's lifetime.
class CountingScope {
 public:
  CountingScope(OpCounter& counter, Phase phase) : saved_(detail::counting_state) {
    detail::counting_state.sink = &counter;
    detail::counting_state.phase = phase;
  }
  ~CountingScope() {
    detail::counting_state.sink = saved_.sink;
    detail::counting_state.phase = saved_.phase;
  }
  CountingScope(const CountingScope&) = delete;
  CountingScope& operator=(const CountingScope&) = delete;

 private:
  detail::CountingState saved_;
};

/// Switches the charged phase of the currently attached counter.
class PhaseScope {
 public:
  explicit PhaseScope(Phase phase) : saved_(detail::counting_state.phase) {
    detail::counting_state.phase = phase;
  }
  ~PhaseScope() { detail::counting_state.phase = saved_; }
  PhaseScope(const PhaseScope&) = delete;
  PhaseScope& operator=(const PhaseScope&) = delete;

 private:
  Phase saved_;
};

/// Detaches any counter; used for oracle work that is not part of the protocol.
class CountingPause {
 public:
  CountingPause() : saved_(detail::counting_state.sink) { detail::counting_state.sink = nullptr; }
  ~CountingPause() { detail::counting_state.sink = saved_; }
  CountingPause(const CountingPause&) = delete;
  CountingPause& operator=(const CountingPause&) = delete;

 private:
  OpCounter* saved_;
};

}  // namespace interpol
