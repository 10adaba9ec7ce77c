#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "interpol/field.hpp"
#include "interpol/poly.hpp"
#include "json.hpp"

namespace interpol {

/// Everything the server is given at initialization: the public coefficient
/// matrix (or a row slice of it in the multi-party protocol).
struct ServerSetup {
  Matrix delta;
};

/// Honest server work: w = Delta z, rows*cols multiplications.
inline Vector server_compute(const ServerSetup& setup, std::span<const FieldElement> z) {
  return matvec(setup.delta, z);
}

/// Public record of past queries and, when feedback is enabled, the
/// accept/reject bit of each.
struct QueryHistory {
  std::vector<Vector> queries;
  std::vector<bool> feedback;
};

enum class StrategyKind { honest, random_forgery, fixed_offset, adaptive };

inline std::string_view strategy_name(StrategyKind k) {
  switch (k) {
    case StrategyKind::honest: return "honest";
    case StrategyKind::random_forgery: return "random-forgery";
    case StrategyKind::fixed_offset: return "fixed-offset";
    case StrategyKind::adaptive: return "adaptive";
  }
  return "?";
}

inline std::optional<StrategyKind> parse_strategy_kind(std::string_view s) {
  for (auto k : {StrategyKind::honest, StrategyKind::random_forgery, StrategyKind::fixed_offset,
                 StrategyKind::adaptive})
    if (strategy_name(k) == s) return k;
  return std::nullopt;
}

/// A server. Only public data reaches it: the setup, the query vector, the
/// query history and (optionally) verdict bits. No overload accepts key
/// material, so a strategy cannot depend on the verifier's secret.
class ServerStrategy {
 public:
  virtual ~ServerStrategy() = default;
  virtual StrategyKind kind() const = 0;
  virtual Vector respond(const ServerSetup& setup, std::span<const FieldElement> z, const QueryHistory& history) = 0;
  /// Public verdict of the last response. Ignored by non-adaptive strategies.
  virtual void feedback(bool /*accepted*/) {}
  virtual nlohmann::json state() const = 0;
};

class HonestServer final : public ServerStrategy {
 public:
  StrategyKind kind() const override { return StrategyKind::honest; }
  Vector respond(const ServerSetup& setup, std::span<const FieldElement> z, const QueryHistory&) override {
    return server_compute(setup, z);
  }
  nlohmann::json state() const override { return {{"kind", "honest"}}; }
};

namespace detail {

inline nlohmann::json values_json(std::span<const FieldElement> v) {
  auto arr = nlohmann::json::array();
  for (auto e : v) arr.push_back(e.value());
  return arr;
}

}  // namespace detail

/// Returns a uniformly random vector other than the honest one.
class RandomForgeryServer final : public ServerStrategy {
 public:
  explicit RandomForgeryServer(std::uint64_t seed) : seed_(seed), rng_(seed) {}
  StrategyKind kind() const override { return StrategyKind::random_forgery; }
  Vector respond(const ServerSetup& setup, std::span<const FieldElement> z, const QueryHistory&) override {
    const Vector honest = server_compute(setup, z);
    const FieldContext& field = setup.delta.field();
    for (;;) {
      Vector v = field.sample_vector(rng_, honest.size());
      if (v != honest) return v;
    }
  }
  nlohmann::json state() const override { return {{"kind", "random-forgery"}, {"seed", seed_}}; }

 private:
  std::uint64_t seed_;
  Xoshiro256 rng_;
};

/// Adds one fixed nonzero offset y0, drawn once, to every honest answer.
class FixedOffsetServer final : public ServerStrategy {
 public:
  explicit FixedOffsetServer(std::uint64_t seed) : seed_(seed), rng_(seed) {}
  StrategyKind kind() const override { return StrategyKind::fixed_offset; }
  Vector respond(const ServerSetup& setup, std::span<const FieldElement> z, const QueryHistory&) override {
    Vector w = server_compute(setup, z);
    if (!offset_) {
      const FieldContext& field = setup.delta.field();
      Vector y;
      do {
        y = field.sample_vector(rng_, w.size());
      } while (std::all_of(y.begin(), y.end(), [](FieldElement e) { return e.is_zero(); }));
      offset_ = std::move(y);
    }
    if (offset_->size() != w.size()) throw std::logic_error("fixed-offset server reused across shapes");
    for (std::size_t i = 0; i < w.size(); ++i) w[i] += (*offset_)[i];
    return w;
  }
  const std::optional<Vector>& offset() const { return offset_; }
  nlohmann::json state() const override {
    nlohmann::json j{{"kind", "fixed-offset"}, {"seed", seed_}};
    j["offset"] = offset_ ? detail::values_json(*offset_) : nlohmann::json(nullptr);
    return j;
  }

 private:
  std::uint64_t seed_;
  Xoshiro256 rng_;
  std::optional<Vector> offset_;
};

/// Feedback-driven forger. Answers w + y for a nonzero direction y drawn
/// from a candidate pool of directions (vectors up to scalar multiples,
/// normalized so the first nonzero entry is 1). A rejection of y rules out
/// y and all its multiples; an acceptance locks y in for every later round.
/// Without feedback nothing is pruned and each round draws afresh.
class AdaptiveServer final : public ServerStrategy {
 public:
  /// Pools with at most this many vectors are enumerated up front.
  static constexpr std::uint64_t kEnumerationLimit = 1ULL << 16;

  explicit AdaptiveServer(std::uint64_t seed) : seed_(seed), rng_(seed) {}
  StrategyKind kind() const override { return StrategyKind::adaptive; }

  Vector respond(const ServerSetup& setup, std::span<const FieldElement> z, const QueryHistory&) override {
    Vector w = server_compute(setup, z);
    if (!dimension_) start(setup.delta.field(), w.size());
    if (*dimension_ != w.size()) throw std::logic_error("adaptive server reused across shapes");
    pending_ = locked_ ? *locked_ : propose();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] += (*pending_)[i];
    return w;
  }

  void feedback(bool accepted) override {
    if (!pending_) return;
    if (accepted) {
      locked_ = pending_;
    } else if (!locked_) {
      rejected_.push_back(*pending_);
      if (enumerated_) std::erase(pool_, *pending_);
    }
    pending_.reset();
  }

  const std::vector<Vector>& rejected() const { return rejected_; }
  const std::optional<Vector>& locked() const { return locked_; }
  std::size_t pool_size() const { return pool_.size(); }

  nlohmann::json state() const override {
    nlohmann::json j{{"kind", "adaptive"}, {"seed", seed_}, {"enumerated", enumerated_}, {"pool_size", pool_.size()}};
    auto rej = nlohmann::json::array();
    for (const auto& y : rejected_) rej.push_back(detail::values_json(y));
    j["rejected"] = rej;
    j["locked"] = locked_ ? detail::values_json(*locked_) : nlohmann::json(nullptr);
    return j;
  }

 private:
  void start(const FieldContext& field, std::size_t dim) {
    field_ = field;
    dimension_ = dim;
    if (dim == 0) throw std::invalid_argument("adaptive server needs a nonempty response");
    const std::uint64_t q = field.modulus();
    std::uint64_t total = 1;
    bool small = true;
    for (std::size_t i = 0; i < dim && small; ++i) {
      if (total > kEnumerationLimit / q) small = false;
      total *= q;
    }
    enumerated_ = small && total <= kEnumerationLimit;
    if (!enumerated_) return;
    // Every nonzero vector whose leading nonzero entry is 1.
    std::vector<std::uint64_t> digits(dim, 0);
    for (std::uint64_t code = 1; code < total; ++code) {
      std::uint64_t c = code;
      for (std::size_t i = dim; i-- > 0;) {
        digits[i] = c % q;
        c /= q;
      }
      auto lead = std::find_if(digits.begin(), digits.end(), [](std::uint64_t d) { return d != 0; });
      if (*lead != 1) continue;
      pool_.push_back(field.elements(std::span<const std::uint64_t>(digits)));
    }
  }

  Vector normalize(Vector y) const {
    auto lead = std::find_if(y.begin(), y.end(), [](FieldElement e) { return !e.is_zero(); });
    const FieldElement scale = inv(*lead);
    for (auto& e : y) e *= scale;
    return y;
  }

  Vector propose() {
    if (enumerated_) {
      if (pool_.empty()) throw std::logic_error("adaptive server exhausted every direction");
      return pool_[rng_.uniform_below(pool_.size())];
    }
    for (;;) {
      Vector y = field_->sample_vector(rng_, *dimension_);
      if (std::all_of(y.begin(), y.end(), [](FieldElement e) { return e.is_zero(); })) continue;
      y = normalize(std::move(y));
      if (std::find(rejected_.begin(), rejected_.end(), y) == rejected_.end()) return y;
    }
  }

  std::uint64_t seed_;
  Xoshiro256 rng_;
  std::optional<FieldContext> field_;
  std::optional<std::size_t> dimension_;
  bool enumerated_ = false;
  std::vector<Vector> pool_;
  std::vector<Vector> rejected_;
  std::optional<Vector> pending_;
  std::optional<Vector> locked_;
};

inline std::unique_ptr<ServerStrategy> make_strategy(StrategyKind kind, std::uint64_t seed) {
  switch (kind) {
    case StrategyKind::honest: return std::make_unique<HonestServer>();
    case StrategyKind::random_forgery: return std::make_unique<RandomForgeryServer>(seed);
    case StrategyKind::fixed_offset: return std::make_unique<FixedOffsetServer>(seed);
    case StrategyKind::adaptive: return std::make_unique<AdaptiveServer>(seed);
  }
  throw std::invalid_argument("unknown strategy kind");
}

}  // namespace interpol
