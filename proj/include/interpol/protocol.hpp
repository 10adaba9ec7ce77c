#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "interpol/adversary.hpp"
#include "interpol/field.hpp"
#include "interpol/op_counter.hpp"
#include "interpol/poly.hpp"
#include "json.hpp"

namespace interpol {

/// The verifier's secret: Lambda (c x h, uniform) and Gamma = Lambda Delta
/// (c x s). There is deliberately no serializer for this type.
struct VerificationKey {
  Matrix lambda;
  Matrix gamma;

  std::size_t c() const { return lambda.rows(); }
  /// Length of the response vector being checked.
  std::size_t response_size() const { return lambda.cols(); }
  /// Length of the query vector.
  std::size_t query_size() const { return gamma.cols(); }
  const FieldContext& field() const { return lambda.field(); }
};

struct InitResult {
  VerificationKey key;
  ServerSetup setup;
};

/// Builds a key from a chosen Lambda. Gamma costs c*rows*cols
/// multiplications, charged to whatever phase is active (init, normally).
inline VerificationKey make_key(Matrix lambda, const Matrix& delta) {
  if (lambda.cols() != delta.rows()) throw std::invalid_argument("lambda width must match delta height");
  PhaseScope phase(Phase::init);
  Matrix gamma = matmul(lambda, delta);
  return {std::move(lambda), std::move(gamma)};
}

/// Samples Lambda uniformly and precomputes Gamma for any (possibly
/// rectangular) public matrix.
inline VerificationKey make_key(const Matrix& delta, std::size_t c, Xoshiro256& rng) {
  if (c == 0) throw std::invalid_argument("security parameter c must be >= 1");
  return make_key(delta.field().sample_matrix(rng, c, delta.rows()), delta);
}

inline InitResult init(const CoeffMatrix& coeffs, std::size_t c, Xoshiro256& rng) {
  return {make_key(coeffs.delta, c, rng), ServerSetup{coeffs.delta}};
}

inline InitResult init(const Polynomial& f, std::size_t c, Xoshiro256& rng) { return init(decompose(f), c, rng); }

/// Recomputes Lambda Delta and compares with the stored Gamma. Test and
/// debug aid; rounds never look at Delta after initialization.
inline bool gamma_matches(const VerificationKey& key, const Matrix& delta) {
  CountingPause pause;
  return matmul(key.lambda, delta) == key.gamma;
}

enum class Verdict { accepted, rejected, malformed, missing };

inline std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::accepted: return "accepted";
    case Verdict::rejected: return "rejected";
    case Verdict::malformed: return "malformed";
    case Verdict::missing: return "missing";
  }
  return "?";
}

/// Checks Lambda w_hat == Gamma z (2*c*s multiplications). A response of
/// the wrong length is reported as malformed, never as a plain rejection.
inline Verdict verify(const VerificationKey& key, std::span<const FieldElement> z, std::span<const FieldElement> w_hat) {
  if (z.size() != key.query_size() || w_hat.size() != key.response_size()) return Verdict::malformed;
  for (auto e : w_hat)
    if (!key.field().owns(e)) return Verdict::malformed;
  return matvec(key.lambda, w_hat) == matvec(key.gamma, z) ? Verdict::accepted : Verdict::rejected;
}

/// p . w_hat. Only defined for an accepted response.
inline FieldElement decode(std::span<const FieldElement> p, std::span<const FieldElement> w_hat, Verdict verdict) {
  if (verdict != Verdict::accepted)
    throw std::logic_error("decode called on a response that did not verify");
  return dot(p, w_hat);
}

struct RoundTranscript {
  std::size_t round = 0;
  std::optional<FieldElement> x;  // absent for multivariate queries
  Vector z;
  Vector w_hat;
  Verdict verdict = Verdict::rejected;
  std::optional<FieldElement> dec;
  /// w_hat differs from the honest Delta z. Computed outside the counters.
  bool forged = false;
  OpCounter ops;

  bool ver() const { return verdict == Verdict::accepted; }
};

inline nlohmann::json to_json(const RoundTranscript& t) {
  nlohmann::json j;
  j["round"] = t.round;
  j["x"] = t.x ? nlohmann::json(t.x->value()) : nlohmann::json(nullptr);
  j["z"] = detail::values_json(t.z);
  j["w_hat"] = detail::values_json(t.w_hat);
  j["ver"] = t.ver() ? 1 : 0;
  j["verdict"] = verdict_name(t.verdict);
  j["dec"] = t.dec ? nlohmann::json(t.dec->value()) : nlohmann::json(nullptr);
  j["forged"] = t.forged;
  nlohmann::json ops;
  for (Phase p : kAllPhases) {
    const auto& tally = t.ops.at(p);
    ops[std::string(phase_name(p))] = {{"muls", tally.muls}, {"adds", tally.adds}, {"invs", tally.invs}};
  }
  j["ops"] = ops;
  return j;
}

/// One user talking to one server over many rounds. The user side only
/// reads `key`; `setup` is the public material handed to the server.
struct Session {
  VerificationKey key;
  ServerSetup setup;
  QueryHistory history;
  std::size_t rounds_run = 0;

  Session(VerificationKey k, ServerSetup s) : key(std::move(k)), setup(std::move(s)) {}
  explicit Session(InitResult r) : Session(std::move(r.key), std::move(r.setup)) {}
};

/// One query with caller-supplied query vector z and decode vector p.
/// Encoding cost is the caller's; `ops` receives serve/verify/decode.
inline RoundTranscript run_query(Session& session, ServerStrategy& server, Vector z, const Vector& p,
                                 OpCounter ops = {}) {
  RoundTranscript t;
  t.round = session.rounds_run++;
  {
    CountingScope scope(ops, Phase::serve);
    t.w_hat = server.respond(session.setup, z, session.history);
    {
      PhaseScope phase(Phase::verify);
      t.verdict = verify(session.key, z, t.w_hat);
    }
    if (t.ver()) {
      PhaseScope phase(Phase::decode);
      t.dec = decode(p, t.w_hat, t.verdict);
    }
  }
  {
    CountingPause pause;
    t.forged = t.verdict == Verdict::malformed || t.w_hat != server_compute(session.setup, z);
  }
  session.history.queries.push_back(z);
  t.z = std::move(z);
  t.ops = ops;
  return t;
}

/// Encode x, query the server, verify, decode on acceptance.
inline RoundTranscript run_round(Session& session, ServerStrategy& server, FieldElement x) {
  OpCounter ops;
  PowerVectors pv;
  {
    CountingScope scope(ops, Phase::encode);
    pv = power_vectors(x, session.key.query_size());
  }
  RoundTranscript t = run_query(session, server, std::move(pv.z), pv.p, ops);
  t.x = x;
  return t;
}

/// Sequential rounds. With `feedback`, each verdict bit is made public to
/// the server before the next round, and nothing else is.
inline std::vector<RoundTranscript> run_session(Session& session, ServerStrategy& server,
                                                std::span<const FieldElement> xs, bool feedback) {
  std::vector<RoundTranscript> out;
  out.reserve(xs.size());
  for (auto x : xs) {
    out.push_back(run_round(session, server, x));
    if (feedback) {
      const bool bit = out.back().ver();
      session.history.feedback.push_back(bit);
      server.feedback(bit);
    }
  }
  return out;
}

}  // namespace interpol
