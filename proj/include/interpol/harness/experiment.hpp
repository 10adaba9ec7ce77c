#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "interpol/adversary.hpp"
#include "interpol/field.hpp"
#include "interpol/harness/config.hpp"
#include "interpol/harness/report.hpp"
#include "interpol/multiparty.hpp"
#include "interpol/multivariate.hpp"
#include "interpol/poly.hpp"
#include "interpol/protocol.hpp"
#include "interpol/random.hpp"
#include "json.hpp"

namespace interpol::harness {

/// Runs fn(i) for i in [0, count) on `threads` workers and returns the
/// results in index order, so the outcome does not depend on scheduling.
template <class R, class Fn>
std::vector<R> parallel_map(std::uint64_t count, unsigned threads, Fn&& fn) {
  std::vector<R> out(count);
  if (threads <= 1 || count <= 1) {
    for (std::uint64_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::uint64_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

namespace detail {

struct TrialResult {
  nlohmann::json record;
  std::vector<std::uint64_t> events;
  std::vector<std::uint64_t> opportunities;
  OpCounter ops;
};

inline nlohmann::json values(std::span<const FieldElement> v) { return interpol::detail::values_json(v); }

inline Polynomial trial_polynomial(const ExperimentConfig& cfg, const FieldContext& field, Xoshiro256& rng,
                                   const std::optional<Polynomial>& fixed) {
  if (fixed) return *fixed;
  return Polynomial::random(field, cfg.degree_bound, rng);
}

inline double inverse_power(std::uint64_t q, std::size_t c) { return std::pow(static_cast<double>(q), -static_cast<double>(c)); }

inline std::optional<Polynomial> load_fixed_polynomial(const ExperimentConfig& cfg) {
  if (!cfg.polynomial_file) return std::nullopt;
  std::ifstream in(*cfg.polynomial_file);
  std::stringstream buf;
  buf << in.rdbuf();
  Polynomial f = [&] {
    try {
      return parse_polynomial(buf.str());
    } catch (const std::exception& e) {
      throw ConfigError({"polynomial.file: " + std::string(e.what())});
    }
  }();
  if (f.field().modulus() != cfg.modulus)
    throw ConfigError({"polynomial.file modulus does not match field.modulus"});
  return f;
}

inline std::vector<TrialResult> run_eval(const ExperimentConfig& cfg, unsigned threads, Report& report) {
  const FieldContext field(cfg.modulus);
  const auto fixed = load_fixed_polynomial(cfg);
  auto results = parallel_map<TrialResult>(cfg.trials, threads, [&](std::uint64_t i) {
    Xoshiro256 rng(derive_seed(cfg.seed, i));
    TrialResult tr;
    Polynomial f = trial_polynomial(cfg, field, rng, fixed);
    InitResult ir = [&] {
      CountingScope scope(tr.ops, Phase::init);
      return init(f, cfg.c, rng);
    }();
    Session session(std::move(ir));
    HonestServer server;
    Vector xs = field.sample_vector(rng, cfg.rounds);
    auto transcripts = run_session(session, server, xs, false);
    bool ok = true;
    auto vers = nlohmann::json::array();
    auto decs = nlohmann::json::array();
    auto expect = nlohmann::json::array();
    for (const auto& t : transcripts) {
      FieldElement truth = [&] {
        CountingPause pause;
        return horner_eval(f, *t.x);
      }();
      ok = ok && t.ver() && t.dec && *t.dec == truth;
      vers.push_back(t.ver() ? 1 : 0);
      decs.push_back(t.dec ? nlohmann::json(t.dec->value()) : nlohmann::json(nullptr));
      expect.push_back(truth.value());
      tr.ops += t.ops;
    }
    tr.record = {{"record", "trial"}, {"trial", i},     {"x", values(xs)}, {"ver", vers},
                 {"dec", decs},       {"horner", expect}, {"ok", ok}};
    tr.events = {ok ? 1u : 0u};
    tr.opportunities = {1};
    return tr;
  });
  report.estimates = {{"completeness", 0, 0, std::nullopt, "", false}};
  return results;
}

inline std::vector<TrialResult> run_attack(const ExperimentConfig& cfg, unsigned threads, Report& report) {
  const FieldContext field(cfg.modulus);
  const auto fixed = load_fixed_polynomial(cfg);
  const std::size_t kinds = cfg.adversaries.size();
  auto results = parallel_map<TrialResult>(cfg.trials * kinds, threads, [&](std::uint64_t idx) {
    const std::size_t a = idx / cfg.trials;
    const std::uint64_t i = idx % cfg.trials;
    const std::uint64_t trial_seed = derive_seed(derive_seed(cfg.seed, a + 1), i);
    Xoshiro256 rng(trial_seed);
    TrialResult tr;
    Polynomial f = trial_polynomial(cfg, field, rng, fixed);
    InitResult ir = [&] {
      CountingScope scope(tr.ops, Phase::init);
      return init(f, cfg.c, rng);
    }();
    Session session(std::move(ir));
    auto server = make_strategy(cfg.adversaries[a], derive_seed(trial_seed, 0xADu));
    const FieldElement x = field.sample_uniform(rng);
    RoundTranscript t = run_round(session, *server, x);
    tr.ops += t.ops;
    const bool fooled = t.ver() && t.forged;
    tr.record = {{"record", "trial"},
                 {"trial", i},
                 {"strategy", strategy_name(cfg.adversaries[a])},
                 {"x", x.value()},
                 {"verdict", verdict_name(t.verdict)},
                 {"forged", t.forged},
                 {"accepted_forgery", fooled}};
    tr.events.assign(kinds, 0);
    tr.opportunities.assign(kinds, 0);
    tr.events[a] = fooled ? 1 : 0;
    tr.opportunities[a] = 1;
    return tr;
  });
  const double bound = inverse_power(cfg.modulus, cfg.c);
  for (auto k : cfg.adversaries)
    report.estimates.push_back({"forged-accept/" + std::string(strategy_name(k)), 0, 0, bound, "q^-c", false});
  return results;
}

inline std::vector<TrialResult> run_adaptive(const ExperimentConfig& cfg, unsigned threads, Report& report) {
  const FieldContext field(cfg.modulus);
  const auto fixed = load_fixed_polynomial(cfg);
  auto results = parallel_map<TrialResult>(cfg.trials, threads, [&](std::uint64_t i) {
    const std::uint64_t trial_seed = derive_seed(cfg.seed, i);
    Xoshiro256 rng(trial_seed);
    TrialResult tr;
    Polynomial f = trial_polynomial(cfg, field, rng, fixed);
    InitResult ir = [&] {
      CountingScope scope(tr.ops, Phase::init);
      return init(f, cfg.c, rng);
    }();
    const Vector xs = field.sample_vector(rng, cfg.rounds);
    auto play = [&](bool feedback) {
      Session session(ir.key, ir.setup);
      AdaptiveServer server(derive_seed(trial_seed, 0xADu));
      auto transcripts = run_session(session, server, xs, feedback);
      std::optional<std::size_t> first;
      for (const auto& t : transcripts) {
        tr.ops += t.ops;
        if (!first && t.ver() && t.forged) first = t.round;
      }
      return first;
    };
    const auto with_fb = play(true);
    const auto without_fb = play(false);
    auto j_round = [](const std::optional<std::size_t>& r) { return r ? nlohmann::json(*r) : nlohmann::json(nullptr); };
    tr.record = {{"record", "trial"},
                 {"trial", i},
                 {"x", values(xs)},
                 {"first_forged_accept_feedback", j_round(with_fb)},
                 {"first_forged_accept_no_feedback", j_round(without_fb)}};
    tr.events = {with_fb ? 1u : 0u, without_fb ? 1u : 0u};
    tr.opportunities = {1, 1};
    return tr;
  });
  const double per_round = inverse_power(cfg.modulus, cfg.c);
  const double bound = std::min(1.0, static_cast<double>(cfg.rounds) * per_round);
  report.estimates = {{"adaptive/feedback", 0, 0, bound, "m*q^-c", false},
                      {"adaptive/no-feedback", 0, 0, bound, "m*q^-c", false}};
  report.summaries.push_back({{"record", "summary"},
                              {"rounds", cfg.rounds},
                              {"single_round_bound", per_round},
                              {"adaptive_bound", bound},
                              {"random_output_envelope", 1.0 - std::pow(1.0 - per_round, static_cast<double>(cfg.rounds))}});
  return results;
}

inline std::vector<TrialResult> run_multiparty(const ExperimentConfig& cfg, unsigned threads, Report& report) {
  const FieldContext field(cfg.modulus);
  const auto fixed = load_fixed_polynomial(cfg);
  const std::size_t n = cfg.nodes;
  auto results = parallel_map<TrialResult>(cfg.trials, threads, [&](std::uint64_t i) {
    const std::uint64_t trial_seed = derive_seed(cfg.seed, i);
    Xoshiro256 rng(trial_seed);
    TrialResult tr;
    Polynomial f = trial_polynomial(cfg, field, rng, fixed);
    Network net = network_init(f, n, cfg.c, derive_seed(trial_seed, 1), cfg.data_shards);
    for (const auto& node : net.nodes) tr.ops += node.init_ops;
    for (auto j : cfg.malicious) {
      const std::uint64_t s = cfg.colluding ? derive_seed(trial_seed, 2) : derive_seed(trial_seed, 100 + j);
      net.nodes[j].adversary = make_strategy(cfg.malicious_strategy, s);
    }
    BroadcastBus bus(n);
    std::uint64_t missed = 0, checks = 0, all_flagged = 1, decode_ok = 1;
    auto rounds = nlohmann::json::array();
    for (std::size_t r = 0; r < cfg.rounds; ++r) {
      const FieldElement x = field.sample_uniform(rng);
      NetworkRound nr = run_network_round(net, bus, x, cfg.policy);
      FieldElement truth = [&] {
        CountingPause pause;
        return horner_eval(f, x);
      }();
      std::vector<bool> forged(n, false);
      {
        CountingPause pause;
        PowerVectors pv = power_vectors(x, net.s());
        for (std::size_t j = 0; j < n; ++j) forged[j] = nr.broadcasts[j] != server_compute(net.nodes[j].slice, pv.z);
      }
      auto ver = nlohmann::json::array();
      auto nodes = nlohmann::json::array();
      for (const auto& res : nr.nodes) {
        auto row = nlohmann::json::array();
        for (auto v : res.verdicts) row.push_back(v == Verdict::accepted ? 1 : 0);
        ver.push_back(row);
        const bool correct = res.value && *res.value == truth;
        if (res.honest) {
          decode_ok &= correct ? 1 : 0;
          for (std::size_t j = 0; j < n; ++j) {
            if (j == res.id || !forged[j]) continue;
            ++checks;
            if (res.verdicts[j] == Verdict::accepted) {
              ++missed;
              all_flagged = 0;
            }
          }
        }
        nlohmann::json ops;
        for (Phase p : kAllPhases) ops[std::string(phase_name(p))] = res.ops.at(p).muls;
        nodes.push_back({{"id", res.id},
                         {"honest", res.honest},
                         {"value", res.value ? nlohmann::json(res.value->value()) : nlohmann::json(nullptr)},
                         {"correct", correct},
                         {"offenders", res.offenders},
                         {"recomputed", res.recomputed},
                         {"erased", res.erased},
                         {"muls", res.ops.per_round().muls},
                         {"muls_by_phase", ops}});
        tr.ops += res.ops;
      }
      rounds.push_back({{"round", r}, {"x", x.value()}, {"horner", truth.value()}, {"ver", ver}, {"nodes", nodes}});
    }
    tr.record = {{"record", "trial"}, {"trial", i}, {"rounds", rounds}};
    const std::uint64_t has_forgers = cfg.malicious.empty() ? 0 : 1;
    tr.events = {missed, all_flagged * has_forgers, decode_ok};
    tr.opportunities = {checks, has_forgers, 1};
    return tr;
  });
  const bool conjectural = cfg.malicious_strategy == StrategyKind::adaptive && cfg.rounds > 1;
  report.estimates = {{"pair/forged-accept", 0, 0, inverse_power(cfg.modulus, cfg.c), "q^-c", conjectural},
                      {"trial/all-forgers-flagged", 0, 0, std::nullopt, "", false},
                      {"trial/honest-decode-correct", 0, 0, std::nullopt, "", false}};
  return results;
}

inline std::vector<TrialResult> run_multivar(const ExperimentConfig& cfg, unsigned threads, Report& report) {
  const FieldContext field(cfg.modulus);
  auto results = parallel_map<TrialResult>(cfg.trials, threads, [&](std::uint64_t i) {
    const std::uint64_t trial_seed = derive_seed(cfg.seed, i);
    Xoshiro256 rng(trial_seed);
    TrialResult tr;
    auto f = MultivariatePolynomial::random(field, cfg.variables, cfg.variable_degree_bound, rng);
    InitResult ir = [&] {
      CountingScope scope(tr.ops, Phase::init);
      return mv_init(f, cfg.c, rng);
    }();
    const Vector inputs = field.sample_vector(rng, cfg.variables);
    Session session(ir.key, ir.setup);
    HonestServer honest;
    RoundTranscript t = mv_eval_verified(session, honest, inputs, cfg.variable_degree_bound);
    tr.ops += t.ops;
    FieldElement truth = field.zero();
    bool identity = false;
    {
      CountingPause pause;
      truth = mv_reference_eval(f, inputs);
      auto [x0, x1] = mv_input_vectors(inputs, cfg.variable_degree_bound);
      identity = dot(x0, matvec(ir.setup.delta, x1)) == truth;
    }
    const bool ok = identity && t.ver() && t.dec && *t.dec == truth;
    Session attacked(ir.key, ir.setup);
    FixedOffsetServer forger(derive_seed(trial_seed, 0xADu));
    RoundTranscript ft = mv_eval_verified(attacked, forger, inputs, cfg.variable_degree_bound);
    const bool fooled = ft.ver() && ft.forged;
    tr.record = {{"record", "trial"},
                 {"trial", i},
                 {"inputs", values(inputs)},
                 {"dec", t.dec ? nlohmann::json(t.dec->value()) : nlohmann::json(nullptr)},
                 {"reference", truth.value()},
                 {"identity", identity},
                 {"ver", t.ver() ? 1 : 0},
                 {"user_muls", t.ops.user().muls},
                 {"server_muls", t.ops.at(Phase::serve).muls},
                 {"forged_verdict", verdict_name(ft.verdict)}};
    tr.events = {ok ? 1u : 0u, fooled ? 1u : 0u};
    tr.opportunities = {1, 1};
    return tr;
  });
  report.estimates = {{"identity-and-completeness", 0, 0, std::nullopt, "", false},
                      {"forged-accept/fixed-offset", 0, 0, inverse_power(cfg.modulus, cfg.c), "q^-c", false}};
  return results;
}

inline std::vector<TrialResult> run_bench(const ExperimentConfig& cfg, unsigned threads, Report& report) {
  const FieldContext field(cfg.modulus);
  const auto& ks = cfg.bench_degree_bounds;
  std::vector<double> seconds(ks.size());
  auto results = parallel_map<TrialResult>(ks.size(), threads, [&](std::uint64_t i) {
    Xoshiro256 rng(derive_seed(cfg.seed, i));
    TrialResult tr;
    Polynomial f = Polynomial::random(field, ks[i], rng);
    InitResult ir = [&] {
      CountingScope scope(tr.ops, Phase::init);
      return init(f, cfg.c, rng);
    }();
    Session session(std::move(ir));
    HonestServer server;
    const FieldElement x = field.sample_uniform(rng);
    const auto start = std::chrono::steady_clock::now();
    RoundTranscript t = run_round(session, server, x);
    seconds[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    tr.ops += t.ops;
    const std::size_t s = session.key.query_size();
    tr.record = {{"record", "trial"},
                 {"k", ks[i]},
                 {"s", s},
                 {"c", cfg.c},
                 {"init_muls", tr.ops.at(Phase::init).muls},
                 {"user_muls", t.ops.user().muls},
                 {"server_muls", t.ops.at(Phase::serve).muls},
                 {"user_model", (2 * cfg.c + 3) * s},
                 {"server_model", s * s},
                 {"ver", t.ver() ? 1 : 0}};
    return tr;
  });
  for (std::size_t i = 1; i < results.size(); ++i) {
    const auto& prev = results[i - 1].record;
    auto& cur = results[i].record;
    cur["user_ratio"] = cur["user_muls"].get<double>() / prev["user_muls"].get<double>();
    cur["server_ratio"] = cur["server_muls"].get<double>() / prev["server_muls"].get<double>();
  }
  for (std::size_t i = 0; i < ks.size(); ++i)
    report.timings.push_back({"round k=" + std::to_string(ks[i]), seconds[i]});
  return results;
}

}  // namespace detail

/// Runs one experiment. Deterministic in (config, seed): per-trial seeds are
/// derived from the master seed by trial index and results are reduced in
/// index order, so any thread count yields the same report.
inline Report run_experiment(const ExperimentConfig& cfg, unsigned threads = 1) {
  Report report;
  report.mode = cfg.mode;
  report.seed = cfg.seed;
  report.config = to_json(cfg);
  const auto start = std::chrono::steady_clock::now();
  std::vector<detail::TrialResult> results;
  switch (cfg.mode) {
    case Mode::eval: results = detail::run_eval(cfg, threads, report); break;
    case Mode::attack: results = detail::run_attack(cfg, threads, report); break;
    case Mode::adaptive: results = detail::run_adaptive(cfg, threads, report); break;
    case Mode::multiparty: results = detail::run_multiparty(cfg, threads, report); break;
    case Mode::multivar: results = detail::run_multivar(cfg, threads, report); break;
    case Mode::bench: results = detail::run_bench(cfg, threads, report); break;
  }
  for (auto& r : results) {
    report.trials.push_back(std::move(r.record));
    report.ops += r.ops;
    for (std::size_t e = 0; e < r.events.size() && e < report.estimates.size(); ++e) {
      report.estimates[e].events += r.events[e];
      report.estimates[e].trials += r.opportunities[e];
    }
  }
  report.timings.push_back({"total", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()});
  return report;
}

}  // namespace interpol::harness
