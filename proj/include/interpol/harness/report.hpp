#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "interpol/harness/config.hpp"
#include "interpol/op_counter.hpp"
#include "interpol/stats.hpp"
#include "json.hpp"

namespace interpol::harness {

/// Empirical rate of an event, its 99% Wilson interval and, for soundness
/// events, the theoretical ceiling it is compared against.
struct Estimate {
  std::string name;
  std::uint64_t events = 0;
  std::uint64_t trials = 0;
  std::optional<double> bound;
  std::string bound_label;
  /// The bound is asserted but not proven for this setting.
  bool conjectural = false;

  double rate() const { return trials ? static_cast<double>(events) / static_cast<double>(trials) : 0.0; }
  Interval interval() const { return wilson_interval(events, trials, kZ99); }
  /// True when even the lower confidence limit sits above the bound.
  bool violates_bound() const { return bound && trials > 0 && interval().lo > *bound; }
};

struct Timing {
  std::string label;
  double seconds = 0.0;
};

struct Report {
  Mode mode = Mode::eval;
  std::uint64_t seed = 0;
  nlohmann::json config;
  std::vector<nlohmann::json> trials;
  std::vector<nlohmann::json> summaries;
  std::vector<Estimate> estimates;
  OpCounter ops;
  /// Wall-clock numbers; human table only, so machine output stays replayable.
  std::vector<Timing> timings;

  bool bound_violated() const {
    for (const auto& e : estimates)
      if (e.violates_bound()) return true;
    return false;
  }
};

enum class Format { table, records };

inline std::optional<Format> parse_format(std::string_view s) {
  if (s == "table") return Format::table;
  if (s == "records") return Format::records;
  return std::nullopt;
}

inline nlohmann::json to_json(const Estimate& e) {
  const auto ci = e.interval();
  nlohmann::json j{{"record", "estimate"}, {"name", e.name},         {"events", e.events},
                   {"trials", e.trials},   {"rate", e.rate()},       {"ci_lo", ci.lo},
                   {"ci_hi", ci.hi},       {"confidence", 0.99}};
  j["bound"] = e.bound ? nlohmann::json(*e.bound) : nlohmann::json(nullptr);
  j["bound_label"] = e.bound_label;
  j["conjectural"] = e.conjectural;
  j["violates_bound"] = e.violates_bound();
  return j;
}

inline nlohmann::json ops_json(const OpCounter& ops) {
  nlohmann::json j{{"record", "ops"}};
  for (Phase p : kAllPhases) {
    const auto& t = ops.at(p);
    j[std::string(phase_name(p))] = {{"muls", t.muls}, {"adds", t.adds}, {"invs", t.invs}};
  }
  return j;
}

/// Line-delimited JSON: a header, then trial, summary, estimate and ops
/// records. A run without trials is just the header.
inline std::string render_records(const Report& r) {
  std::ostringstream os;
  os << nlohmann::json{{"record", "header"}, {"mode", mode_name(r.mode)}, {"seed", r.seed}, {"config", r.config}}.dump()
     << '\n';
  if (r.trials.empty()) return os.str();
  for (const auto& t : r.trials) os << t.dump() << '\n';
  for (const auto& s : r.summaries) os << s.dump() << '\n';
  for (const auto& e : r.estimates)
    if (e.trials > 0) os << to_json(e).dump() << '\n';
  if (r.ops.total().total() > 0) os << ops_json(r.ops).dump() << '\n';
  return os.str();
}

inline std::string render_table(const Report& r) {
  std::ostringstream os;
  os << "mode " << mode_name(r.mode) << "  seed " << r.seed << "  trials " << r.trials.size() << '\n';
  if (!r.estimates.empty()) {
    os << std::left << std::setw(34) << "estimate" << std::right << std::setw(10) << "events" << std::setw(10)
       << "trials" << std::setw(12) << "rate" << std::setw(12) << "ci99_lo" << std::setw(12) << "ci99_hi"
       << std::setw(12) << "bound" << '\n';
    os << std::setprecision(6) << std::fixed;
    for (const auto& e : r.estimates) {
      const auto ci = e.interval();
      os << std::left << std::setw(34) << e.name << std::right << std::setw(10) << e.events << std::setw(10)
         << e.trials << std::setw(12) << e.rate() << std::setw(12) << ci.lo << std::setw(12) << ci.hi;
      if (e.bound)
        os << std::setw(12) << *e.bound;
      else
        os << std::setw(12) << "-";
      os << '\n';
    }
    for (const auto& e : r.estimates) {
      if (!e.bound || e.trials == 0) continue;
      os << "  " << e.name << ": empirical " << e.rate() << " [" << e.interval().lo << ", " << e.interval().hi
         << "] vs bound " << e.bound_label << " = " << *e.bound
         << (e.violates_bound() ? "  VIOLATED" : "  ok") << (e.conjectural ? " (conjectural bound)" : "") << '\n';
    }
    os.unsetf(std::ios::fixed);
  }
  if (r.mode == Mode::bench && !r.trials.empty()) {
    os << std::right << std::setw(10) << "k" << std::setw(8) << "s" << std::setw(14) << "user_muls" << std::setw(14)
       << "user_model" << std::setw(10) << "ratio" << std::setw(14) << "server_muls" << std::setw(10) << "ratio"
       << std::setw(14) << "init_muls" << '\n';
    for (const auto& t : r.trials) {
      auto ratio = [&](const char* key) {
        std::ostringstream cell;
        if (t.contains(key))
          cell << std::fixed << std::setprecision(3) << t[key].get<double>();
        else
          cell << "-";
        return cell.str();
      };
      os << std::setw(10) << t.value("k", 0) << std::setw(8) << t.value("s", 0) << std::setw(14)
         << t.value("user_muls", 0) << std::setw(14) << t.value("user_model", 0) << std::setw(10)
         << ratio("user_ratio") << std::setw(14) << t.value("server_muls", 0) << std::setw(10) << ratio("server_ratio")
         << std::setw(14) << t.value("init_muls", 0) << '\n';
    }
  }
  for (const auto& s : r.summaries) os << "summary " << s.dump() << '\n';
  if (r.ops.total().total() > 0) {
    os << std::left << std::setw(10) << "phase" << std::right << std::setw(16) << "muls" << std::setw(16) << "adds"
       << std::setw(12) << "invs" << '\n';
    for (Phase p : kAllPhases) {
      const auto& t = r.ops.at(p);
      os << std::left << std::setw(10) << phase_name(p) << std::right << std::setw(16) << t.muls << std::setw(16)
         << t.adds << std::setw(12) << t.invs << '\n';
    }
  }
  for (const auto& t : r.timings) os << "time " << t.label << ": " << t.seconds << " s\n";
  return os.str();
}

inline std::string render(const Report& r, Format f) { return f == Format::records ? render_records(r) : render_table(r); }

/// Writes the rendered report to `path`, or throws if it cannot.
inline void emit_report(const Report& r, Format f, const std::string& path) {
  const std::string text = render(r, f);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write report to '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("failed while writing report to '" + path + "'");
}

}  // namespace interpol::harness
