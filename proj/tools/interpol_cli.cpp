#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "interpol/harness/config.hpp"
#include "interpol/harness/experiment.hpp"
#include "interpol/harness/report.hpp"
#include "interpol/random.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitBound = 3;

struct Options {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::string format = "table";
  unsigned threads = 1;
  bool self_check = false;
  bool os_entropy = false;
};

void add_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "JSON experiment configuration");
  cmd->add_option("--seed", o.seed, "master seed (overrides the config)");
  cmd->add_option("--out", o.out, "output file (default: config output.path, else stdout)");
  cmd->add_option("--format", o.format, "report format")->check(CLI::IsMember({"table", "records"}));
  cmd->add_option("--threads", o.threads, "worker threads (0 = hardware concurrency)");
  cmd->add_flag("--self-check", o.self_check, "exit 3 if an estimate's lower confidence bound exceeds its bound");
  cmd->add_flag("--os-entropy", o.os_entropy, "seed from the operating system instead of the config");
}

int run(interpol::harness::Mode mode, const Options& o) {
  using namespace interpol::harness;
  ExperimentConfig cfg;
  try {
    cfg = o.config ? load_config_file(*o.config, mode) : parse_config(nlohmann::json::object(), mode);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kExitConfig;
  }
  if (o.os_entropy) cfg.seed = interpol::os_entropy_seed();
  if (o.seed) cfg.seed = *o.seed;
  unsigned threads = o.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : o.threads;

  Report report;
  try {
    report = run_experiment(cfg, threads);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kExitConfig;
  }
  const Format format = *parse_format(o.format);
  const auto path = o.out ? o.out : cfg.output_path;
  if (path) {
    emit_report(report, format, *path);
  } else {
    std::cout << render(report, format);
  }
  if (o.self_check && report.bound_violated()) {
    std::cerr << "self-check: an empirical estimate exceeds its theoretical bound\n";
    return kExitBound;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  using interpol::harness::Mode;
  CLI::App app{"verifiable polynomial evaluation experiments"};
  app.require_subcommand(1);
  Options opts;
  std::optional<Mode> chosen;
  for (Mode m : {Mode::eval, Mode::attack, Mode::adaptive, Mode::multiparty, Mode::multivar, Mode::bench}) {
    auto* cmd = app.add_subcommand(std::string(interpol::harness::mode_name(m)));
    add_options(cmd, opts);
    cmd->callback([&chosen, m] { chosen = m; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  try {
    return run(*chosen, opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
