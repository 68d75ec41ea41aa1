// Copyright 2026 The squeezesim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "squeezesim/io/commands.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> threads;
  std::string out = ".";
  std::string suite = "all";
};

void add_common(CLI::App* cmd, Flags& f, bool config_required) {
  auto* opt = cmd->add_option("--config", f.config, "INI configuration file");
  if (config_required) opt->required();
  cmd->add_option("--seed", f.seed, "master seed (overrides [run] seed)");
  cmd->add_option("--trials", f.trials, "trials per experiment (overrides [run] trials)");
  cmd->add_option("--out", f.out, "output directory")->capture_default_str();
  cmd->add_option("--threads", f.threads, "worker threads, 0 = one per core");
}

squeezesim::io::RunConfig resolve(const Flags& f, bool verify) {
  using squeezesim::io::RunConfig;
  RunConfig c = f.config.empty()
                    ? squeezesim::io::parse_config("[run]\nschema = 1\natoms = 10000\n"
                                                   "trials = 5000\nseed = 1\n",
                                                   "<defaults>")
                    : squeezesim::io::load_config(f.config);
  if (f.seed) c.seed = *f.seed;
  if (f.trials) {
    if (*f.trials < 2) {
      throw squeezesim::io::ConfigError("--trials", "", 0, "need at least two trials");
    }
    c.trials = *f.trials;
    if (verify) c.verify.trials = *f.trials;
  }
  if (f.threads) c.threads = *f.threads;
  squeezesim::io::finalize(c);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  namespace io = squeezesim::io;
  CLI::App app{"Monte Carlo simulator for spin-squeezing retrieval after release "
               "from an optical cavity"};
  app.set_version_flag("--version", std::string(io::kSoftwareVersion));
  app.require_subcommand(1);
  Flags f;
  auto* simulate = app.add_subcommand("simulate", "run one experiment");
  auto* sweep = app.add_subcommand("sweep", "run a free-fall sweep and write figure data");
  auto* verify = app.add_subcommand("verify", "run the self-verification suites");
  auto* calibrate = app.add_subcommand("calibrate", "calibrate the coupling geometry");
  add_common(simulate, f, true);
  add_common(sweep, f, true);
  add_common(verify, f, false);
  add_common(calibrate, f, true);
  verify->add_option("suite", f.suite, "oracle, analytic, schema or all")
      ->check(CLI::IsMember({"oracle", "analytic", "schema", "all"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? io::kExitOk : io::kExitConfig;
  }

  try {
    const bool is_verify = verify->parsed();
    const io::RunConfig c = resolve(f, is_verify);
    if (simulate->parsed()) return io::cmd_simulate(c, f.out, std::cout);
    if (sweep->parsed()) return io::cmd_sweep(c, f.out, std::cout);
    if (calibrate->parsed()) return io::cmd_calibrate(c, f.out, std::cout);
    return io::cmd_verify(c, f.suite, f.out, std::cout);
  } catch (const io::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return io::kExitConfig;
  } catch (const squeezesim::InvalidParameter& e) {
    std::cerr << "invalid parameter: " << e.what() << '\n';
    return io::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return io::kExitFailure;
  }
}
