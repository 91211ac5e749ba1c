#include "dhj/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"De Donder-Weyl field theory and Hamilton-Jacobi toolkit"};
  app.set_version_flag("--version", "dedonder-hj 0.1");

  std::string command;
  std::string scenario;
  std::string out;
  std::string sweep;
  std::uint64_t seed = 42;
  bool serial = false;

  app.add_option("command", command, "simulate | verify-hj | characteristics | compare | pairing-check")
      ->required()
      ->check(CLI::IsMember(dhj::command_names()));
  app.add_option("--scenario", scenario, "scenario file")->required();
  app.add_option("--out", out, "output directory (overrides output.directory)");
  app.add_option("--seed", seed, "seed for random variations and sampling");
  app.add_option("--sweep", sweep, "refinement sweep")->check(CLI::IsMember({"grid", "time"}));
  app.add_flag("--serial", serial, "use the serial reference kernels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : dhj::kExitValidation;
  }

  dhj::CommandOptions opts;
  if (!out.empty()) opts.out_dir = out;
  if (!sweep.empty()) opts.sweep = sweep;
  opts.seed = seed;
  opts.exec = serial ? dhj::Execution::serial : dhj::Execution::parallel;
  return dhj::run_command(command, scenario, opts, std::cout, std::cerr);
}
