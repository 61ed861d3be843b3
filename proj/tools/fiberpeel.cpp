#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "fiberpeel/config.hpp"
#include "fiberpeel/errors.hpp"
#include "fiberpeel/output.hpp"
#include "fiberpeel/scenario.hpp"
#include "fiberpeel/verification.hpp"

namespace fs = std::filesystem;
using namespace fiberpeel;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNoConvergedStep = 3;

int cmd_run(const std::string& config_path, const std::string& branch_name, const std::string& out) {
  const auto cfg = config::load(config_path);
  const auto branch = output::parse_branch(branch_name);
  scenario::RunOptions options;
  options.out_dir = out;
  const auto results = scenario::run_all(cfg, branch, options);
  int code = 0;
  for (const auto& r : results) {
    std::printf("%s [%s]: %zu points, F_ref = %.6e%s%s\n", r.scenario.c_str(), model::to_string(r.branch).c_str(),
                r.records.size(), r.f_ref, r.terminated ? ", terminated: " : "",
                r.terminated ? r.termination_reason.c_str() : "");
    if (r.records.empty()) code = kExitNoConvergedStep;
  }
  return code;
}

int cmd_preset(const std::string& name, const std::string& out) {
  const auto cfg = scenario::preset(name);
  if (out.empty() || out == "-") {
    std::cout << config::serialize(cfg) << '\n';
  } else {
    if (const auto parent = fs::path(out).parent_path(); !parent.empty()) fs::create_directories(parent);
    config::save(cfg, out);
  }
  return 0;
}

int cmd_refforce(const std::string& config_path) {
  for (const auto& cfg : config::expand_variants(config::load(config_path))) {
    std::printf("%s: F_ref = %.17g  F_ref_own = %.17g\n", cfg.name.c_str(), scenario::reference_force(cfg),
                scenario::own_reference_force(cfg));
  }
  return 0;
}

int cmd_verify(const std::string& config_path) {
  const auto cfg = config::load(config_path);
  config::validate(cfg);
  bool ok = true;
  for (const auto& c : verification::run_property_suite(cfg)) {
    std::printf("%s  %-55s %.3e (%s %.1e)%s%s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.value,
                c.passed ? "ok" : "limit", c.threshold, c.detail.empty() ? "" : "  ", c.detail.c_str());
    ok = ok && c.passed;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasi-static peeling of two adhesive elastic fibers"};
  app.require_subcommand(1);

  std::string config_path, branch = "contact", out, name;

  auto* run = app.add_subcommand("run", "Run a scenario branch (all variants) into a directory");
  run->add_option("--config", config_path, "Scenario file")->required()->check(CLI::ExistingFile);
  run->add_option("--branch", branch, "contact, separated or unstable")
      ->check(CLI::IsMember({"contact", "separated", "unstable"}));
  run->add_option("--out", out, "Output directory")->required();

  auto* pre = app.add_subcommand("preset", "Write a named preset as a scenario file");
  pre->add_option("name", name, "Preset name")->required();
  pre->add_option("--out", out, "Output file (stdout if omitted)");

  auto* ref = app.add_subcommand("refforce", "Print the reference force");
  ref->add_option("--config", config_path, "Scenario file")->required()->check(CLI::ExistingFile);

  auto* ver = app.add_subcommand("verify", "Run the tangent, gradient and quadrature property suite");
  ver->add_option("--config", config_path, "Scenario file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitValidation;
  }

  try {
    if (*run) return cmd_run(config_path, branch, out);
    if (*pre) return cmd_preset(name, out);
    if (*ref) return cmd_refforce(config_path);
    if (*ver) return cmd_verify(config_path);
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
