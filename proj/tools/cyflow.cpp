#include <iostream>

#include <CLI11.hpp>

#include "cyf/cli/config.hpp"
#include "cyf/cli/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Prescribed Chern scalar curvature solver"};
  std::string config_path;
  std::string output_dir;
  bool quiet = false;
  bool check = false;
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--output", output_dir, "output directory (overrides output_dir)");
  app.add_flag("--quiet", quiet, "suppress progress output");
  app.add_flag("--check", check, "parse and validate the config, then exit");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cyf::cli::kConfigError;
  }

  cyf::cli::RunConfig config;
  try {
    config = cyf::cli::parse_config(config_path);
  } catch (const cyf::Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return cyf::cli::kConfigError;
  }
  if (!output_dir.empty()) config.output_dir = output_dir;
  if (check) {
    if (!quiet) std::cout << "config ok: mode " << cyf::cli::to_string(config.mode) << '\n';
    return cyf::cli::kSuccess;
  }
  return cyf::cli::execute(config, quiet ? nullptr : &std::cerr);
}
