#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include <hkflow/cli.hpp>

int main(int argc, char** argv)
{
  CLI::App app{"hkflow: translating-solution solver and certificate checks"};
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool verbose = false;
  app.add_option("--config", config_path, "Run configuration (key = value with [sections])")->required();
  app.add_option("--out", out_dir, "Output directory");
  auto* seed_opt = app.add_option("--seed", seed, "Random seed (overrides run.seed)");
  app.add_flag("--verbose", verbose, "Progress messages on stderr");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : hkflow::exit_error;
  }

  try {
    const hkflow::Config cfg = hkflow::Config::load(config_path);
    hkflow::RunOptions opt;
    opt.out = out_dir;
    if (seed_opt->count() > 0)
      opt.seed = seed;
    opt.verbose = verbose;
    const int status = hkflow::run(cfg, opt);
    if (status == hkflow::exit_fail)
      std::cerr << "verification failed; see " << out_dir << "/report.json\n";
    return status;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return hkflow::exit_error;
  }
}
