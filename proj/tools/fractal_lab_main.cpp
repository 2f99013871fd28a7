// fractal-lab <experiment> [--key value]... [--config FILE] [--seed N] [--out DIR]
// fractal-lab list

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fractal_lab/errors.hpp"
#include "fractal_lab/harness.hpp"
#include "fractal_lab/io.hpp"
#include "fractal_lab/parallel.hpp"

namespace fl = fractal_lab;

namespace {

void print_listing() {
  for (const auto& e : fl::list_experiments()) {
    std::cout << e.name << "  " << e.description << '\n';
    for (const auto& [k, v] : e.defaults) std::cout << "    " << k << " = " << v << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random-fractal simulation and verification experiments"};
  app.allow_extras();
  std::string experiment;
  std::uint64_t seed = 1;
  std::string out_dir;
  std::string config_file;
  int threads = -1;
  app.add_option("experiment", experiment, "experiment name, or 'list'")->required();
  app.add_option("--seed", seed, "master seed");
  app.add_option("--out", out_dir, "output directory (default: out/<experiment>)");
  app.add_option("--config", config_file, "key = value file; --key value options override it");
  app.add_option("--threads", threads, "thread cap (0 = auto; default: FRACTAL_LAB_THREADS)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (experiment == "list") {
    print_listing();
    return 0;
  }
  try {
    if (threads >= 0) fl::set_thread_cap(threads);
    fl::ConfigMap config;
    if (!config_file.empty()) config = fl::parse_config_text(fl::read_file(config_file));
    const auto extras = app.remaining();
    for (std::size_t i = 0; i < extras.size(); ++i) {
      const std::string& tok = extras[i];
      if (tok.rfind("--", 0) != 0 || tok.size() < 3) throw fl::ConfigError("unexpected argument '" + tok + "'");
      std::string key = tok.substr(2), value;
      if (const auto eq = key.find('='); eq != std::string::npos) {
        value = key.substr(eq + 1);
        key.erase(eq);
      } else {
        if (i + 1 >= extras.size()) throw fl::ConfigError("field '" + key + "': missing value");
        value = extras[++i];
      }
      config[key] = value;
    }
    if (out_dir.empty()) out_dir = "out/" + experiment;
    const auto result = fl::run_experiment(experiment, config, seed, out_dir);
    for (const auto& [k, v] : result.metrics) std::cout << k << " = " << fl::format_double(v) << '\n';
    for (const auto& [k, v] : result.verdicts) std::cout << (v ? "PASS " : "FAIL ") << k << '\n';
    std::cout << "artifacts in " << out_dir << '\n';
    return result.passed() ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "fractal-lab: " << e.what() << '\n';
    return 1;
  }
}
