// gft: run derivation scripts against the Grassmann field-theory engine.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "gft/script/interp.hpp"
#include "gft/script/parser.hpp"
#include "gft/script/report.hpp"

namespace {

int parse_half_integer(const std::string& text) {
  // "-1", "3", "-1/2" -> twice the value
  size_t slash = text.find('/');
  if (slash == std::string::npos) return std::stoi(text) * 2;
  int n = std::stoi(text.substr(0, slash));
  int d = std::stoi(text.substr(slash + 1));
  if (d != 2) throw CLI::ValidationError("--order", "denominator must be 2");
  return n;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gft - derivation-script runner for the Grassmann field-theory engine"};
  app.require_subcommand(1);

  CLI::App* run = app.add_subcommand("run", "parse and execute a .gft derivation script");
  std::string script_path;
  std::string report_path;
  std::string order_text;
  gft::script::RunOptions options;
  run->add_option("script", script_path, "path to the .gft script")->required();
  run->add_flag("--oracle", options.oracle,
                "cross-check assertions numerically in the finite Grassmann algebra");
  run->add_option("--trials", options.trials, "oracle trials per assertion (default 200)");
  run->add_option("--seed", options.seed, "oracle random seed (default 0)");
  run->add_option("--report", report_path, "write the machine-readable JSON report here");
  run->add_flag("--fail-fast", options.fail_fast, "stop at the first failing statement");
  run->add_option("--order", order_text,
                  "series truncation override for limit_c, as a half-integer (e.g. -1/2)");
  run->add_flag("--timings", options.timings,
                "include per-assertion wall times in the JSON report (non-deterministic)");

  CLI11_PARSE(app, argc, argv);

  if (!order_text.empty()) {
    try {
      options.order_twice = parse_half_integer(order_text);
    } catch (const std::exception&) {
      std::cerr << "error: --order expects an integer or p/2 rational\n";
      return 2;
    }
  }

  std::ifstream in(script_path);
  if (!in) {
    std::cerr << "error: cannot open script '" << script_path << "'\n";
    return 2;
  }
  std::stringstream buffer;
  buffer << in.rdbuf();

  gft::script::Script script;
  try {
    script = gft::script::parse_script(buffer.str(),
                                       std::filesystem::path(script_path).stem().string());
  } catch (const gft::EngineError& err) {
    std::cerr << script_path << ": " << err.what() << "\n";
    return 2;
  }

  std::cout << "== " << script.name << "\n";
  gft::script::RunReport report;
  try {
    report = gft::script::run_script(script, options, &std::cout);
  } catch (const std::exception& err) {
    std::cerr << "engine failure: " << err.what() << "\n";
    return 3;
  }

  if (!report_path.empty()) {
    std::ofstream out(report_path);
    if (!out) {
      std::cerr << "error: cannot write report to '" << report_path << "'\n";
      return 3;
    }
    out << gft::script::report_to_json(report, options);
  }
  return report.exit_code;
}
