#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "stargraph/lab.hpp"

namespace lab = stargraph::lab;

namespace {

lab::Report run(const std::string& command, const lab::ExperimentConfig& cfg, const lab::RunOptions& opts) {
  if (command == "constants") return lab::cmd_constants(cfg);
  if (command == "spectrum") return lab::cmd_spectrum(cfg, opts);
  if (command == "converge") return lab::cmd_converge(cfg, opts);
  return lab::cmd_oracle(cfg, opts);
}

void print_summary(const std::string& label, const lab::Report& report, const std::filesystem::path& dir) {
  std::cout << label << report.command << ": " << report.rows.size() << " rows -> "
            << (dir / (report.command + ".csv")).string() << '\n';
  if (report.command == "oracle") {
    for (const auto& c : report.summary["checks"])
      std::cout << "  " << c["check"].get<std::string>() << ": error " << c["error"].dump() << " (tol "
                << c["tolerance"].dump() << ") " << (c["passed"].get<bool>() ? "pass" : "FAIL") << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rank-one vertex coupling experiments on star graphs"};
  app.require_subcommand(1, 1);

  std::optional<std::string> config_path;
  std::optional<std::string> out_dir;
  std::optional<int> quad_order;
  int parallel = 1;
  const std::pair<const char*, const char*> commands[] = {
      {"constants", "coupling constants and vertex boundary matrices"},
      {"spectrum", "eigenvalue of the limit and eps operators, with FD cross-check"},
      {"converge", "Hilbert-Schmidt and S-matrix distances over the eps ladder"},
      {"oracle", "finite-difference validation of eigenvalue, S-matrix and resolvent columns"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON experiment config (default: built-in V* bundle)");
    sub->add_option("--out", out_dir, "output directory (overrides STARGRAPH_OUT_DIR and output.dir)");
    sub->add_option("--quad-order", quad_order, "Gauss-Legendre order per panel")->check(CLI::Range(2, 512));
    sub->add_option("--parallel", parallel, "worker threads for per-epsilon work")->check(CLI::Range(1, 256));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    std::vector<std::pair<std::string, lab::ExperimentConfig>> runs;
    if (config_path) {
      runs.emplace_back("", lab::load_config(*config_path));
    } else {
      for (auto& [name, doc] : lab::default_bundle()) runs.emplace_back(name, lab::parse_config(doc));
    }
    bool passed = true;
    for (auto& [name, cfg] : runs) {
      if (quad_order) cfg.quad_order = *quad_order;
      std::filesystem::path dir = lab::resolve_output_dir(out_dir, cfg);
      if (!name.empty()) dir /= name;
      const lab::Report report = run(command, cfg, lab::RunOptions{parallel});
      lab::write_report(report, dir);
      print_summary(name.empty() ? "" : name + " ", report, dir);
      passed = passed && report.passed;
    }
    return passed ? 0 : 4;
  } catch (const stargraph::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return lab::exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
