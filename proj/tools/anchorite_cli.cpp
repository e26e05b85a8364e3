// anchorite: scenario generation, cumulant estimation, proximity graphs and
// hop-distance localization from the command line.
//
// Exit codes: 0 success, 2 validation error, 3 runtime or data error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "anchorite/config.hpp"
#include "anchorite/pipeline.hpp"

namespace {

constexpr int kValidationError = 2;
constexpr int kRuntimeError = 3;

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  unsigned threads = 0;
  std::optional<std::uint64_t> seed;
};

anchorite::ScenarioConfig load_config(const CommonOptions& opt) {
  nlohmann::json j = nlohmann::json::object();
  if (!opt.config_path.empty()) {
    std::ifstream in(opt.config_path);
    if (!in) throw anchorite::InvalidArgument("config: cannot open " + opt.config_path);
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw anchorite::InvalidArgument(std::string("config: invalid JSON: ") + e.what());
    }
  }
  auto cfg = anchorite::config_from_json(j);
  if (opt.seed) cfg.seed = *opt.seed;
  if (!opt.out_dir.empty()) cfg.output_dir = opt.out_dir;
  return cfg;
}

void add_common(CLI::App* cmd, CommonOptions& opt, bool needs_config) {
  auto* c = cmd->add_option("--config", opt.config_path, "Scenario JSON file");
  if (needs_config) c->required();
  cmd->add_option("--out", opt.out_dir, "Output directory (overrides output_dir)");
  cmd->add_option("--threads", opt.threads, "Worker threads (0 = all cores)");
  cmd->add_option("--seed", opt.seed, "Seed override (unsigned 64-bit)");
}

void print_summary(const anchorite::ErrorSummary& s) {
  std::cout << "localized " << s.localized << ", unlocalized " << s.unlocalized << "\n"
            << "error mean " << s.mean << ", median " << s.median << ", p90 " << s.p90 << "\n"
            << "interior median " << s.interior_median << " (" << s.interior_count << " nodes), boundary median "
            << s.boundary_median << " (" << s.boundary_count << " nodes)\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Localization of communication-free sensor networks from background-field cumulants"};
  app.require_subcommand(1);

  CommonOptions opt;
  std::optional<std::size_t> fixed_node;
  bool no_lagged = false;
  anchorite::OracleOptions oracle;

  auto* generate = app.add_subcommand("generate", "Deploy sensors and record the field (sensors.csv, observations.bin)");
  auto* estimate = app.add_subcommand("estimate", "Pairwise cumulants from observations.bin (cumulants.csv)");
  auto* graph = app.add_subcommand("graph", "Cumulant top-k proximity graph (graph.csv)");
  auto* localize = app.add_subcommand("localize", "Hop distances and positions (hops.csv, positions.csv)");
  auto* pipeline = app.add_subcommand("pipeline", "generate + estimate + graph + localize");
  auto* scatter = app.add_subcommand("scatter", "Cumulant versus distance pairs (scatter.csv)");
  auto* oracle_cmd = app.add_subcommand("oracle", "Analytic and Monte Carlo covariance curve (covariance_curve.csv)");

  for (auto* cmd : {generate, estimate, graph, localize, pipeline, oracle_cmd}) add_common(cmd, opt, true);
  add_common(scatter, opt, false);
  scatter->add_option("--node", fixed_node, "Only pairs containing this node (fixed-node mode)");
  scatter->add_flag("--all-pairs", "All pairs (default)");
  scatter->add_flag("--no-lagged", no_lagged, "Use c2 even when lagged cumulants are present");
  oracle_cmd->add_option("--distances", oracle.distances, "Probe separations")->delimiter(',')->required();
  oracle_cmd->add_option("--samples", oracle.n_samples, "Monte Carlo samples per distance");
  oracle_cmd->add_flag("--empirical", oracle.empirical, "Add binned empirical cumulants from the output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kValidationError;
  }

  try {
    if (scatter->parsed()) {
      std::string dir = opt.out_dir;
      if (dir.empty()) dir = load_config(opt).output_dir;
      const auto rows = anchorite::run_scatter(dir, fixed_node, !no_lagged);
      std::cout << "wrote " << rows << " rows to " << (std::filesystem::path(dir) / anchorite::files::kScatter).string()
                << "\n";
      return 0;
    }
    const auto cfg = load_config(opt);
    const std::filesystem::path dir = cfg.output_dir;
    if (generate->parsed()) anchorite::run_generate(cfg, dir, opt.threads);
    if (estimate->parsed()) anchorite::run_estimate(cfg, dir, opt.threads);
    if (graph->parsed()) anchorite::run_graph(cfg, dir, opt.threads);
    if (localize->parsed()) print_summary(anchorite::run_localize(cfg, dir, opt.threads, &std::cerr));
    if (pipeline->parsed()) print_summary(anchorite::run_pipeline(cfg, dir, opt.threads, &std::cerr));
    if (oracle_cmd->parsed()) {
      const auto rows = anchorite::run_oracle(cfg, oracle, dir, opt.threads);
      for (const auto& r : rows) std::cout << r.source << ' ' << r.distance << ' ' << r.value << " +- " << r.std_error << "\n";
    }
  } catch (const anchorite::InvalidArgument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kValidationError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return 0;
}
