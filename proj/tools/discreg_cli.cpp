#include <cstdio>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"

#include "discreg/env_gen.hpp"
#include "discreg/harness.hpp"
#include "discreg/verify.hpp"

namespace fs = std::filesystem;
using namespace discreg;

namespace {

GridSpec parse_grid(const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos) throw CLI::ValidationError("--grid", "expected WxH, e.g. 4x4");
  GridSpec spec;
  spec.width = std::stoul(text.substr(0, x));
  spec.height = std::stoul(text.substr(x + 1));
  spec.validate();
  return spec;
}

int report_failure(const std::exception& e) {
  if (const auto* sweep = dynamic_cast<const SweepError*>(&e)) {
    std::cerr << "error: " << sweep->what() << "\n"
              << "replay: secondary=" << sweep->secondary() << " sweep=" << sweep->sweep()
              << " seed=" << sweep->seed() << "\n";
    return 2;
  }
  std::cerr << "error: " << e.what() << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discount regularization laboratory for tabular policy evaluation"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "write random GridWorld MDPs as JSON");
  std::uint64_t gen_seed = 0;
  std::string grid_text = "4x4", gen_dir = "mdps";
  std::size_t gen_count = 1;
  gen->add_option("--seed", gen_seed);
  gen->add_option("--grid", grid_text, "grid size WxH");
  gen->add_option("--count", gen_count)->check(CLI::PositiveNumber);
  gen->add_option("--out-dir", gen_dir);

  auto* sweep = app.add_subcommand("sweep", "run a sweep config");
  std::string config_path, sweep_out = "sweep.csv";
  sweep->add_option("--config", config_path)->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", sweep_out, "CSV output path");

  auto* figure = app.add_subcommand("figure", "reproduce a figure preset");
  std::string figure_name, figure_dir = ".";
  std::optional<std::size_t> figure_instances;
  std::optional<std::uint64_t> figure_seed;
  figure->add_option("name", figure_name)->required()->check(CLI::IsMember(figure_names()));
  figure->add_option("--instances", figure_instances)->check(CLI::PositiveNumber);
  figure->add_option("--seed", figure_seed);
  figure->add_option("--out-dir", figure_dir);

  auto* verify = app.add_subcommand("verify", "numerical identity checks");
  std::string verify_what;
  EquivalenceSettings eq;
  verify->add_option("suite", verify_what)->required()->check(CLI::IsMember({"equivalences"}));
  verify->add_option("--trials", eq.trials)->check(CLI::PositiveNumber);
  verify->add_option("--seed", eq.seed);

  auto* plot = app.add_subcommand("plot", "render a sweep CSV as SVG");
  std::string plot_csv, plot_out;
  plot->add_option("csv", plot_csv)->required()->check(CLI::ExistingFile);
  plot->add_option("--out", plot_out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const GridSpec grid = parse_grid(grid_text);
      fs::create_directories(gen_dir);
      for (std::size_t i = 0; i < gen_count; ++i) {
        Rng rng(combine_seed({gen_seed, i}));
        const auto path = fs::path(gen_dir) / ("mdp_" + std::to_string(i) + ".json");
        save_mdp(gridworld(grid, rng), path.string());
        std::cout << path.string() << "\n";
      }
    } else if (*sweep) {
      const SweepResult result = run_sweep(load_sweep_spec(config_path));
      emit_csv(result, sweep_out);
      if (result.total_attempts > 0) {
        std::cerr << "augmentation rejections: " << result.rejected_attempts << "/"
                  << result.total_attempts << "\n";
      }
    } else if (*figure) {
      SweepSpec spec = figure_preset(figure_name);
      if (figure_instances) spec.n_instances = *figure_instances;
      if (figure_seed) spec.master_seed = *figure_seed;
      fs::create_directories(figure_dir);
      const SweepResult result = run_sweep(spec);
      const auto base = fs::path(figure_dir) / figure_name;
      emit_csv(result, base.string() + ".csv");
      emit_svg(result, base.string() + ".svg", figure_name);
      std::cout << base.string() << ".csv\n" << base.string() << ".svg\n";
    } else if (*verify) {
      const EquivalenceReport r = run_equivalence_suite(eq);
      constexpr double kTol = 1e-9;
      const struct {
        const char* name;
        double value;
        bool ok;
      } checks[] = {
          {"prop1 td0", r.prop1, r.prop1 < kTol},
          {"prop2 expected_sarsa", r.prop2_expected_sarsa, r.prop2_expected_sarsa < kTol},
          {"prop2 sarsa", r.prop2_sarsa, r.prop2_sarsa < kTol},
          {"prop3 m_step", r.prop3, r.prop3 < kTol},
          {"lstd decomposition", r.lstd_decomposition, r.lstd_decomposition < 1e-12},
          {"negative control", r.negative_control, r.negative_control > 1e-4},
      };
      bool all = true;
      for (const auto& c : checks) {
        std::printf("%-22s %-4s %.3e\n", c.name, c.ok ? "ok" : "FAIL", c.value);
        all = all && c.ok;
      }
      std::printf("%zu trials\n", r.trials);
      return all ? 0 : 1;
    } else if (*plot) {
      emit_svg(load_result_csv(plot_csv), plot_out, fs::path(plot_csv).stem().string());
    }
  } catch (const std::exception& e) {
    return report_failure(e);
  }
  return 0;
}
