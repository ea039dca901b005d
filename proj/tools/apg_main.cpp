// Command-line front end: run, suite, predict and oracle subcommands.

#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "apg/harness.hpp"
#include "apg/mdp.hpp"
#include "apg/suites.hpp"

namespace {

using nlohmann::json;

/// Accepts a JSON array, "zeros", or a comma-separated list.
apg::PolicyParams parse_theta(const std::string& text, const apg::MdpSpec& spec) {
  apg::PolicyParams p = apg::PolicyParams::zeros(spec);
  if (text == "zeros" || text.empty()) return p;
  std::vector<double> values;
  if (text.front() == '[') {
    try {
      values = json::parse(text).get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw apg::Error(std::string("theta must be a JSON array of numbers: ") + e.what());
    }
  } else {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(item, &used));
        if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw apg::Error("cannot parse theta entry '" + item + "'");
      }
    }
  }
  if (values.size() != spec.dim()) {
    throw apg::Error("theta needs " + std::to_string(spec.dim()) + " entries, got " + std::to_string(values.size()));
  }
  return p.with_theta(Eigen::Map<const apg::Vector>(values.data(), static_cast<Eigen::Index>(values.size())));
}

void print_summary_line(const std::string& label, const json& band) {
  const auto show = [](const json& v) { return v.is_null() ? std::string("not reached") : v.dump(); };
  std::cout << label << ": median " << show(band.at("median")) << " (q20 " << show(band.at("q20")) << ", q80 "
            << show(band.at("q80")) << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Asynchronous distributed policy gradient on tabular MDPs (virtual-clock simulator)"};
  app.require_subcommand(1);

  std::string run_config;
  unsigned threads = 0;
  auto* run = app.add_subcommand("run", "Run an experiment from a JSON config");
  run->add_option("config", run_config, "Config file")->required()->check(CLI::ExistingFile);
  run->add_option("--threads", threads, "Worker threads for seeds (0 = all cores)");

  std::string suite_name;
  apg::SuiteOptions suite_opts;
  auto* suite = app.add_subcommand("suite", "Run a scripted experiment suite");
  suite->add_option("name", suite_name, "figure1 | heterogeneous | scaling")
      ->required()
      ->check(CLI::IsMember({"figure1", "heterogeneous", "scaling"}));
  suite->add_option("--out", suite_opts.out_dir, "Output root")->capture_default_str();
  suite->add_option("--seeds", suite_opts.seeds, "Seeds per configuration")->capture_default_str();
  suite->add_option("--master-seed", suite_opts.master_seed, "Seed the per-run seeds derive from")
      ->capture_default_str();
  suite->add_option("--threads", suite_opts.threads, "Worker threads (0 = all cores)");
  suite->add_flag("--quick", suite_opts.quick, "Coarse grids for a fast smoke run");

  std::string predict_config;
  bool predict_json = false;
  auto* predict = app.add_subcommand("predict", "Print predicted times for a config");
  predict->add_option("config", predict_config, "Config file")->required()->check(CLI::ExistingFile);
  predict->add_flag("--json", predict_json, "Emit JSON instead of a table");

  std::string oracle_mdp;
  std::string oracle_theta = "zeros";
  std::size_t oracle_horizon = 50;
  bool oracle_json = false;
  auto* oracle = app.add_subcommand("oracle", "Exact J, grad J and constants at a parameter vector");
  oracle->add_option("mdp", oracle_mdp, "\"benchmark\" or an MDP JSON file")->required();
  oracle->add_option("theta", oracle_theta, "JSON array, comma list, or \"zeros\"")->capture_default_str();
  oracle->add_option("--horizon", oracle_horizon, "Truncation horizon for J_H")->capture_default_str();
  oracle->add_flag("--json", oracle_json, "Emit JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const apg::RunConfig cfg = apg::load_config(run_config);
      const apg::ExperimentOutput out = apg::run_experiment(cfg, threads);
      std::cout << "wrote " << out.csv_paths.size() << " run(s) to " << out.directory << "\n";
      print_summary_line("time to target", out.summary.at("quantiles").at("time_to_target"));
      print_summary_line("final ||grad J||", out.summary.at("quantiles").at("final_grad_norm"));
      print_summary_line("final J", out.summary.at("quantiles").at("final_J"));
    } else if (*suite) {
      json result;
      if (suite_name == "figure1") {
        result = apg::suite_figure1(suite_opts);
        for (const auto& [regime, entry] : result.at("regimes").items()) {
          for (const auto& [method, m] : entry.at("methods").items()) {
            print_summary_line(regime + " / " + method, m.at("time_to_target"));
          }
        }
      } else if (suite_name == "heterogeneous") {
        result = apg::suite_heterogeneous(suite_opts);
        for (const auto& [method, m] : result.at("methods").items()) {
          std::cout << method << ": median final mixture J " << m.at("median_final_J").get<double>() << "\n";
        }
      } else {
        result = apg::suite_scaling(suite_opts);
        for (const auto& row : result.at("rows")) {
          std::cout << "n=" << row.at("n_agents").get<std::size_t>() << "  rennala round "
                    << row.at("rennala_round_mean").get<double>() << " (bound "
                    << row.at("rennala_bound").get<double>() << ")  malenia round "
                    << row.at("malenia_round_mean").get<double>() << " (bound "
                    << row.at("malenia_bound").get<double>() << ")\n";
        }
      }
      std::cout << "outputs under " << apg::resolve_output_dir(suite_opts.out_dir) << "/" << suite_name << "\n";
    } else if (*predict) {
      const json report = apg::predict_report(apg::load_config(predict_config));
      if (predict_json) {
        std::cout << report.dump(2) << "\n";
      } else {
        std::cout << apg::format_predict_table(report);
      }
    } else if (*oracle) {
      const apg::MdpSpec spec = apg::resolve_mdp(json(oracle_mdp)).spec;
      const json report = apg::oracle_report(spec, parse_theta(oracle_theta, spec), oracle_horizon);
      if (oracle_json) {
        std::cout << report.dump(2) << "\n";
      } else {
        std::cout << apg::format_oracle_report(report);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
