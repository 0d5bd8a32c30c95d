// Command-line front end: `run`, `loocv` and `verify-oracle`.
//
// Exit status: 0 success, 1 configuration error, 2 runtime error (including a
// failed oracle check).

#include <algorithm>
#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dnn/config_file.hpp"
#include "dnn/experiment.hpp"
#include "dnn/knn.hpp"
#include "dnn/oracle.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct RawOptions {
  std::string model = "dnn1";
  std::string method = "exchange";
  double epsilon = 1e-10;
  std::optional<double> beta_box_lo;
  std::optional<double> beta_box_hi;
};

dnn::WeightModel parse_model(const std::string& name, double epsilon) {
  const auto kind = dnn::parse_weight_kind(name);
  if (!kind) throw dnn::ConfigError("unknown model '" + name + "' (expected dnn1, dnn2 or dnn3)");
  return {*kind, epsilon};
}

// Options that may be given more than once keep the last value, so flags that
// follow the expanded config file override it.
CLI::App* add_command(CLI::App& app, const std::string& name, const std::string& help,
                      std::string& config_path) {
  CLI::App* sub = app.add_subcommand(name, help);
  sub->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  sub->add_option("--config", config_path, "Flat key=value config file; command-line flags win");
  return sub;
}

void add_data_options(CLI::App& app, dnn::ExperimentConfig& cfg) {
  app.add_option("--dataset", cfg.dataset, "CSV file with a header row")->required();
  app.add_option("--label-column", cfg.label_column,
                 "Label column name or 0-based index (default: last column)");
  app.add_option("--train-fraction", cfg.train_fraction, "Fraction of rows used for training");
  app.add_option("--train-index-file", cfg.train_index_file,
                 "Explicit training rows, one 0-based index per line");
  app.add_option("--test-index-file", cfg.test_index_file,
                 "Explicit test rows (default: all non-training rows)");
  app.add_option("--seed", cfg.seed, "Master seed for the split and all chains");
  app.add_option("--output-dir", cfg.output_dir, "Directory for result files");
  app.add_option("--k-max", cfg.k_max, "Largest k for LOOCV (default: half the training size)");
}

int run_command(const dnn::ExperimentConfig& cfg) {
  const auto result = dnn::run_experiment(cfg);
  std::cout << result.summary.dump(2) << "\n";
  return 0;
}

int loocv_command(dnn::ExperimentConfig cfg) {
  cfg.validate();
  std::filesystem::create_directories(cfg.output_dir);
  const dnn::PreparedData data = dnn::prepare_data(cfg);
  const dnn::LoocvReport r = dnn::run_knn(data, cfg.k_max);
  const std::filesystem::path out(cfg.output_dir);
  dnn::write_atomic(out / "loocv.csv", dnn::curve_csv("error", r.loocv.error_curve));
  dnn::write_atomic(out / "knn_test_error.csv", dnn::curve_csv("test_error", r.test_error));
  nlohmann::json j;
  j["k_selected"] = r.loocv.k_selected;
  j["loocv_error"] = r.loocv.error_curve;
  j["test_error"] = r.test_error;
  j["misclassification_rate"] = r.misclassification_rate;
  std::cout << j.dump(2) << "\n";
  return 0;
}

int oracle_command(const dnn::OracleConfig& cfg, const std::string& report_path) {
  const dnn::OracleReport r = dnn::verify_oracle(cfg);
  nlohmann::json j;
  j["sigma"] = r.sigma;
  j["grid"] = r.grid;
  j["exact_posterior"] = r.exact;
  j["exchange_posterior"] = r.exchange;
  j["pseudo_posterior"] = r.pseudo;
  j["tv_exchange"] = r.tv_exchange;
  j["tv_pseudolikelihood"] = r.tv_pseudo;
  j["tolerance"] = cfg.tolerance;
  j["acceptance_rate"] = r.acceptance_rate;
  j["exchange_passed"] = r.exchange_passed;
  j["importance_sampling"] = {{"beta", cfg.is_beta},
                              {"beta_prime", cfg.is_beta_prime},
                              {"draws", cfg.is_draws},
                              {"estimate", r.importance.mean},
                              {"std_error", r.importance.std_error},
                              {"exact", r.importance.exact},
                              {"passed", r.importance_passed}};
  j["passed"] = r.passed();
  const std::string text = j.dump(2) + "\n";
  if (!report_path.empty()) dnn::write_atomic(report_path, text);
  std::cout << text;
  std::cerr << "tv(exchange, exact) = " << r.tv_exchange << " (tolerance " << cfg.tolerance
            << "): " << (r.exchange_passed ? "PASS" : "FAIL") << "\n"
            << "importance-sampling identity: " << (r.importance_passed ? "PASS" : "FAIL")
            << "\n";
  return r.passed() ? 0 : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distance nearest-neighbour MRF classification"};
  app.require_subcommand(1);

  dnn::ExperimentConfig run_cfg;
  RawOptions run_raw;
  std::string config_path;  // consumed by expand_config_args before parsing
  CLI::App* run = add_command(app, "run", "Fit and evaluate classifiers on a dataset", config_path);
  add_data_options(*run, run_cfg);
  run->add_option("--model", run_raw.model, "dnn1 | dnn2 | dnn3");
  run->add_option("--epsilon", run_raw.epsilon, "dnn2 floor weight");
  run->add_option("--method", run_raw.method, "exchange | pseudolikelihood | knn | all");
  run->add_option("--beta-prior-sd", run_cfg.priors.beta_sd, "Normal prior sd for beta");
  run->add_option("--beta-prior-lower", run_raw.beta_box_lo, "Use a uniform beta prior: lower end");
  run->add_option("--beta-prior-upper", run_raw.beta_box_hi, "Use a uniform beta prior: upper end");
  run->add_option("--sigma-prior-upper", run_cfg.priors.sigma_upper, "Uniform prior bound for sigma");
  run->add_option("--beta-step", run_cfg.beta_step, "Random-walk sd for beta");
  run->add_option("--sigma-step", run_cfg.sigma_step,
                  "Random-walk sd for sigma (default: 0.1 x median training distance)");
  run->add_option("--iterations", run_cfg.iterations, "MCMC iterations including burn-in");
  run->add_option("--burnin", run_cfg.burnin, "Burn-in iterations");
  run->add_option("--aux-sweeps", run_cfg.aux_sweeps, "Gibbs sweeps per auxiliary draw");
  run->add_option("--thin", run_cfg.thin, "Thinning stride for predictive averages");
  run->add_option("--max-runtime", run_cfg.max_runtime, "Wall-clock budget in seconds");

  dnn::ExperimentConfig loocv_cfg;
  CLI::App* loocv =
      add_command(app, "loocv", "k-nn leave-one-out curve and test error per k", config_path);
  add_data_options(*loocv, loocv_cfg);

  dnn::OracleConfig oracle_cfg;
  std::string oracle_model = "dnn1";
  std::string oracle_report;
  CLI::App* oracle = add_command(app, "verify-oracle",
                                 "Compare samplers with exact enumeration on a small field",
                                 config_path);
  oracle->add_option("--n", oracle_cfg.n, "Number of sites");
  oracle->add_option("--classes", oracle_cfg.num_classes, "Number of classes");
  oracle->add_option("--model", oracle_model, "dnn1 | dnn2 | dnn3");
  oracle->add_option("--epsilon", oracle_cfg.model.epsilon, "dnn2 floor weight");
  oracle->add_option("--sigma", oracle_cfg.sigma, "Bandwidth (default: median distance)");
  oracle->add_option("--grid-min", oracle_cfg.grid_lo, "Lowest beta on the grid");
  oracle->add_option("--grid-max", oracle_cfg.grid_hi, "Highest beta on the grid");
  oracle->add_option("--grid-points", oracle_cfg.grid_points, "Number of grid points");
  oracle->add_option("--steps", oracle_cfg.steps, "Exchange sampler steps");
  oracle->add_option("--aux-sweeps", oracle_cfg.aux_sweeps, "Gibbs sweeps per auxiliary draw");
  oracle->add_option("--seed", oracle_cfg.seed, "Seed");
  oracle->add_option("--tolerance", oracle_cfg.tolerance, "Total-variation tolerance");
  oracle->add_option("--is-draws", oracle_cfg.is_draws, "Draws for the importance-sampling check");
  oracle->add_option("--report", oracle_report, "Also write the JSON report here");

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    const auto sub = std::find_if(args.begin(), args.end(),
                                  [](const std::string& a) { return !a.starts_with("-"); });
    if (sub != args.end()) {
      const std::vector<std::string> expanded = dnn::expand_config_args({sub + 1, args.end()});
      args.erase(sub + 1, args.end());
      args.insert(args.end(), expanded.begin(), expanded.end());
    }
  } catch (const dnn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run) {
      run_cfg.model = parse_model(run_raw.model, run_raw.epsilon);
      const auto method = dnn::parse_method(run_raw.method);
      if (!method) throw dnn::ConfigError("unknown method '" + run_raw.method + "'");
      run_cfg.method = *method;
      if (run_raw.beta_box_lo || run_raw.beta_box_hi) {
        if (!run_raw.beta_box_lo || !run_raw.beta_box_hi) {
          throw dnn::ConfigError("a uniform beta prior needs both --beta-prior-lower and --beta-prior-upper");
        }
        if (!(*run_raw.beta_box_lo < *run_raw.beta_box_hi)) {
          throw dnn::ConfigError("beta prior lower end must be below the upper end");
        }
        run_cfg.priors.beta_box = {{*run_raw.beta_box_lo, *run_raw.beta_box_hi}};
      }
      return run_command(run_cfg);
    }
    if (*loocv) return loocv_command(loocv_cfg);
    if (*oracle) {
      oracle_cfg.model = parse_model(oracle_model, oracle_cfg.model.epsilon);
      if (oracle_cfg.n < 2 || oracle_cfg.num_classes < 2) {
        throw dnn::ConfigError("need at least 2 sites and 2 classes");
      }
      return oracle_command(oracle_cfg, oracle_report);
    }
  } catch (const dnn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::length_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
