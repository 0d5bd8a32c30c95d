#ifndef DNN_EXPERIMENT_HPP
#define DNN_EXPERIMENT_HPP

// End-to-end runs: load, split, standardize, fit, predict, and write the
// trace / prediction / LOOCV CSVs and a summary JSON into an output directory.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dnn/data_io.hpp"
#include "dnn/errors.hpp"
#include "dnn/inference.hpp"
#include "dnn/knn.hpp"
#include "dnn/prediction.hpp"
#include "dnn/weights.hpp"

namespace dnn {

enum class Method { exchange, pseudolikelihood, knn, all };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::exchange: return "exchange";
    case Method::pseudolikelihood: return "pseudolikelihood";
    case Method::knn: return "knn";
    case Method::all: return "all";
  }
  return "?";
}

inline std::optional<Method> parse_method(std::string_view s) {
  if (s == "exchange") return Method::exchange;
  if (s == "pseudolikelihood") return Method::pseudolikelihood;
  if (s == "knn") return Method::knn;
  if (s == "all") return Method::all;
  return std::nullopt;
}

struct ExperimentConfig {
  std::string dataset;
  std::string label_column;  // name or 0-based index; empty = last column
  WeightModel model{};
  double train_fraction = 0.25;
  std::string train_index_file;  // explicit split, one 0-based row index per line
  std::string test_index_file;   // optional; default is the complement of the train rows
  Priors priors{};
  double beta_step = 0.5;
  std::optional<double> sigma_step;  // default 0.1 x median training distance
  int iterations = 20'000;
  int burnin = 10'000;
  int aux_sweeps = 1'000;
  std::uint64_t seed = 1;
  Method method = Method::exchange;
  std::size_t thin = 10;  // predictive thinning stride; 1 = full trace
  std::optional<int> k_max;
  std::optional<double> max_runtime;  // seconds, shared by all chains of the run
  std::string output_dir = "dnn_out";

  void validate() const {
    if (dataset.empty()) throw ConfigError("no dataset given");
    if (!std::filesystem::exists(dataset)) throw ConfigError("dataset '" + dataset + "' not found");
    for (const auto& f : {train_index_file, test_index_file}) {
      if (!f.empty() && !std::filesystem::exists(f)) {
        throw ConfigError("index file '" + f + "' not found");
      }
    }
    if (!test_index_file.empty() && train_index_file.empty()) {
      throw ConfigError("a test index file needs a train index file");
    }
    if (train_index_file.empty() && !(train_fraction > 0.0 && train_fraction < 1.0)) {
      throw ConfigError("train fraction must lie in (0, 1)");
    }
    if (model.kind == WeightKind::dnn2 && !(model.epsilon > 0.0 && model.epsilon < 1.0)) {
      throw ConfigError("epsilon must lie in (0, 1)");
    }
    if (!(priors.beta_sd > 0.0)) throw ConfigError("beta prior sd must be positive");
    if (!(priors.sigma_upper > 0.0)) throw ConfigError("sigma prior upper bound must be positive");
    if (!(beta_step > 0.0)) throw ConfigError("beta step must be positive");
    if (sigma_step && !(*sigma_step > 0.0)) throw ConfigError("sigma step must be positive");
    if (!(iterations > burnin && burnin >= 0)) {
      throw ConfigError("need iterations > burnin >= 0");
    }
    if (aux_sweeps < 1) throw ConfigError("aux sweeps must be at least 1");
    if (thin < 1) throw ConfigError("thinning stride must be at least 1");
    if (k_max && *k_max < 1) throw ConfigError("k_max must be at least 1");
    if (max_runtime && !(*max_runtime > 0.0)) throw ConfigError("max runtime must be positive");
  }
};

inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["dataset"] = c.dataset;
  j["label_column"] = c.label_column;
  j["model"] = std::string(to_string(c.model.kind));
  j["epsilon"] = c.model.epsilon;
  j["train_fraction"] = c.train_fraction;
  j["train_index_file"] = c.train_index_file;
  j["test_index_file"] = c.test_index_file;
  j["beta_prior_sd"] = c.priors.beta_sd;
  j["sigma_prior_upper"] = c.priors.sigma_upper;
  j["beta_step"] = c.beta_step;
  j["sigma_step"] = c.sigma_step ? nlohmann::json(*c.sigma_step) : nlohmann::json(nullptr);
  j["iterations"] = c.iterations;
  j["burnin"] = c.burnin;
  j["aux_sweeps"] = c.aux_sweeps;
  j["seed"] = c.seed;
  j["method"] = std::string(to_string(c.method));
  j["thin"] = c.thin;
  j["k_max"] = c.k_max ? nlohmann::json(*c.k_max) : nlohmann::json(nullptr);
  j["max_runtime"] = c.max_runtime ? nlohmann::json(*c.max_runtime) : nlohmann::json(nullptr);
  j["output_dir"] = c.output_dir;
  return j;
}

/// Writes `content` to `path` through a temporary file and a rename, so a
/// reader never sees a partial file.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

namespace detail {

inline std::string format_double(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

inline std::vector<std::size_t> read_indices(const std::string& path, std::size_t n) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open index file '" + path + "'");
  std::vector<std::size_t> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty()) continue;
    const auto v = parse_index(t);
    if (!v || *v >= n) throw ConfigError("bad row index '" + std::string(t) + "' in " + path);
    out.push_back(*v);
  }
  return out;
}

}  // namespace detail

inline std::string trace_csv(const PosteriorTrace& trace) {
  std::ostringstream s;
  s << "iter,beta,sigma,accepted,log_q,burnin\n";
  for (const auto& r : trace.full_trace) {
    s << r.iter << ',' << detail::format_double(r.beta) << ',' << detail::format_double(r.sigma)
      << ',' << (r.accepted ? 1 : 0) << ',' << detail::format_double(r.log_q) << ','
      << (r.burnin ? 1 : 0) << '\n';
  }
  return s.str();
}

/// "test_index,true_label,predicted_label,p_1,...,p_G" with 1-based labels.
inline std::string predictions_csv(std::span<const std::size_t> test_rows,
                                   std::span<const int> truth, const Matrix<double>& probabilities,
                                   std::span<const int> predicted) {
  std::ostringstream s;
  s << "test_index,true_label,predicted_label";
  for (std::size_t g = 0; g < probabilities.cols(); ++g) s << ",p_" << g + 1;
  s << '\n';
  for (std::size_t q = 0; q < test_rows.size(); ++q) {
    s << test_rows[q] << ',' << truth[q] + 1 << ',' << predicted[q] + 1;
    for (double p : probabilities.row(q)) s << ',' << detail::format_double(p);
    s << '\n';
  }
  return s.str();
}

inline std::string curve_csv(std::string_view value_name, std::span<const double> curve) {
  std::ostringstream s;
  s << "k," << value_name << '\n';
  for (std::size_t k = 0; k < curve.size(); ++k) {
    s << k + 1 << ',' << detail::format_double(curve[k]) << '\n';
  }
  return s.str();
}

/// Dataset split into standardized training and test parts.
struct PreparedData {
  Dataset full;
  Split split;
  Dataset train;
  Dataset test;
};

inline PreparedData prepare_data(const ExperimentConfig& cfg) {
  PreparedData p;
  p.full = load_csv(cfg.dataset, cfg.label_column);
  if (!cfg.train_index_file.empty()) {
    p.split.train_indices = detail::read_indices(cfg.train_index_file, p.full.size());
    if (!cfg.test_index_file.empty()) {
      p.split.test_indices = detail::read_indices(cfg.test_index_file, p.full.size());
    } else {
      std::vector<bool> in_train(p.full.size(), false);
      for (auto i : p.split.train_indices) in_train[i] = true;
      for (std::size_t i = 0; i < p.full.size(); ++i) {
        if (!in_train[i]) p.split.test_indices.push_back(i);
      }
    }
    if (!covers_all_classes(p.full, p.split.train_indices)) {
      throw DataError("training rows do not cover every class");
    }
  } else {
    p.split = split_dataset(p.full, cfg.train_fraction, cfg.seed);
  }
  if (p.split.test_indices.empty()) throw DataError("empty test set");
  const Dataset scaled = standardize(p.full, p.split);
  p.train = subset(scaled, p.split.train_indices);
  p.test = subset(scaled, p.split.test_indices);
  return p;
}

struct LoocvReport {
  LoocvResult loocv;
  std::vector<double> test_error;  // per k
  double misclassification_rate = 0.0;  // at the selected k
  PredictiveResult predictions;         // vote fractions at the selected k
};

inline LoocvReport run_knn(const PreparedData& data, std::optional<int> k_max_opt) {
  const int n_train = static_cast<int>(data.train.size());
  int k_max = k_max_opt.value_or(default_k_max(data.train.size()));
  k_max = std::min(k_max, n_train - 1);
  LoocvReport r;
  r.loocv = loocv_select_k(data.train, k_max);
  const Matrix<double> dists = cross_distances(data.test.features, data.train);
  r.test_error = knn_error_curve(dists, data.test.labels, data.train, k_max);
  r.misclassification_rate = r.test_error[static_cast<std::size_t>(r.loocv.k_selected - 1)];

  const auto g = static_cast<std::size_t>(data.train.num_classes);
  r.predictions.probabilities = Matrix<double>(data.test.size(), g, 0.0);
  r.predictions.predicted_labels.resize(data.test.size());
  for (std::size_t q = 0; q < data.test.size(); ++q) {
    const auto order = detail::neighbour_order(dists.row(q), detail::kNone);
    auto row = r.predictions.probabilities.row(q);
    for (int k = 0; k < r.loocv.k_selected; ++k) {
      row[static_cast<std::size_t>(data.train.labels[order[static_cast<std::size_t>(k)]])] +=
          1.0 / r.loocv.k_selected;
    }
    r.predictions.predicted_labels[q] =
        detail::majority(order, data.train.labels, data.train.num_classes, r.loocv.k_selected);
  }
  return r;
}

struct ExperimentResult {
  nlohmann::json summary;
  std::optional<PosteriorTrace> exchange_trace;
  std::optional<PosteriorTrace> pseudo_trace;
};

/// Runs the configured methods and writes all artifacts into cfg.output_dir.
/// One seed drives the split and every chain (through named sub-streams).
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  cfg.validate();
  const std::filesystem::path out_dir(cfg.output_dir);
  std::filesystem::create_directories(out_dir);

  const PreparedData data = prepare_data(cfg);
  const DistanceMatrix dist = pairwise_distances(data.train);
  const LabelConfig y{data.train.labels, data.train.num_classes};
  const TrainingField field{y, dist, cfg.model};

  ExperimentResult result;
  nlohmann::json& summary = result.summary;
  summary["config"] = to_json(cfg);
  summary["seed"] = cfg.seed;
  summary["n_train"] = data.train.size();
  summary["n_test"] = data.test.size();
  summary["num_classes"] = data.full.num_classes;
  summary["class_names"] = data.full.class_names;
  summary["methods"] = nlohmann::json::object();

  const ProposalConfig proposal{cfg.beta_step,
                                cfg.sigma_step.value_or(default_proposal(dist).sigma_step)};
  summary["proposal"] = {{"beta_step", proposal.beta_step}, {"sigma_step", proposal.sigma_step}};

  auto remaining = [&]() -> std::optional<double> {
    if (!cfg.max_runtime) return std::nullopt;
    const double used = std::chrono::duration<double>(clock::now() - start).count();
    return std::max(0.0, *cfg.max_runtime - used);
  };

  auto run_mcmc = [&](std::string_view name, bool exchange) {
    ChainConfig chain{cfg.iterations, cfg.burnin, cfg.aux_sweeps, cfg.seed, std::nullopt,
                      remaining()};
    PosteriorTrace trace = exchange ? run_exchange(field, cfg.priors, proposal, chain)
                                    : run_pseudo_mh(field, cfg.priors, proposal, chain);
    write_atomic(out_dir / ("trace_" + std::string(name) + ".csv"), trace_csv(trace));
    nlohmann::json m;
    m["acceptance_rate"] = trace.acceptance_rate;
    m["iterations_completed"] = trace.full_trace.size();
    m["samples"] = trace.samples.size();
    m["truncated"] = trace.truncated;
    if (!trace.samples.empty()) {
      double mb = 0.0, ms = 0.0;
      for (const auto& s : trace.samples) {
        mb += s.beta;
        ms += s.sigma;
      }
      m["posterior_mean_beta"] = mb / static_cast<double>(trace.samples.size());
      m["posterior_mean_sigma"] = ms / static_cast<double>(trace.samples.size());
      const PredictiveResult pred =
          predict_ergodic(data.test.features, data.train, cfg.model, trace, cfg.thin);
      m["misclassification_rate"] = misclassification_rate(pred.predicted_labels, data.test.labels);
      m["predictive_samples"] = pred.samples_used;
      write_atomic(out_dir / ("predictions_" + std::string(name) + ".csv"),
                   predictions_csv(data.split.test_indices, data.test.labels, pred.probabilities,
                                   pred.predicted_labels));
    } else {
      m["misclassification_rate"] = nullptr;
    }
    summary["methods"][std::string(name)] = m;
    return trace;
  };

  const bool all = cfg.method == Method::all;
  if (all || cfg.method == Method::exchange) result.exchange_trace = run_mcmc("exchange", true);
  if (all || cfg.method == Method::pseudolikelihood) {
    result.pseudo_trace = run_mcmc("pseudolikelihood", false);
  }
  if (all || cfg.method == Method::knn) {
    const LoocvReport knn = run_knn(data, cfg.k_max);
    write_atomic(out_dir / "loocv.csv", curve_csv("error", knn.loocv.error_curve));
    write_atomic(out_dir / "knn_test_error.csv", curve_csv("test_error", knn.test_error));
    write_atomic(out_dir / "predictions_knn.csv",
                 predictions_csv(data.split.test_indices, data.test.labels,
                                 knn.predictions.probabilities, knn.predictions.predicted_labels));
    summary["methods"]["knn"] = {{"k_selected", knn.loocv.k_selected},
                                 {"k_max", knn.loocv.error_curve.size()},
                                 {"loocv_error", knn.loocv.error_curve[static_cast<std::size_t>(
                                                     knn.loocv.k_selected - 1)]},
                                 {"misclassification_rate", knn.misclassification_rate}};
  }

  summary["wall_clock_seconds"] = std::chrono::duration<double>(clock::now() - start).count();
  write_atomic(out_dir / "summary.json", summary.dump(2) + "\n");
  return result;
}

}  // namespace dnn

#endif  // DNN_EXPERIMENT_HPP
