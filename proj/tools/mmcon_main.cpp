// Command-line front end: dataset generation, training, evaluation,
// cross-validation and the two self-verification commands.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mmcon/config.hpp"
#include "mmcon/data.hpp"
#include "mmcon/experiment.hpp"
#include "mmcon/textio.hpp"
#include "mmcon/verify.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::vector<std::string> overrides;
  std::string loss;
  std::string margin_mode;
  std::string denominator;
  long long seed = -1;
  int k = -1;
  int jobs = 1;
};

void add_config_options(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "key=value config file");
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--seed", args.seed, "override the rng seed");
  cmd->add_option("--loss", args.loss, "loss kind: supcon|margincon|mmcon");
  cmd->add_option("--margin-mode", args.margin_mode, "literal|positive-only");
  cmd->add_option("--denominator", args.denominator, "negatives-only|all");
  cmd->add_option("overrides", args.overrides, "dotted key=value overrides");
}

// Precedence: config file < positional key=value overrides < named flags.
mmcon::KeyValueConfig resolve_config(const CommonArgs& args) {
  mmcon::KeyValueConfig kv;
  if (!args.config_path.empty()) kv = mmcon::KeyValueConfig::from_file(args.config_path);
  for (const std::string& o : args.overrides) mmcon::apply_override(kv, o);
  if (!args.loss.empty()) kv.set("train.loss_kind", args.loss);
  if (!args.margin_mode.empty()) kv.set("loss.margin_mode", args.margin_mode);
  if (!args.denominator.empty()) kv.set("loss.denominator_mode", args.denominator);
  if (args.k > 0) kv.set("train.k_folds", std::to_string(args.k));
  if (args.seed >= 0) {
    kv.set("train.rng_seed", std::to_string(args.seed));
    kv.set("data.rng_seed", std::to_string(args.seed));
  }
  mmcon::validate_known_keys(kv);
  return kv;
}

void echo_effective_config(const mmcon::KeyValueConfig& kv, const std::string& out_dir) {
  fs::create_directories(out_dir);
  std::ofstream out(out_dir + "/config.effective");
  if (!out) throw mmcon::IoError("cannot write " + out_dir + "/config.effective");
  out << mmcon::effective_config_string(kv);
}

mmcon::Dataset load_or_generate(const mmcon::KeyValueConfig& kv) {
  const std::string path = kv.get_string("data.path", "");
  if (!path.empty()) return mmcon::read_dataset(path);
  return mmcon::generate_synthetic(mmcon::synthetic_config_from(kv));
}

int run_gen_data(const CommonArgs& args) {
  const mmcon::KeyValueConfig kv = resolve_config(args);
  const mmcon::SyntheticConfig sc = mmcon::synthetic_config_from(kv);
  const mmcon::Dataset ds = mmcon::generate_synthetic(sc);
  echo_effective_config(kv, args.out_dir);
  const std::string path = args.out_dir + "/dataset.csv";
  mmcon::write_dataset(ds, path);
  std::cout << "wrote " << ds.samples.size() * static_cast<size_t>(ds.n_views()) << " rows ("
            << ds.samples.size() << " patients x " << ds.n_views() << " views) to " << path
            << "\n";
  return 0;
}

int run_train(const CommonArgs& args) {
  const mmcon::KeyValueConfig kv = resolve_config(args);
  const mmcon::Dataset ds = load_or_generate(kv);
  const mmcon::TrainConfig tc = mmcon::train_config_from(kv);
  echo_effective_config(kv, args.out_dir);

  const mmcon::FoldTrainResult result = mmcon::train_fold(ds.samples, tc);
  mmcon::save_checkpoint(result.model, args.out_dir + "/checkpoint.txt");
  mmcon::write_loss_curve(result.epoch_mean_loss, args.out_dir + "/loss_curve.csv");
  std::cout << "trained " << mmcon::to_string(tc.loss_kind) << " for " << tc.epochs
            << " epochs; first/last epoch loss " << mmcon::fmt_g17(result.epoch_mean_loss.front())
            << " / " << mmcon::fmt_g17(result.epoch_mean_loss.back()) << "\n";
  return 0;
}

int run_eval(const CommonArgs& args) {
  const mmcon::KeyValueConfig kv = resolve_config(args);
  const std::string checkpoint = kv.get_string("eval.checkpoint", "");
  if (checkpoint.empty()) throw mmcon::InvalidConfig("eval requires eval.checkpoint=<path>");
  const mmcon::TrainedModel model = mmcon::load_checkpoint(checkpoint);

  const mmcon::Dataset train_ds = load_or_generate(kv);
  const std::string test_path = kv.get_string("eval.test_path", "");
  const mmcon::Dataset test_ds = test_path.empty() ? train_ds : mmcon::read_dataset(test_path);
  const mmcon::TrainConfig tc = mmcon::train_config_from(kv);
  echo_effective_config(kv, args.out_dir);

  const mmcon::FoldMetrics fm = mmcon::evaluate_fold_metrics(
      model, train_ds.samples, test_ds.samples, tc.policy, tc.classifier);
  std::ofstream out(args.out_dir + "/metrics.csv");
  if (!out) throw mmcon::IoError("cannot write " + args.out_dir + "/metrics.csv");
  out << "accuracy,precision,recall,f1,alignment,uniformity\n"
      << mmcon::fmt_g17(fm.cls.accuracy) << ',' << mmcon::fmt_g17(fm.cls.precision) << ','
      << mmcon::fmt_g17(fm.cls.recall) << ',' << mmcon::fmt_g17(fm.cls.f1) << ','
      << mmcon::fmt_g17(fm.alignment) << ',' << mmcon::fmt_g17(fm.uniformity) << "\n";
  std::cout << "accuracy " << mmcon::fmt_g17(fm.cls.accuracy) << " on " << fm.counts.total()
            << " patients\n";
  return 0;
}

int run_cross_validate(const CommonArgs& args) {
  const mmcon::KeyValueConfig kv = resolve_config(args);
  const mmcon::Dataset ds = load_or_generate(kv);
  const mmcon::TrainConfig tc = mmcon::train_config_from(kv);
  echo_effective_config(kv, args.out_dir);

  const mmcon::CrossValReport report = mmcon::cross_validate(ds, tc, args.jobs);
  mmcon::write_metrics_csv(report, args.out_dir + "/metrics.csv");
  const mmcon::FoldAssignment folds =
      mmcon::kfold_split(ds, tc.k_folds, tc.rng_seed, tc.stratified_folds);
  mmcon::write_fold_assignment(ds, folds, args.out_dir + "/folds.csv");
  std::cout << "k=" << tc.k_folds << " mean accuracy " << mmcon::fmt_g17(report.mean.accuracy)
            << ", pooled accuracy " << mmcon::fmt_g17(report.pooled.accuracy) << "\n";
  return 0;
}

int run_gradcheck(std::uint64_t seed, int trials, double step) {
  const mmcon::CompositionGradCheckResult res =
      mmcon::run_composition_gradient_check(seed, trials, step);
  std::cout << "gradcheck: max relative error " << mmcon::fmt_g17(res.max_relative_error)
            << " over " << res.configs << " configurations (" << mmcon::fmt_g17(res.seconds)
            << " s)\n";
  if (res.max_relative_error > 1e-5) {
    std::cerr << "error: gradient check exceeded tolerance 1e-5\n";
    return 2;
  }
  return 0;
}

int run_oracle_check(std::uint64_t seed, int trials) {
  const mmcon::OracleCheckResult res = mmcon::run_loss_oracle_check(seed, trials);
  std::cout << "oracle-check: max |optimized - naive| " << mmcon::fmt_g17(res.max_abs_diff)
            << " over " << res.batches << " batches / " << res.comparisons << " comparisons ("
            << mmcon::fmt_g17(res.seconds) << " s)\n";
  if (res.max_abs_diff > 1e-10) {
    std::cerr << "error: oracle check exceeded tolerance 1e-10\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mmcon: multi-view margin contrastive learning toolkit"};
  app.require_subcommand(1);

  CommonArgs gen_args, train_args, eval_args, cv_args;
  long long check_seed = 0;
  int gradcheck_trials = 21;
  double gradcheck_step = 1e-5;
  int oracle_trials = 100;

  CLI::App* gen = app.add_subcommand("gen-data", "generate a synthetic multi-view dataset");
  add_config_options(gen, gen_args);

  CLI::App* train = app.add_subcommand("train", "train an encoder on a full dataset");
  add_config_options(train, train_args);

  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  add_config_options(eval, eval_args);

  CLI::App* cv = app.add_subcommand("cross-validate", "k-fold training and evaluation");
  add_config_options(cv, cv_args);
  cv->add_option("--k", cv_args.k, "number of folds");
  cv->add_option("--jobs", cv_args.jobs, "parallel fold workers");

  CLI::App* gradcheck =
      app.add_subcommand("gradcheck", "finite-difference check of the loss-through-encoder gradients");
  gradcheck->add_option("--seed", check_seed, "rng seed");
  gradcheck->add_option("--trials", gradcheck_trials, "number of random configurations");
  gradcheck->add_option("--step", gradcheck_step, "finite-difference step");

  CLI::App* oracle = app.add_subcommand("oracle-check", "optimized losses vs naive references");
  oracle->add_option("--seed", check_seed, "rng seed");
  oracle->add_option("--trials", oracle_trials, "number of random batches");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) return run_gen_data(gen_args);
    if (train->parsed()) return run_train(train_args);
    if (eval->parsed()) return run_eval(eval_args);
    if (cv->parsed()) return run_cross_validate(cv_args);
    if (gradcheck->parsed())
      return run_gradcheck(static_cast<std::uint64_t>(check_seed), gradcheck_trials, gradcheck_step);
    if (oracle->parsed())
      return run_oracle_check(static_cast<std::uint64_t>(check_seed), oracle_trials);
  } catch (const mmcon::NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const mmcon::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
