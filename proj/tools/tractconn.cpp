// tractconn: streamline classification and connectome analysis from the
// command line. Exit status 1 on processing errors, 2 on usage errors.

#include <exception>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "tractconn/cli/commands.hpp"

namespace {

using namespace tractconn;
namespace fs = std::filesystem;

struct Globals {
  std::size_t threads = cli::default_threads();
  std::uint64_t seed = 0;
  std::string hardware_note;
};

void add_synth(CLI::App& app, Globals& g, cli::SynthOptions& o, std::function<void()>& action) {
  auto* cmd = app.add_subcommand("synth", "Generate a synthetic labelled cohort");
  auto& c = o.config;
  cmd->add_option("--out", o.out, "Output directory")->required();
  cmd->add_option("--subjects", c.n_subjects, "Number of subjects")->capture_default_str();
  cmd->add_option("--coarse", c.n_coarse, "Coarse region count")->capture_default_str();
  cmd->add_option("--split-factor", c.split_factor, "Fine regions per coarse region")->capture_default_str();
  cmd->add_option("--streamlines", c.n_streamlines, "Streamlines per subject")->capture_default_str();
  cmd->add_option("--noise", c.noise_sigma, "Point jitter sigma (mm)")->capture_default_str();
  cmd->add_option("--curvature", c.curvature, "Mid control point scale (mm)")->capture_default_str();
  cmd->add_option("--unknown", c.unknown_fraction, "Fraction of truncated streamlines")->capture_default_str();
  cmd->add_option("--sessions", o.sessions, "Sessions per subject")->capture_default_str();
  cmd->callback([&] {
    action = [&] {
      c.rng_seed = g.seed;
      o.threads = g.threads;
      cli::cmd_synth(o, std::cerr);
    };
  });
}

void add_train(CLI::App& app, Globals& g, cli::TrainOptions& o, std::function<void()>& action) {
  auto* cmd = app.add_subcommand("train", "Train a multi-task model on a cohort manifest");
  auto& t = o.training;
  cmd->add_option("--manifest", o.manifest, "Cohort manifest")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "Checkpoint path")->required();
  cmd->add_option("--log", o.log_csv, "Training log CSV");
  cmd->add_option("--schemes", o.schemes, "Scheme names, one head each")->delimiter(',')->capture_default_str();
  cmd->add_option("--session", o.session, "Session to train on")->capture_default_str();
  cmd->add_option("--cap", o.cap, "Streamlines sampled per subject (0 = all)")->capture_default_str();
  cmd->add_option("--points", o.arch.input_points, "Resampled points per streamline")->capture_default_str();
  cmd->add_option("--point-widths", o.arch.point_widths, "Per-point layer widths")->delimiter(',')->capture_default_str();
  cmd->add_option("--trunk-widths", o.arch.trunk_widths, "Shared trunk widths")->delimiter(',')->capture_default_str();
  cmd->add_option("--epochs", t.epochs, "Training epochs")->capture_default_str();
  cmd->add_option("--batch", t.batch_size, "Mini-batch size")->capture_default_str();
  cmd->add_option("--lr", t.learning_rate, "Adam learning rate")->capture_default_str();
  cmd->add_option("--task-weights", t.task_loss_weights, "Loss weight per head")->delimiter(',');
  cmd->add_option("--flip-prob", t.flip_augment_prob, "Streamline flip probability")->capture_default_str();
  cmd->callback([&] {
    action = [&] {
      t.rng_seed = g.seed;
      t.threads = g.threads;
      cli::cmd_train(o, std::cerr);
    };
  });
}

void add_predict(CLI::App& app, Globals& g, cli::PredictCliOptions& o, std::function<void()>& action) {
  auto* cmd = app.add_subcommand("predict", "Classify the streamlines of a tractogram");
  cmd->add_option("--model", o.model, "Checkpoint")->required()->check(CLI::ExistingFile);
  cmd->add_option("--tracks", o.tracks, "Input .tck")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out_dir, "Output directory")->required();
  cmd->add_option("--names", o.names, "Class file name per head")->delimiter(',')->capture_default_str();
  cmd->add_option("--batch", o.predict.batch_size, "Inference batch size")->capture_default_str();
  cmd->callback([&] {
    action = [&] {
      o.predict.threads = g.threads;
      o.hardware_note = g.hardware_note;
      cli::cmd_predict(o, std::cerr);
    };
  });
}

void add_connectome(CLI::App& app, cli::ConnectomeOptions& o, std::function<void()>& action) {
  auto* cmd = app.add_subcommand("connectome", "Build a connectome or a difference map");
  cmd->add_option("--scheme", o.scheme, "Scheme file")->check(CLI::ExistingFile);
  auto* classes = cmd->add_option("--classes", o.classes, "Class label file")->check(CLI::ExistingFile);
  auto* assign = cmd->add_option("--assignments", o.assignments, "Node pair file")->check(CLI::ExistingFile);
  auto* trad = cmd->add_option("--diff-traditional", o.diff_traditional, "Traditional matrix CSV")
                   ->check(CLI::ExistingFile);
  auto* pred = cmd->add_option("--diff-predicted", o.diff_predicted, "Predicted matrix CSV")->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "Output CSV")->required();
  classes->excludes(assign)->excludes(trad)->excludes(pred);
  assign->excludes(trad)->excludes(pred);
  trad->needs(pred);
  pred->needs(trad);
  cmd->callback([&] { action = [&] { cli::cmd_connectome(o, std::cerr); }; });
}

void add_compare(CLI::App& app, cli::CompareOptions& o, std::function<void()>& action) {
  auto* cmd = app.add_subcommand("compare", "Similarity, intra/inter-subject or test-retest analysis");
  std::map<std::string, cli::CompareMode> modes{{"similarity", cli::CompareMode::Similarity},
                                                {"intra-inter", cli::CompareMode::IntraInter},
                                                {"test-retest", cli::CompareMode::TestRetest}};
  cmd->add_option("--mode", o.mode, "similarity | intra-inter | test-retest")
      ->required()
      ->transform(CLI::CheckedTransformer(modes, CLI::ignore_case));
  cmd->add_option("--a", o.a, "First matrix (similarity)")->check(CLI::ExistingFile);
  cmd->add_option("--b", o.b, "Second matrix (similarity)")->check(CLI::ExistingFile);
  cmd->add_option("--pairs", o.pairs, "List of 'subject first.csv second.csv'")->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "Output CSV")->required();
  cmd->add_option("--summary", o.summary, "Summary table");
  cmd->add_option("--shift-epsilon", o.shift_epsilon, "LERM diagonal shift margin")->capture_default_str();
  cmd->callback([&, cmd] {
    if (o.mode == cli::CompareMode::Similarity && (o.a.empty() || o.b.empty()))
      throw CLI::ValidationError("--a and --b", "similarity mode needs --a and --b");
    if (o.mode != cli::CompareMode::Similarity && o.pairs.empty())
      throw CLI::ValidationError("--pairs", "this mode needs --pairs");
    (void)cmd;
    action = [&] { cli::cmd_compare(o, std::cerr); };
  });
}

void add_netmetrics(CLI::App& app, Globals& g, cli::NetmetricsOptions& o, std::vector<std::string>& lists,
                    std::function<void()>& action) {
  auto* cmd = app.add_subcommand("netmetrics", "Correlate network measures of traditional and predicted connectomes");
  cmd->add_option("--scheme", lists, "name=list.txt with lines 'subject traditional.csv predicted.csv'")->required();
  cmd->add_option("--out", o.out, "Report CSV")->required();
  cmd->add_flag("--binary-assortativity", o.binary_assortativity, "Use binary degree for assortativity");
  cmd->callback([&] {
    o.schemes.clear();
    for (const auto& item : lists) {
      const auto eq = item.find('=');
      if (eq == std::string::npos || eq == 0)
        throw CLI::ValidationError("--scheme", "expected name=path, got '" + item + "'");
      o.schemes.emplace_back(item.substr(0, eq), item.substr(eq + 1));
    }
    action = [&] {
      o.seed = g.seed;
      cli::cmd_netmetrics(o, std::cerr);
    };
  });
}

void add_benchmark(CLI::App& app, Globals& g, cli::BenchmarkOptions& o, std::function<void()>& action) {
  auto* cmd = app.add_subcommand("benchmark", "Time batched inference on a tractogram");
  cmd->add_option("--model", o.model, "Checkpoint")->required()->check(CLI::ExistingFile);
  cmd->add_option("--tracks", o.tracks, "Input .tck")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "Report file");
  cmd->add_option("--batch", o.predict.batch_size, "Inference batch size")->capture_default_str();
  cmd->add_option("--repeats", o.repeats, "Timed repetitions")->capture_default_str();
  cmd->callback([&] {
    action = [&] {
      o.predict.threads = g.threads;
      o.hardware_note = g.hardware_note;
      cli::cmd_benchmark(o, std::cerr);
    };
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streamline classification and structural connectome analysis"};
  app.set_config("--config", "", "TOML/INI file of option defaults; command-line flags take precedence");
  app.require_subcommand(1);

  Globals g;
  app.add_option("--threads", g.threads, "Worker threads (1 is bit-deterministic)")->capture_default_str();
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--hardware-note", g.hardware_note, "Hardware description recorded with timings");

  std::function<void()> action;
  cli::SynthOptions synth;
  cli::TrainOptions train;
  cli::PredictCliOptions predict;
  cli::ConnectomeOptions connectome;
  cli::CompareOptions compare;
  cli::NetmetricsOptions netmetrics;
  std::vector<std::string> netmetric_lists;
  cli::BenchmarkOptions benchmark;
  add_synth(app, g, synth, action);
  add_train(app, g, train, action);
  add_predict(app, g, predict, action);
  add_connectome(app, connectome, action);
  add_compare(app, compare, action);
  add_netmetrics(app, g, netmetrics, netmetric_lists, action);
  add_benchmark(app, g, benchmark, action);

  try {
    app.parse(argc, argv);
    if (g.threads == 0) throw CLI::ValidationError("--threads", "must be >= 1");
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (action) action();
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
