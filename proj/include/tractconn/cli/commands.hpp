#pragma once

// Subcommand implementations. Each takes a plain options struct so the tool
// and the tests share one code path. Results go to files only; progress goes
// to the supplied stream.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "tractconn/connectome.hpp"
#include "tractconn/error.hpp"
#include "tractconn/graph/report.hpp"
#include "tractconn/io/bytes.hpp"
#include "tractconn/io/checkpoint.hpp"
#include "tractconn/io/manifest.hpp"
#include "tractconn/io/tck.hpp"
#include "tractconn/io/text.hpp"
#include "tractconn/label_codec.hpp"
#include "tractconn/net/predict.hpp"
#include "tractconn/net/train.hpp"
#include "tractconn/stats/reports.hpp"
#include "tractconn/stats/similarity.hpp"
#include "tractconn/synth.hpp"

namespace tractconn::cli {

namespace fs = std::filesystem;

inline std::size_t default_threads() {
  const auto n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

inline void require_file(const fs::path& p) {
  require(fs::is_regular_file(p), Errc::Io, "input file not found: " + p.string());
}

inline ParcellationScheme load_scheme(const fs::path& p) {
  require_file(p);
  return parse_scheme(io::read_file(p), p.stem().string());
}

// Lines of whitespace-separated columns; '#' comments and blank lines ignored.
inline std::vector<std::vector<std::string>> read_table(const fs::path& p, std::size_t columns) {
  require_file(p);
  std::vector<std::vector<std::string>> rows;
  const auto text = io::read_file(p);
  io::detail::for_each_line(text, [&](std::string_view line, std::size_t no) {
    if (io::detail::skippable(line)) return;
    const auto parts = io::detail::split_ws(line);
    if (parts.size() != columns)
      fail(Errc::ParseError, p.string() + " line " + std::to_string(no) + ": expected " + std::to_string(columns) + " columns");
    rows.emplace_back(parts.begin(), parts.end());
  });
  require(!rows.empty(), Errc::EmptyInput, p.string() + " lists nothing");
  return rows;
}

// Relative paths in list files resolve against the list file's directory.
inline fs::path resolve(const fs::path& list_file, const std::string& entry) {
  const fs::path p(entry);
  return p.is_absolute() ? p : list_file.parent_path() / p;
}

inline CountMatrix load_matrix(const fs::path& p) {
  require_file(p);
  return io::read_matrix_csv(io::read_file(p));
}

// ---------------------------------------------------------------- synth

struct SynthOptions {
  synth::SynthConfig config;
  fs::path out;
  std::uint32_t sessions = 1;
  std::size_t threads = 1;
};

inline io::Manifest cmd_synth(const SynthOptions& o, std::ostream& log) {
  log << "generating " << o.config.n_subjects << " subjects x " << o.sessions << " session(s) in " << o.out.string()
      << "\n";
  return synth::generate_cohort(o.config, o.out, o.sessions, o.threads,
                                [&](const std::string& what) { log << "  " << what << "\n"; });
}

// ---------------------------------------------------------------- train

struct TrainOptions {
  fs::path manifest;
  fs::path out;                 // checkpoint
  fs::path log_csv;             // optional training log
  std::vector<std::string> schemes{"coarse", "fine"};
  std::uint32_t session = 1;
  std::size_t cap = 10000;      // streamlines sampled per training subject, 0 = all
  net::Architecture arch;       // head_classes is filled from the schemes
  net::TrainingConfig training;
  geometry::Bounds bounds = geometry::Bounds::mni152();
};

struct CohortTask {
  std::vector<ParcellationScheme> schemes;
  fs::path root;
};

inline CohortTask cohort_schemes(const fs::path& manifest, const std::vector<std::string>& names) {
  CohortTask t;
  t.root = manifest.parent_path();
  for (const auto& name : names) t.schemes.push_back(load_scheme(t.root / "schemes" / (name + ".txt")));
  return t;
}

inline std::size_t load_subject(net::Dataset& data, const CohortTask& task, const std::vector<std::string>& names,
                                const std::string& subject, std::uint32_t session, const geometry::Bounds& bounds,
                                std::size_t cap, std::uint64_t seed) {
  const auto dir = synth::session_dir(task.root, subject, session);
  require_file(dir / "tracks.tck");
  const auto tracks = io::read_tck(io::read_file(dir / "tracks.tck")).tracks;
  std::vector<io::AssignmentList> assignments;
  for (std::size_t t = 0; t < names.size(); ++t) {
    const auto path = dir / ("assign_" + names[t] + ".txt");
    require_file(path);
    assignments.push_back(io::read_assignments(io::read_file(path), tracks.size(), task.schemes[t].n_regions));
  }
  return net::append_subject(data, tracks, assignments, task.schemes, bounds, cap, seed).used;
}

inline net::TrainResult cmd_train(const TrainOptions& o, std::ostream& log) {
  require_file(o.manifest);
  require(!o.out.empty(), Errc::ConfigInvalid, "an output checkpoint path is required");
  const auto manifest = io::read_manifest(io::read_file(o.manifest));
  const auto task = cohort_schemes(o.manifest, o.schemes);
  auto arch = o.arch;
  arch.head_classes.clear();
  for (const auto& s : task.schemes) arch.head_classes.push_back(num_classes(s));
  o.training.validate();

  net::Dataset train_set;
  train_set.points = arch.input_points;
  net::Dataset val_set;
  val_set.points = arch.input_points;
  std::size_t index = 0;
  for (const auto& e : manifest.subjects) {
    const std::uint64_t seed = mix_seed(o.training.rng_seed, 0xDA7A + index++);
    if (e.split == io::Split::Train) {
      const auto used = load_subject(train_set, task, o.schemes, e.subject, o.session, o.bounds, o.cap, seed);
      log << "  train " << e.subject << ": " << used << " streamlines\n";
    } else if (e.split == io::Split::Val) {
      const auto used = load_subject(val_set, task, o.schemes, e.subject, o.session, o.bounds, o.cap, seed);
      log << "  val   " << e.subject << ": " << used << " streamlines\n";
    }
  }
  log << "training on " << train_set.size() << " streamlines, validating on " << val_set.size() << "\n";

  auto params = net::initialize(arch, o.training.rng_seed, o.bounds);
  const net::Dataset* validation = val_set.size() > 0 ? &val_set : nullptr;
  auto result = net::train(std::move(params), train_set, validation, o.training, [&](const net::EpochRecord& r) {
    log << "  epoch " << r.epoch << " loss " << r.train_loss;
    for (auto a : r.train_accuracy) log << " acc " << a;
    if (validation) log << " val_loss " << r.val_loss;
    log << "\n";
  });
  io::write_file_atomic(o.out, io::save_model(result.params));
  if (!o.log_csv.empty()) io::write_file_atomic(o.log_csv, net::format_training_log(result.log, arch.num_heads()));
  return result;
}

// ---------------------------------------------------------------- predict

struct PredictCliOptions {
  fs::path model;
  fs::path tracks;
  fs::path out_dir;
  std::vector<std::string> names{"coarse", "fine"};  // one per head, names the class files
  net::PredictOptions predict;
  std::string hardware_note;
};

inline std::string timing_block(const net::TimingReport& t, std::size_t batch, std::size_t threads,
                                const std::string& hardware_note) {
  std::string out = net::format_timing(t) + "\n";
  out += "batch_size " + std::to_string(batch) + "\nthreads " + std::to_string(threads) + "\n";
  out += "hardware " + (hardware_note.empty() ? std::string("unspecified") : hardware_note) + "\n";
  return out;
}

inline net::Prediction cmd_predict(const PredictCliOptions& o, std::ostream& log) {
  require_file(o.model);
  require_file(o.tracks);
  const auto params = io::load_model(io::read_file(o.model));
  require(o.names.size() == params.arch.num_heads(), Errc::ConfigInvalid,
          "one output name per model head is required (" + std::to_string(params.arch.num_heads()) + ")");
  const auto tracks = io::read_tck(io::read_file(o.tracks)).tracks;
  log << "predicting " << tracks.size() << " streamlines\n";
  const auto model = net::InferenceModel::from(params);
  auto result = net::predict(model, tracks, o.predict);
  if (result.degenerate > 0) log << "  " << result.degenerate << " degenerate streamlines assigned class 0\n";
  fs::create_directories(o.out_dir);
  for (std::size_t h = 0; h < o.names.size(); ++h)
    io::write_file_atomic(o.out_dir / ("classes_" + o.names[h] + ".txt"), io::write_classes(result.classes[h]));
  io::write_file_atomic(o.out_dir / "timing.txt",
                        timing_block(result.timing, o.predict.batch_size, o.predict.threads, o.hardware_note));
  log << "  " << net::format_timing(result.timing) << "\n";
  return result;
}

// ---------------------------------------------------------------- connectome

struct ConnectomeOptions {
  fs::path scheme;
  fs::path classes;      // one of classes / assignments
  fs::path assignments;
  fs::path diff_traditional;  // with diff_predicted: difference map mode
  fs::path diff_predicted;
  fs::path out;
};

inline CountMatrix cmd_connectome(const ConnectomeOptions& o, std::ostream& log) {
  require(!o.out.empty(), Errc::ConfigInvalid, "an output path is required");
  CountMatrix result;
  if (!o.diff_traditional.empty() || !o.diff_predicted.empty()) {
    require(!o.diff_traditional.empty() && !o.diff_predicted.empty(), Errc::ConfigInvalid,
            "difference maps need both a traditional and a predicted matrix");
    const auto trad = connectome_from_matrix(load_matrix(o.diff_traditional));
    const auto pred = connectome_from_matrix(load_matrix(o.diff_predicted));
    result = difference_map(trad, pred);
    log << "difference map over " << result.rows() << " regions\n";
  } else {
    require(o.classes.empty() != o.assignments.empty(), Errc::ConfigInvalid,
            "exactly one of a class file or an assignment file is required");
    const auto scheme = load_scheme(o.scheme);
    Connectome c(scheme.n_regions);
    if (!o.classes.empty()) {
      require_file(o.classes);
      const auto labels = io::read_classes(io::read_file(o.classes), num_classes(scheme));
      c = assemble(labels, scheme);
    } else {
      require_file(o.assignments);
      const auto text = io::read_file(o.assignments);
      const auto pairs = io::read_assignments(text, io::count_data_lines(text), scheme.n_regions);
      c = assemble_from_assignments(pairs, scheme);
    }
    log << c.streamline_count() << " streamlines, " << c.unknown_count << " unknown\n";
    result = c.counts;
  }
  io::write_file_atomic(o.out, io::write_matrix_csv(result));
  return result;
}

// ---------------------------------------------------------------- compare

enum class CompareMode { Similarity, IntraInter, TestRetest };

struct CompareOptions {
  CompareMode mode = CompareMode::Similarity;
  fs::path a;      // similarity
  fs::path b;
  fs::path pairs;  // "subject first.csv second.csv" per line
  fs::path out;
  fs::path summary;
  double shift_epsilon = 1.0;
};

inline void cmd_compare(const CompareOptions& o, std::ostream& log) {
  require(!o.out.empty(), Errc::ConfigInvalid, "an output path is required");
  const stats::ShiftPolicy policy{o.shift_epsilon};
  if (o.mode == CompareMode::Similarity) {
    const auto r = stats::similarity(load_matrix(o.a), load_matrix(o.b), policy);
    char buf[160];
    std::snprintf(buf, sizeof buf, "pearson,lerm,lerm_shift\n%.10g,%.10g,%.10g\n", r.pearson_r, r.lerm,
                  r.spd_shift_used);
    io::write_file_atomic(o.out, buf);
    log << buf;
    return;
  }
  std::vector<std::string> subjects;
  std::vector<CountMatrix> first;
  std::vector<CountMatrix> second;
  for (const auto& row : read_table(o.pairs, 3)) {
    subjects.push_back(row[0]);
    first.push_back(load_matrix(resolve(o.pairs, row[1])));
    second.push_back(load_matrix(resolve(o.pairs, row[2])));
  }
  std::string summary;
  if (o.mode == CompareMode::IntraInter) {
    const auto report = stats::intra_inter_analysis(first, second, subjects, policy);
    io::write_file_atomic(o.out, stats::format_csv(report));
    summary = stats::format_summary(report);
  } else {
    const auto report = stats::test_retest(first, second, subjects, policy);
    io::write_file_atomic(o.out, stats::format_csv(report));
    summary = stats::retest_table_header() + stats::format_retest_row("-", "-", report);
  }
  if (!o.summary.empty()) io::write_file_atomic(o.summary, summary);
  log << summary;
}

// ---------------------------------------------------------------- netmetrics

struct NetmetricsOptions {
  std::vector<std::pair<std::string, fs::path>> schemes;  // name -> "subject trad.csv pred.csv" list
  fs::path out;
  std::uint64_t seed = 0;
  bool binary_assortativity = false;
};

inline graph::NetworkReport cmd_netmetrics(const NetmetricsOptions& o, std::ostream& log) {
  require(!o.out.empty(), Errc::ConfigInvalid, "an output path is required");
  require(!o.schemes.empty(), Errc::ConfigInvalid, "at least one scheme list is required");
  graph::NetworkReport report;
  report.seed = o.seed;
  const auto mode = o.binary_assortativity ? graph::AssortativityMode::Degree : graph::AssortativityMode::Strength;
  for (const auto& [name, list] : o.schemes) {
    std::vector<CountMatrix> trad;
    std::vector<CountMatrix> pred;
    for (const auto& row : read_table(list, 3)) {
      trad.push_back(load_matrix(resolve(list, row[1])));
      pred.push_back(load_matrix(resolve(list, row[2])));
    }
    log << "scheme " << name << ": " << trad.size() << " subjects\n";
    graph::add_scheme(report, name, trad, pred, mode);
  }
  io::write_file_atomic(o.out, graph::format_csv(report));
  return report;
}

// ---------------------------------------------------------------- benchmark

struct BenchmarkOptions {
  fs::path model;
  fs::path tracks;
  fs::path out;
  net::PredictOptions predict;
  std::size_t repeats = 3;
  std::string hardware_note;
};

/// Repeats prediction and reports the run with the median total time.
inline net::TimingReport cmd_benchmark(const BenchmarkOptions& o, std::ostream& log) {
  require_file(o.model);
  require_file(o.tracks);
  require(o.repeats >= 1, Errc::ConfigInvalid, "repeats must be >= 1");
  const auto model = net::InferenceModel::from(io::load_model(io::read_file(o.model)));
  const auto tracks = io::read_tck(io::read_file(o.tracks)).tracks;
  std::vector<net::TimingReport> runs;
  for (std::size_t r = 0; r < o.repeats; ++r) {
    runs.push_back(net::predict(model, tracks, o.predict).timing);
    log << "  run " << r + 1 << ": " << net::format_timing(runs.back()) << "\n";
  }
  std::sort(runs.begin(), runs.end(), [](const auto& x, const auto& y) { return x.total_seconds < y.total_seconds; });
  const auto& median = runs[runs.size() / 2];
  const double throughput = median.total_seconds > 0.0 ? static_cast<double>(median.streamlines) / median.total_seconds : 0.0;
  std::string text = timing_block(median, o.predict.batch_size, o.predict.threads, o.hardware_note);
  text += "throughput " + std::to_string(throughput) + " streamlines/s\n";
  text += "repeats " + std::to_string(o.repeats) + "\n";
  if (!o.out.empty()) io::write_file_atomic(o.out, text);
  log << text;
  return median;
}

}  // namespace tractconn::cli
