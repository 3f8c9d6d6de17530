#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "probthread/analysis.hpp"
#include "probthread/error.hpp"
#include "probthread/interaction.hpp"
#include "probthread/interleaving.hpp"
#include "probthread/pglb.hpp"
#include "probthread/service.hpp"
#include "probthread/term.hpp"

using namespace probthread;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// Shared by every subcommand that turns files into one thread.
struct InputOptions {
  std::vector<std::string> files;
  std::size_t entry = 1;
  bool no_abstraction = false;
  bool no_random = false;
  std::string services;
  bool abstract_after_use = false;
  std::string scheduler = "cyclic";
};

SchedulerSpec load_scheduler(const std::string& spec) {
  if (spec.starts_with("table:")) return table_scheduler(read_file(spec.substr(6)));
  return builtin_scheduler(spec);
}

ThreadGraph load_one(const std::string& path, const InputOptions& o) {
  std::string text = read_file(path);
  if (std::filesystem::path(path).extension() == ".pglb") {
    pglb::ExtractOptions options;
    options.entry = o.entry;
    options.use_random = !o.no_random;
    options.abstraction = !o.no_abstraction;
    return pglb::extract(pglb::parse(text), options);
  }
  return parse_thread(text);
}

ThreadGraph load(const InputOptions& o) {
  std::vector<ThreadGraph> threads;
  for (const auto& f : o.files) threads.push_back(load_one(f, o));
  ThreadGraph g = threads.front();
  if (threads.size() > 1) {
    SchedulerSpec spec = load_scheduler(o.scheduler);
    g = interleave(spec, {}, spec.initial_state, threads);
  }
  if (!o.services.empty()) {
    g = use(g, ServiceRegistry::with_builtins().parse_family(o.services));
    if (o.abstract_after_use) g = abstract_tau(g);
  }
  return normalize(g);
}

void add_pglb_options(CLI::App* app, InputOptions& o) {
  app->add_option("--entry", o.entry, "start position for instruction sequences")->check(CLI::PositiveNumber);
  app->add_flag("--no-abstraction", o.no_abstraction, "keep tau steps of instruction sequences");
  app->add_flag("--no-random", o.no_random, "leave random.get actions unresolved");
}

void add_input_options(CLI::App* app, InputOptions& o) {
  app->add_option("files", o.files, "term files, or .pglb instruction sequences")->required()->check(CLI::ExistingFile);
  add_pglb_options(app, o);
  app->add_option("--services", o.services, "service family literal, e.g. '{r: Register(true)}'");
  app->add_flag("--abstract", o.abstract_after_use, "conceal tau after applying services");
  app->add_option("--scheduler", o.scheduler, "cyclic | uniform | lottery:defaultTickets=N[,initial=a:b] | table:FILE");
}

Environment load_env(const std::string& path) {
  if (path.empty()) return {};
  return Environment::parse(read_file(path));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic thread algebra toolkit"};
  app.require_subcommand(1);

  InputOptions single;
  auto* normalize_cmd = app.add_subcommand("normalize", "print the canonical form of a term");
  normalize_cmd->add_option("file", single.files, "term file")->required()->check(CLI::ExistingFile)->expected(1);

  auto* extract_cmd = app.add_subcommand("extract", "extract the thread of an instruction sequence");
  extract_cmd->add_option("file", single.files, "instruction sequence")->required()->check(CLI::ExistingFile)->expected(1);
  add_pglb_options(extract_cmd, single);

  auto* use_cmd = app.add_subcommand("use", "apply a service family to a thread");
  use_cmd->add_option("file", single.files, "term file")->required()->check(CLI::ExistingFile)->expected(1);
  use_cmd->add_option("--services", single.services, "service family literal")->required();
  use_cmd->add_flag("--abstract", single.abstract_after_use, "conceal tau afterwards");

  auto* interleave_cmd = app.add_subcommand("interleave", "strategic interleaving of threads");
  interleave_cmd->add_option("files", single.files, "term files")->required()->check(CLI::ExistingFile);
  interleave_cmd->add_option("--scheduler", single.scheduler, "scheduler")->required();

  InputOptions dist_in;
  std::size_t depth = 0;
  std::string env_file;
  bool traces = false;
  auto* dist_cmd = app.add_subcommand("dist", "exact outcome distribution within a step bound");
  add_input_options(dist_cmd, dist_in);
  dist_cmd->add_option("--depth", depth, "step bound")->required();
  dist_cmd->add_option("--env", env_file, "reply table, lines 'f.m = p'")->check(CLI::ExistingFile);
  dist_cmd->add_flag("--traces", traces, "list every trace with its probability");

  std::vector<std::string> pair;
  std::optional<std::size_t> equiv_depth;
  auto* equiv_cmd = app.add_subcommand("equiv", "compare two threads up to a depth, or exactly");
  equiv_cmd->add_option("files", pair, "two term files")->required()->expected(2)->check(CLI::ExistingFile);
  equiv_cmd->add_option("--depth", equiv_depth, "compare projections of this depth");

  InputOptions sample_in;
  std::uint64_t seed = 0;
  std::size_t runs = 1;
  std::size_t sample_depth = 0;
  std::string sample_env;
  auto* sample_cmd = app.add_subcommand("sample", "Monte-Carlo runs with std::mt19937_64");
  add_input_options(sample_cmd, sample_in);
  sample_cmd->add_option("--seed", seed, "seed of the first run")->required();
  sample_cmd->add_option("--runs", runs, "number of runs; run k uses seed + k")->check(CLI::PositiveNumber);
  sample_cmd->add_option("--depth", sample_depth, "step bound")->required();
  sample_cmd->add_option("--env", sample_env, "reply table")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*normalize_cmd || *use_cmd) {
      ThreadGraph g = parse_thread(read_file(single.files.front()));
      if (*use_cmd) {
        g = use(g, ServiceRegistry::with_builtins().parse_family(single.services));
        if (single.abstract_after_use) g = abstract_tau(g);
      }
      std::cout << format_thread(normalize(g)) << "\n";
    } else if (*extract_cmd) {
      pglb::ExtractOptions options;
      options.entry = single.entry;
      options.use_random = !single.no_random;
      options.abstraction = !single.no_abstraction;
      std::cout << format_thread(pglb::extract(pglb::parse(read_file(single.files.front())), options)) << "\n";
    } else if (*interleave_cmd) {
      std::vector<ThreadGraph> threads;
      for (const auto& f : single.files) threads.push_back(load_one(f, single));
      SchedulerSpec spec = load_scheduler(single.scheduler);
      std::cout << format_thread(normalize(interleave(spec, {}, spec.initial_state, threads))) << "\n";
    } else if (*dist_cmd) {
      std::cout << format_report(outcome_distribution(load(dist_in), load_env(env_file), depth, traces));
    } else if (*equiv_cmd) {
      InputOptions o;
      ThreadGraph a = load_one(pair[0], o);
      ThreadGraph b = load_one(pair[1], o);
      bool same = equiv_depth ? equal_up_to(*equiv_depth, a, b) : bisimilar(a, b);
      std::cout << (same ? "equivalent" : "not equivalent") << "\n";
    } else if (*sample_cmd) {
      std::cout << format_summary(sample_runs(load(sample_in), load_env(sample_env), sample_depth, seed, runs));
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
