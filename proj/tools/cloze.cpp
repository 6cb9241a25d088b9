// Command-line entry point: ingest, simulate, analyze, serve, report.

#include <httplib.h>

#include <CLI11.hpp>
#include <algorithm>
#include <csignal>
#include <fstream>
#include <iostream>

#include "cloze/analysis.hpp"
#include "cloze/error.hpp"
#include "cloze/experiment.hpp"
#include "cloze/service.hpp"

namespace {

using namespace cloze;

struct Common {
  std::string log_path = "events.jsonl";
  bool fsync = false;
  std::string alphabet = "cyrillic";
  int min_word_len = kDefaultMinWordLength;
  std::string dict;
  std::uint64_t seed = 0;
  std::vector<double> mix = {1, 1, 1};
  std::string unit = "chars";
  std::string kind = "all";
  std::string trial_type = "1";
  std::string fit_range;
  double z = stats::kDefaultZ;
  std::int64_t min_bucket_trials = stats::kDefaultMinBucketTrials;
};

TypeMix parse_mix(const std::vector<double>& weights) {
  if (weights.size() != 3) throw Error(ErrorCode::InvalidArgument, "--mix expects three weights, e.g. 1,1,1");
  return normalize_mix({weights[0], weights[1], weights[2]});
}

ExperimentConfig experiment_config(const Common& c) {
  ExperimentConfig cfg;
  cfg.alphabet = Alphabet::named(c.alphabet);
  cfg.min_word_len = c.min_word_len;
  if (!c.dict.empty()) cfg.fallback_words = FrequencyDictionary::load(c.dict).words();
  return cfg;
}

EventLog open_log(const Common& c) {
  EventLog::Options o;
  o.sync = c.fsync;
  return EventLog::open(c.log_path, o);
}

std::vector<std::filesystem::path> expand_paths(const std::vector<std::string>& inputs) {
  std::vector<std::filesystem::path> out;
  for (const auto& in : inputs) {
    const std::filesystem::path p(in);
    if (std::filesystem::is_directory(p)) {
      std::vector<std::filesystem::path> found;
      for (const auto& e : std::filesystem::recursive_directory_iterator(p)) {
        const auto ext = e.path().extension();
        if (e.is_regular_file() && (ext == ".txt" || ext == ".md")) found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.push_back(p);
    }
  }
  return out;
}

int run_ingest(const Common& c, const std::vector<std::string>& inputs) {
  const auto paths = expand_paths(inputs);
  // Parse everything first so a bad file leaves the log untouched.
  std::vector<Fragment> fragments;
  for (const auto& p : paths) fragments.push_back(load_fragment(p));

  auto log = open_log(c);
  auto exp = Experiment::replay(log.replay(), experiment_config(c));
  std::size_t added = 0;
  for (const auto& f : fragments) {
    if (exp.add_fragment(log, f)) ++added;
  }
  const auto words = exp.all_words();
  std::cout << "files read: " << paths.size() << "\n"
            << "fragments added: " << added << "\n"
            << "duplicates skipped: " << fragments.size() - added << "\n"
            << "fragments total: " << exp.fragments().size() << "\n"
            << "eligible tokens: " << words.size() << "\n";
  for (auto unit : {LengthUnit::Chars, LengthUnit::Syllables}) {
    const auto d = length_distribution(words, unit);
    std::cout << "word types by length (" << to_string(unit) << "), total " << d.total_types << ":\n";
    for (const auto& [len, n] : d.counts) std::cout << "  " << len << "\t" << n << "\n";
  }
  return 0;
}

struct SimulateArgs {
  std::string subject = "oracle";
  std::int64_t n = 100;
  std::string curve = "pow2:0.3";
  int order = 2;
  double smoothing = 0.01;
  std::size_t top_k = 50;
  std::string session;
};

int run_simulate(const Common& c, const SimulateArgs& a) {
  SubjectProfile profile;
  profile.kind = parse_subject_kind(a.subject);
  profile.subject_id = a.subject;
  profile.ngram_order = a.order;
  profile.smoothing = a.smoothing;
  profile.top_k = a.top_k;
  profile.curve = a.curve;

  auto log = open_log(c);
  auto exp = Experiment::replay(log.replay(), experiment_config(c));
  if (exp.eligible_fragments().empty()) throw Error(ErrorCode::CorpusEmpty, "no fragment with eligible words in " + c.log_path);

  std::optional<FrequencyDictionary> dict;
  if (!c.dict.empty()) dict = FrequencyDictionary::load(c.dict);
  if (profile.kind == SubjectKind::Uniform) {
    // Uniform over the dictionary words when given, else over the corpus vocabulary.
    std::vector<std::string> words = dict ? dict->words() : exp.fallback_words();
    dict = FrequencyDictionary::uniform(words);
  }
  if (profile.kind == SubjectKind::Frequency && !dict) {
    throw Error(ErrorCode::InvalidArgument, "the frequency subject needs --dict");
  }

  NgramModel model({a.order, a.smoothing});
  SimulationOptions opts;
  opts.n_trials = a.n;
  opts.seed = c.seed;
  opts.type_mix = parse_mix(c.mix);
  opts.session_id = a.session;
  CorpusSplit split;
  if (profile.kind == SubjectKind::Ngram) {
    split = split_corpus(exp);
    for (const auto& id : split.training) model.train(exp.fragments().at(id), exp.config().alphabet);
    if (split.held_out.empty()) throw Error(ErrorCode::CorpusEmpty, "no held-out fragments for the n-gram subject");
    opts.fragment_pool = split.held_out;
  }
  const auto alphabet = exp.config().alphabet;
  const auto subject = make_subject(profile, {&alphabet, dict ? &*dict : nullptr, &model});
  const auto report = simulate(exp, log, *subject, opts);
  std::cout << report.to_json().dump(2) << "\n";
  return 0;
}

struct AnalyzeArgs {
  std::string format = "csv";
  std::string out;
};

int run_analyze(const Common& c, const AnalyzeArgs& a) {
  if (!std::filesystem::exists(c.log_path)) throw Error(ErrorCode::IoFailure, "no log at " + c.log_path);
  const auto options = make_analysis_options(c.unit, c.kind, c.trial_type, c.fit_range, c.z, c.min_bucket_trials);
  const auto result = analyze(EventLog::read(c.log_path), options);
  const std::string body = a.format == "json" ? to_json(result).dump(2) + "\n" : to_csv(result);
  if (a.out.empty()) {
    std::cout << body;
  } else {
    std::ofstream out(a.out, std::ios::binary | std::ios::trunc);
    out << body;
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + a.out);
  }
  std::cerr << "records: " << result.n_records << ", excluded (no " << c.unit << " length): " << result.excluded_records
            << "\n";
  if (result.fit) {
    std::cerr << "fit " << result.fit->fit_range.min << ":" << result.fit->fit_range.max << " over "
              << result.fit->n_buckets << " buckets: slope " << result.fit->slope << " bits/" << c.unit
              << ", intercept " << result.fit->intercept << ", r^2 " << result.fit->r_squared << "\n";
  } else {
    std::cerr << "fit: " << result.fit_error << "\n";
  }
  return 0;
}

httplib::Server* g_server = nullptr;

void stop_server(int) {
  if (g_server) g_server->stop();
}

int run_serve(const Common& c, const std::string& host, int port) {
  auto log = open_log(c);
  auto exp = Experiment::replay(log.replay(), experiment_config(c));
  Service service(exp, log, {c.seed});
  httplib::Server server;
  service.bind(server);
  g_server = &server;
  std::signal(SIGINT, stop_server);
  std::signal(SIGTERM, stop_server);
  int bound = port;
  if (port == 0) {
    bound = server.bind_to_any_port(host);
  } else if (!server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound <= 0) throw Error(ErrorCode::IoFailure, "cannot listen on " + host + ":" + std::to_string(port));
  std::cerr << "listening on http://" << host << ":" << bound << " (log " << c.log_path << ", "
            << exp.fragments().size() << " fragments)\n";
  server.listen_after_bind();
  g_server = nullptr;
  return 0;
}

int run_report(const ReportInputs& inputs, const std::string& out_dir) {
  for (const auto& p : write_report(inputs, out_dir)) std::cout << p.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Word-guessing experiment: corpus ingest, simulation, analysis and trial server"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key=value configuration file; flags override it");

  Common c;
  app.add_option("--log", c.log_path, "Event log (JSON lines)")->capture_default_str();
  app.add_flag("--fsync", c.fsync, "fsync the log after every append");
  app.add_option("--alphabet", c.alphabet, "Letters that form words")
      ->check(CLI::IsMember({"cyrillic", "latin", "mixed"}))
      ->capture_default_str();
  app.add_option("--min-word-len", c.min_word_len, "Shortest eligible target word")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--dict", c.dict, "Frequency dictionary, word<TAB>count per line");
  app.add_option("--seed", c.seed, "Base seed")->capture_default_str();
  app.add_option("--mix", c.mix, "Trial type weights for types 1,2,3")->expected(3)->delimiter(',')->capture_default_str();
  app.add_option("--unit", c.unit, "Length unit")->check(CLI::IsMember({"chars", "syllables"}))->capture_default_str();
  app.add_option("--kind", c.kind, "Text kind filter")
      ->check(CLI::IsMember({"poetry", "prose", "all"}))
      ->capture_default_str();
  app.add_option("--trial-type", c.trial_type, "Trial type filter")
      ->check(CLI::IsMember({"1", "2", "3", "all"}))
      ->capture_default_str();
  app.add_option("--fit-range", c.fit_range, "MIN:MAX lengths used by the fit (5:14 chars, 1:5 syllables)");
  app.add_option("--z", c.z, "Confidence interval multiplier")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--min-bucket-trials", c.min_bucket_trials, "Smallest bucket used by the fit")->capture_default_str();

  auto* ingest = app.add_subcommand("ingest", "Add text fragments to the log");
  std::vector<std::string> inputs;
  ingest->add_option("paths", inputs, "Fragment files or directories")->required()->check(CLI::ExistingPath);

  auto* sim = app.add_subcommand("simulate", "Play trials with an automated subject");
  SimulateArgs sa;
  sim->add_option("--subject", sa.subject, "oracle, uniform, frequency, ngram or planted")->capture_default_str();
  sim->add_option("-n,--n", sa.n, "Number of trials")->check(CLI::PositiveNumber)->capture_default_str();
  sim->add_option("--curve", sa.curve, "Planted success curve, pow2:S or const:P")->capture_default_str();
  sim->add_option("--order", sa.order, "n-gram order")->check(CLI::Range(1, 8))->capture_default_str();
  sim->add_option("--smoothing", sa.smoothing, "Add-lambda smoothing")->capture_default_str();
  sim->add_option("--top-k", sa.top_k, "n-gram candidates kept for type-1 sampling")->capture_default_str();
  sim->add_option("--session", sa.session, "Session id (sim-<seed> by default)");

  auto* an = app.add_subcommand("analyze", "Unpredictability by word length");
  AnalyzeArgs aa;
  an->add_option("--format", aa.format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  an->add_option("-o,--out", aa.out, "Write to a file instead of stdout");

  auto* serve = app.add_subcommand("serve", "Run the HTTP trial API");
  std::string host = "127.0.0.1";
  int port = 8080;
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port, "0 picks a free port")->check(CLI::Range(0, 65535))->capture_default_str();

  auto* rep = app.add_subcommand("report", "Figure data with error bars from analysis CSVs");
  ReportInputs ri;
  std::string out_dir = "figures";
  rep->add_option("--all-chars", ri.all_chars, "analyze CSV: all texts, characters")->required();
  rep->add_option("--all-syllables", ri.all_syllables, "analyze CSV: all texts, syllables")->required();
  rep->add_option("--prose-chars", ri.prose_chars, "analyze CSV: prose, characters")->required();
  rep->add_option("--out-dir", out_dir)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) return run_ingest(c, inputs);
    if (*sim) return run_simulate(c, sa);
    if (*an) return run_analyze(c, aa);
    if (*serve) return run_serve(c, host, port);
    if (*rep) return run_report(ri, out_dir);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
