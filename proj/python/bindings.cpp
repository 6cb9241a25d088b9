#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "cloze/analysis.hpp"
#include "cloze/error.hpp"
#include "cloze/experiment.hpp"
#include "cloze/stats.hpp"

namespace py = pybind11;
using namespace cloze;

namespace {

// Structured results cross the boundary as JSON text; the Python side
// decodes them.
std::string analyze_log(const std::filesystem::path& log, const std::string& unit, const std::string& kind,
                        const std::string& trial_type, const std::string& fit_range, double z,
                        std::int64_t min_bucket_trials) {
  const auto options = make_analysis_options(unit, kind, trial_type, fit_range, z, min_bucket_trials);
  return to_json(analyze(EventLog::read(log), options)).dump();
}

std::string analyze_log_csv(const std::filesystem::path& log, const std::string& unit, const std::string& kind,
                            const std::string& trial_type, double z) {
  return to_csv(analyze(EventLog::read(log), make_analysis_options(unit, kind, trial_type, {}, z)));
}

py::tuple ingest(const std::filesystem::path& log_path, const std::vector<std::filesystem::path>& files,
                 const std::string& alphabet, int min_word_len) {
  std::vector<Fragment> fragments;
  for (const auto& f : files) fragments.push_back(load_fragment(f));
  auto log = EventLog::open(log_path);
  ExperimentConfig cfg;
  cfg.alphabet = Alphabet::named(alphabet);
  cfg.min_word_len = min_word_len;
  auto exp = Experiment::replay(log.replay(), cfg);
  std::size_t added = 0;
  for (const auto& f : fragments) {
    if (exp.add_fragment(log, f)) ++added;
  }
  return py::make_tuple(added, exp.fragments().size());
}

std::string simulate_log(const std::filesystem::path& log_path, const std::string& subject, std::int64_t n,
                         std::uint64_t seed, std::vector<double> mix, const std::string& curve,
                         const std::string& alphabet, int min_word_len, const std::string& session) {
  if (mix.size() != 3) throw Error(ErrorCode::InvalidArgument, "mix needs three weights");
  SubjectProfile profile;
  profile.kind = parse_subject_kind(subject);
  profile.subject_id = subject;
  profile.curve = curve;
  auto log = EventLog::open(log_path);
  ExperimentConfig cfg;
  cfg.alphabet = Alphabet::named(alphabet);
  cfg.min_word_len = min_word_len;
  auto exp = Experiment::replay(log.replay(), cfg);
  std::optional<FrequencyDictionary> dict;
  if (profile.kind == SubjectKind::Uniform) dict = FrequencyDictionary::uniform(exp.fallback_words());
  NgramModel model;
  SimulationOptions opts;
  opts.n_trials = n;
  opts.seed = seed;
  opts.type_mix = normalize_mix({mix[0], mix[1], mix[2]});
  opts.session_id = session;
  CorpusSplit split;
  if (profile.kind == SubjectKind::Ngram) {
    split = split_corpus(exp);
    for (const auto& id : split.training) model.train(exp.fragments().at(id), cfg.alphabet);
    opts.fragment_pool = split.held_out;
  }
  const auto subj = make_subject(profile, {&cfg.alphabet, dict ? &*dict : nullptr, &model});
  return simulate(exp, log, *subj, opts).to_json().dump();
}

py::list extract(const std::string& text, const std::string& alphabet, int min_len) {
  const auto a = Alphabet::named(alphabet);
  py::list out;
  for (const auto& w : extract_words(text, a, min_len)) {
    py::dict d;
    d["surface"] = w.surface;
    d["start"] = w.start;
    d["end"] = w.end;
    d["length_chars"] = w.length_chars;
    d["length_syllables"] = w.length_syllables ? py::cast(*w.length_syllables) : py::none();
    out.append(d);
  }
  return out;
}

std::vector<stats::PerWordStats> per_word(const std::vector<std::pair<std::int64_t, std::int64_t>>& counts) {
  std::vector<stats::PerWordStats> ws;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    stats::PerWordStats w;
    w.key = {"", i, i + 1};
    w.n_correct = counts[i].first;
    w.n_trials = counts[i].second;
    ws.push_back(w);
  }
  return ws;
}

py::dict fit(const std::vector<std::tuple<int, std::int64_t, std::int64_t>>& buckets, int min_len, int max_len,
             std::int64_t min_bucket_trials) {
  std::vector<stats::GroupStats> groups;
  for (const auto& [len, k, n] : buckets) {
    stats::GroupStats g;
    g.length = len;
    g.n_correct = k;
    g.n_trials = n;
    g.p_hat = static_cast<double>(k) / static_cast<double>(n);
    if (k > 0) g.U = stats::unpredictability(k, n);
    groups.push_back(g);
  }
  const auto f = stats::linear_fit(groups, {min_len, max_len}, min_bucket_trials);
  py::dict d;
  d["slope"] = f.slope;
  d["intercept"] = f.intercept;
  d["r_squared"] = f.r_squared;
  d["n_buckets"] = f.n_buckets;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Word-guessing experiment core";

  // Module-lifetime reference; the translator outlives any local handle.
  static const py::handle error_type = py::exception<Error>(m, "ClozeError").release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  m.def("extract_words", &extract, py::arg("text"), py::arg("alphabet") = "cyrillic",
        py::arg("min_len") = kDefaultMinWordLength);
  m.def(
      "count_syllables", [](const std::string& w, const std::string& a) { return count_syllables(w, Alphabet::named(a)); },
      py::arg("word"), py::arg("alphabet") = "cyrillic");
  m.def("content_hash", [](const std::string& s) { return content_hash(s); });

  m.def("unpredictability", &stats::unpredictability, py::arg("n_correct"), py::arg("n_trials"));
  m.def(
      "entropy_mean_log",
      [](const std::vector<std::pair<std::int64_t, std::int64_t>>& counts, double constant) {
        return stats::entropy_mean_log(per_word(counts), constant);
      },
      py::arg("counts"), py::arg("zero_guess_constant") = stats::kWildGuessBits,
      "counts: list of (n_correct, n_trials) per word");
  m.def(
      "binomial_ci",
      [](std::int64_t k, std::int64_t n, double z) {
        const auto ci = stats::binomial_ci(k, n, z);
        return std::make_pair(ci.low, ci.high);
      },
      py::arg("n_correct"), py::arg("n_trials"), py::arg("z") = stats::kDefaultZ);
  m.def("linear_fit", &fit, py::arg("buckets"), py::arg("min_len") = 5, py::arg("max_len") = 14,
        py::arg("min_bucket_trials") = stats::kDefaultMinBucketTrials, "buckets: list of (length, n_correct, n_trials)");
  m.def(
      "word_entropy_from_letter_entropies",
      [](const std::vector<double>& h) { return stats::word_entropy_from_letter_entropies(h); }, py::arg("letter_bits"));
  m.def(
      "zipf_word_entropy", [](const std::vector<double>& p) { return stats::zipf_word_entropy(p); },
      py::arg("rank_probabilities"));
  m.def("zipf_rank_probabilities", &stats::zipf_rank_probabilities, py::arg("ranks"));
  m.def("bpc_to_bpw", &stats::bpc_to_bpw, py::arg("bits_per_char"), py::arg("avg_word_len_chars"));
  m.def("ergodic_sequence_probability", &stats::ergodic_sequence_probability, py::arg("bits_per_char"),
        py::arg("length"));

  m.def("ingest", &ingest, py::arg("log"), py::arg("files"), py::arg("alphabet") = "cyrillic",
        py::arg("min_word_len") = kDefaultMinWordLength);
  m.def("simulate_json", &simulate_log, py::arg("log"), py::arg("subject"), py::arg("n_trials"), py::arg("seed") = 0,
        py::arg("mix") = std::vector<double>{1, 1, 1}, py::arg("curve") = "pow2:0.3", py::arg("alphabet") = "cyrillic",
        py::arg("min_word_len") = kDefaultMinWordLength, py::arg("session") = "");
  m.def("analyze_json", &analyze_log, py::arg("log"), py::arg("unit") = "chars", py::arg("kind") = "all",
        py::arg("trial_type") = "1", py::arg("fit_range") = "", py::arg("z") = stats::kDefaultZ,
        py::arg("min_bucket_trials") = stats::kDefaultMinBucketTrials);
  m.def("analyze_csv", &analyze_log_csv, py::arg("log"), py::arg("unit") = "chars", py::arg("kind") = "all",
        py::arg("trial_type") = "1", py::arg("z") = stats::kDefaultZ);
}
