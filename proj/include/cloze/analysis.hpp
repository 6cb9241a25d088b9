#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cloze/stats.hpp"
#include "cloze/store.hpp"

namespace cloze {

struct AnalysisOptions {
  LengthUnit unit = LengthUnit::Chars;
  stats::RecordFilter filter;
  double z = stats::kDefaultZ;
  stats::FitRange fit_range;  // 5:14 for characters
  std::int64_t min_bucket_trials = stats::kDefaultMinBucketTrials;
};

// Fit range used when none is given: 5..14 characters, 1..5 syllables.
stats::FitRange default_fit_range(LengthUnit unit);

// "MIN:MAX". Throws InvalidArgument.
stats::FitRange parse_fit_range(std::string_view text);

// Builds options from the textual knobs shared by the CLI and the HTTP API:
// unit chars|syllables, kind poetry|prose|all, trial type 1|2|3|all. An empty
// fit_range selects default_fit_range(unit). Throws InvalidArgument.
AnalysisOptions make_analysis_options(std::string_view unit, std::string_view kind, std::string_view trial_type,
                                      std::string_view fit_range = {}, double z = stats::kDefaultZ,
                                      std::int64_t min_bucket_trials = stats::kDefaultMinBucketTrials);

struct EntropyRow {
  int length = 0;
  double h_wild = 0.0;  // never-guessed words count kWildGuessBits
  double h_low = 0.0;   // never-guessed words count kLowBoundBits
};

struct AnalysisResult {
  AnalysisOptions options;
  std::vector<stats::GroupStats> groups;
  std::vector<EntropyRow> entropy;
  std::optional<stats::LinearFit> fit;
  std::string fit_error;
  std::size_t n_records = 0;        // records passing the filter
  std::size_t excluded_records = 0; // no length on the requested axis
  std::size_t pool_words = 0;
};

// Guesses joined to their trials, in log order. Guesses whose trial is not
// in the log are skipped.
std::vector<stats::AnalysisRecord> analysis_records(std::span<const Event> events);

AnalysisResult analyze(std::span<const Event> events, const AnalysisOptions& options);

inline constexpr std::string_view kCsvHeader = "unit,length,n_trials,n_correct,p_hat,U_bits,ci_low,ci_high";

// Header plus one row per bucket; U_bits is empty for all-missed buckets.
std::string to_csv(const AnalysisResult& result);
Json to_json(const AnalysisResult& result);

// Throws SchemaMismatch naming the first missing or malformed column.
std::vector<stats::GroupStats> parse_analysis_csv(std::string_view contents, std::string_view origin = "csv");
std::vector<stats::GroupStats> read_analysis_csv(const std::filesystem::path& path);

// Whitespace-separated plot data with asymmetric error bars:
//   length n_trials p_hat p_err_minus p_err_plus U_bits U_err_minus U_err_plus
// p errors are the distances to ci_low/ci_high; U errors are the matching
// distances on the -log2 scale ("inf" when ci_low is 0, "nan" without U).
std::string figure_data(std::span<const stats::GroupStats> groups, std::string_view title);

struct ReportInputs {
  std::filesystem::path all_chars;
  std::filesystem::path all_syllables;
  std::filesystem::path prose_chars;
};

// Writes fig1_all_chars.dat, fig2_all_syllables.dat and fig3_prose_chars.dat
// into out_dir and returns their paths.
std::vector<std::filesystem::path> write_report(const ReportInputs& inputs, const std::filesystem::path& out_dir);

}  // namespace cloze
