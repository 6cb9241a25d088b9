#include "cloze/analysis.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "cloze/error.hpp"

namespace cloze {

stats::FitRange default_fit_range(LengthUnit unit) {
  return unit == LengthUnit::Chars ? stats::FitRange{5, 14} : stats::FitRange{1, 5};
}

stats::FitRange parse_fit_range(std::string_view text) {
  const auto colon = text.find(':');
  auto bad = [&] { return Error(ErrorCode::InvalidArgument, "fit range must look like MIN:MAX, got '" + std::string(text) + "'"); };
  if (colon == std::string_view::npos) throw bad();
  stats::FitRange range;
  const auto a = text.substr(0, colon);
  const auto b = text.substr(colon + 1);
  if (std::from_chars(a.data(), a.data() + a.size(), range.min).ptr != a.data() + a.size() || a.empty()) throw bad();
  if (std::from_chars(b.data(), b.data() + b.size(), range.max).ptr != b.data() + b.size() || b.empty()) throw bad();
  if (range.min > range.max) throw bad();
  return range;
}

AnalysisOptions make_analysis_options(std::string_view unit, std::string_view kind, std::string_view trial_type,
                                      std::string_view fit_range, double z, std::int64_t min_bucket_trials) {
  AnalysisOptions o;
  o.unit = parse_length_unit(unit);
  if (kind == "all") {
    o.filter.kind.reset();
  } else {
    o.filter.kind = parse_text_kind(kind);
  }
  if (trial_type == "all") {
    o.filter.trial_type.reset();
  } else {
    int t = 0;
    const auto [ptr, ec] = std::from_chars(trial_type.data(), trial_type.data() + trial_type.size(), t);
    if (ec != std::errc() || ptr != trial_type.data() + trial_type.size()) {
      throw Error(ErrorCode::InvalidArgument, "trial type must be 1, 2, 3 or all");
    }
    o.filter.trial_type = trial_type_from_int(t);
  }
  o.fit_range = fit_range.empty() ? default_fit_range(o.unit) : parse_fit_range(fit_range);
  if (!(z > 0.0)) throw Error(ErrorCode::InvalidArgument, "z must be positive");
  o.z = z;
  if (min_bucket_trials < 1) throw Error(ErrorCode::InvalidArgument, "minimum bucket size must be at least 1");
  o.min_bucket_trials = min_bucket_trials;
  return o;
}

std::vector<stats::AnalysisRecord> analysis_records(std::span<const Event> events) {
  std::map<std::string, Trial> trials;
  std::vector<stats::AnalysisRecord> out;
  for (const auto& e : events) {
    if (e.kind == EventKind::TrialCreated) {
      auto t = trial_from_payload(e.payload);
      trials.emplace(t.id, std::move(t));
    } else if (e.kind == EventKind::GuessRecorded) {
      const auto it = trials.find(e.payload.at("trial_id").get<std::string>());
      if (it == trials.end()) continue;
      const Trial& t = it->second;
      stats::AnalysisRecord r;
      r.trial_type = t.type;
      r.kind = t.fragment_kind;
      r.word = TargetKey::of(t.target);
      r.length_chars = t.target.length_chars;
      r.length_syllables = t.target.length_syllables;
      r.correct = e.payload.at("correct").get<bool>();
      out.push_back(std::move(r));
    }
  }
  return out;
}

AnalysisResult analyze(std::span<const Event> events, const AnalysisOptions& options) {
  AnalysisResult result;
  result.options = options;
  const auto records = analysis_records(events);
  for (const auto& r : records) {
    if (options.filter.accepts(r)) ++result.n_records;
  }
  result.groups = stats::group_by_length(records, options.unit, options.filter, options.z);
  result.excluded_records = stats::excluded_records(records, options.unit, options.filter);

  const auto wild = stats::entropy_by_length(records, options.unit, options.filter, stats::kWildGuessBits);
  const auto low = stats::entropy_by_length(records, options.unit, options.filter, stats::kLowBoundBits);
  for (const auto& [len, h] : wild) result.entropy.push_back({len, h, low.at(len)});

  try {
    result.fit = stats::linear_fit(result.groups, options.fit_range, options.min_bucket_trials);
  } catch (const Error& e) {
    result.fit_error = std::string(to_string(e.code())) + ": " + e.detail();
  }

  for (const auto& e : events) {
    if (e.kind == EventKind::PoolUpdated) ++result.pool_words;
  }
  return result;
}

namespace {

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string to_csv(const AnalysisResult& result) {
  std::string out(kCsvHeader);
  out += "\n";
  for (const auto& g : result.groups) {
    out += std::string(to_string(g.unit)) + "," + std::to_string(g.length) + "," + std::to_string(g.n_trials) + "," +
           std::to_string(g.n_correct) + "," + fmt_double(g.p_hat) + "," + (g.U ? fmt_double(*g.U) : std::string{}) +
           "," + fmt_double(g.ci_low) + "," + fmt_double(g.ci_high) + "\n";
  }
  return out;
}

Json to_json(const AnalysisResult& r) {
  const auto& o = r.options;
  Json j;
  j["unit"] = to_string(o.unit);
  j["kind"] = o.filter.kind ? Json(to_string(*o.filter.kind)) : Json("all");
  j["trial_type"] = o.filter.trial_type ? Json(static_cast<int>(*o.filter.trial_type)) : Json("all");
  j["z"] = o.z;
  j["fit_range"] = {o.fit_range.min, o.fit_range.max};
  j["min_bucket_trials"] = o.min_bucket_trials;
  j["n_records"] = r.n_records;
  j["excluded_records"] = r.excluded_records;
  j["pool_words"] = r.pool_words;
  j["groups"] = Json::array();
  for (const auto& g : r.groups) {
    j["groups"].push_back({{"unit", to_string(g.unit)},
                           {"length", g.length},
                           {"n_trials", g.n_trials},
                           {"n_correct", g.n_correct},
                           {"p_hat", g.p_hat},
                           {"U_bits", g.U ? Json(*g.U) : Json(nullptr)},
                           {"all_missed", g.all_missed()},
                           {"ci_low", g.ci_low},
                           {"ci_high", g.ci_high}});
  }
  j["entropy"] = Json::array();
  for (const auto& e : r.entropy) {
    j["entropy"].push_back({{"length", e.length}, {"H_bits_wild", e.h_wild}, {"H_bits_low", e.h_low}});
  }
  if (r.fit) {
    j["fit"] = {{"slope", r.fit->slope},
                {"intercept", r.fit->intercept},
                {"r_squared", r.fit->r_squared},
                {"fit_range", {r.fit->fit_range.min, r.fit->fit_range.max}},
                {"n_buckets", r.fit->n_buckets}};
  } else {
    j["fit"] = nullptr;
  }
  j["fit_error"] = r.fit_error.empty() ? Json(nullptr) : Json(r.fit_error);
  return j;
}

std::vector<stats::GroupStats> parse_analysis_csv(std::string_view contents, std::string_view origin) {
  std::vector<std::vector<std::string>> rows;
  std::size_t pos = 0;
  while (pos < contents.size()) {
    auto eol = contents.find('\n', pos);
    if (eol == std::string_view::npos) eol = contents.size();
    std::string line(contents.substr(pos, eol - pos));
    pos = eol + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
  }
  const auto where = std::string(origin);
  if (rows.empty()) throw Error(ErrorCode::SchemaMismatch, where + ": missing header");

  const std::vector<std::string> required = {"unit", "length", "n_trials", "n_correct", "p_hat", "U_bits", "ci_low", "ci_high"};
  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < rows[0].size(); ++i) column[rows[0][i]] = i;
  for (const auto& name : required) {
    if (!column.contains(name)) throw Error(ErrorCode::SchemaMismatch, where + ": missing column '" + name + "'");
  }

  auto number = [&](const std::vector<std::string>& row, const std::string& name, std::size_t lineno) {
    const auto i = column.at(name);
    const std::string cell = i < row.size() ? row[i] : std::string{};
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
      throw Error(ErrorCode::SchemaMismatch,
                  where + ":" + std::to_string(lineno) + ": column '" + name + "' is not a number: '" + cell + "'");
    }
    return v;
  };

  std::vector<stats::GroupStats> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    stats::GroupStats g;
    const auto ui = column.at("unit");
    try {
      g.unit = parse_length_unit(ui < row.size() ? row[ui] : "");
    } catch (const Error&) {
      throw Error(ErrorCode::SchemaMismatch, where + ":" + std::to_string(r + 1) + ": column 'unit' must be chars or syllables");
    }
    g.length = static_cast<int>(number(row, "length", r + 1));
    g.n_trials = static_cast<std::int64_t>(number(row, "n_trials", r + 1));
    g.n_correct = static_cast<std::int64_t>(number(row, "n_correct", r + 1));
    g.p_hat = number(row, "p_hat", r + 1);
    const auto uidx = column.at("U_bits");
    if (uidx < row.size() && !row[uidx].empty()) g.U = number(row, "U_bits", r + 1);
    g.ci_low = number(row, "ci_low", r + 1);
    g.ci_high = number(row, "ci_high", r + 1);
    out.push_back(g);
  }
  return out;
}

std::vector<stats::GroupStats> read_analysis_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_analysis_csv(ss.str(), path.string());
}

std::string figure_data(std::span<const stats::GroupStats> groups, std::string_view title) {
  std::string out = "# " + std::string(title) + "\n";
  out += "# length n_trials p_hat p_err_minus p_err_plus U_bits U_err_minus U_err_plus\n";
  const double nan = std::nan("");
  for (const auto& g : groups) {
    const double u = g.U ? *g.U : nan;
    // U falls as p rises, so the upper p bound gives the lower U bar.
    const double u_minus = g.U ? u - (-std::log2(g.ci_high)) : nan;
    const double u_plus = g.U ? (g.ci_low > 0 ? -std::log2(g.ci_low) - u : INFINITY) : nan;
    out += std::to_string(g.length) + " " + std::to_string(g.n_trials) + " " + fmt_double(g.p_hat) + " " +
           fmt_double(g.p_hat - g.ci_low) + " " + fmt_double(g.ci_high - g.p_hat) + " " + fmt_double(u) + " " +
           fmt_double(u_minus) + " " + fmt_double(u_plus) + "\n";
  }
  return out;
}

std::vector<std::filesystem::path> write_report(const ReportInputs& inputs, const std::filesystem::path& out_dir) {
  struct Figure {
    const std::filesystem::path* input;
    LengthUnit unit;
    const char* file;
    const char* title;
  };
  const Figure figures[] = {
      {&inputs.all_chars, LengthUnit::Chars, "fig1_all_chars.dat", "Unpredictability vs word length in characters, all texts"},
      {&inputs.all_syllables, LengthUnit::Syllables, "fig2_all_syllables.dat", "Unpredictability vs word length in syllables, all texts"},
      {&inputs.prose_chars, LengthUnit::Chars, "fig3_prose_chars.dat", "Unpredictability vs word length in characters, prose"},
  };
  std::vector<std::pair<std::filesystem::path, std::string>> pending;
  for (const auto& f : figures) {
    auto groups = read_analysis_csv(*f.input);
    std::vector<stats::GroupStats> selected;
    for (const auto& g : groups) {
      if (g.unit == f.unit) selected.push_back(g);
    }
    pending.emplace_back(out_dir / f.file, figure_data(selected, f.title));
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + out_dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  for (const auto& [path, data] : pending) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << data;
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
    written.push_back(path);
  }
  return written;
}

}  // namespace cloze
