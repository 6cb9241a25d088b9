#include "cloze/service.hpp"

#include <charconv>

#include "cloze/analysis.hpp"
#include "cloze/error.hpp"
#include "cloze/rng.hpp"
#include "cloze/subjects.hpp"

namespace cloze {

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::ValidationFailure:
    case ErrorCode::MalformedResponse:
    case ErrorCode::InvalidArgument:
    case ErrorCode::UnknownSubjectKind:
      return 400;
    case ErrorCode::UnknownSession:
    case ErrorCode::UnknownTrial:
      return 404;
    case ErrorCode::AlreadyAnswered:
    case ErrorCode::CorpusEmpty:
    case ErrorCode::NoDecoyAvailable:
    case ErrorCode::NoEligibleWords:
      return 409;
    default:
      return 500;
  }
}

ApiResponse error_response(const Error& error) {
  return {http_status(error.code()), {{"error", to_string(error.code())}, {"detail", error.detail()}}};
}

namespace {

Json parse_body(const std::string& body) {
  try {
    Json j = Json::parse(body);
    if (!j.is_object()) throw Error(ErrorCode::ValidationFailure, "/: expected a JSON object");
    return j;
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::ValidationFailure, std::string("/: invalid JSON: ") + e.what());
  }
}

template <typename Fn>
ApiResponse guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    return error_response(e);
  } catch (const Json::exception& e) {
    return error_response(Error(ErrorCode::ValidationFailure, e.what()));
  }
}

std::string hex8(std::uint64_t v) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(8, '0');
  for (int i = 7; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kHex[v & 0xF];
    v >>= 4;
  }
  return out;
}

}  // namespace

Json trial_view_json(const Trial& trial, const Fragment& fragment, const std::string& session_id) {
  const auto rendered = render_trial(trial, fragment);
  Json j = {{"trial_id", trial.id},
            {"session_id", session_id},
            {"trial_type", static_cast<int>(trial.type)},
            {"text", rendered.text},
            {"title", fragment.title},
            {"author", fragment.author}};
  if (rendered.shown) j["shown"] = *rendered.shown;
  if (!rendered.candidates.empty()) j["candidates"] = rendered.candidates;
  return j;
}

Service::Service(Experiment& experiment, EventLog& log, ServiceOptions options)
    : experiment_(experiment), log_(log), options_(options) {}

ApiResponse Service::create_session(const std::string& body) {
  return guarded([&]() -> ApiResponse {
    const Json req = parse_body(body);
    if (!req.contains("subject") || !req.at("subject").is_object()) {
      throw Error(ErrorCode::ValidationFailure, "/subject: expected an object");
    }
    const auto& subject = req.at("subject");
    if (!subject.contains("kind") || !subject.at("kind").is_string()) {
      throw Error(ErrorCode::ValidationFailure, "/subject/kind: expected a string");
    }
    const auto kind_name = subject.at("kind").get<std::string>();
    try {
      parse_subject_kind(kind_name);
    } catch (const Error&) {
      throw Error(ErrorCode::ValidationFailure, "/subject/kind: unknown subject kind '" + kind_name + "'");
    }
    std::string subject_id;
    if (subject.contains("id")) {
      if (!subject.at("id").is_string() || subject.at("id").get<std::string>().empty()) {
        throw Error(ErrorCode::ValidationFailure, "/subject/id: expected a non-empty string");
      }
      subject_id = subject.at("id").get<std::string>();
    }
    TypeMix mix = kEqualMix;
    if (req.contains("type_mix")) {
      const auto& m = req.at("type_mix");
      if (!m.is_array() || m.size() != 3) throw Error(ErrorCode::ValidationFailure, "/type_mix: expected 3 weights");
      for (std::size_t i = 0; i < 3; ++i) {
        if (!m[i].is_number()) {
          throw Error(ErrorCode::ValidationFailure, "/type_mix/" + std::to_string(i) + ": expected a number");
        }
        mix[i] = m[i].get<double>();
      }
    }

    std::lock_guard lock(mutex_);
    const auto index = static_cast<std::uint64_t>(experiment_.sessions().size());
    const auto seed = derive_seed(options_.seed, index);
    const auto session_id = "s" + std::to_string(index + 1) + "-" + hex8(seed);
    if (subject_id.empty()) subject_id = "anon-" + std::to_string(index + 1);
    const auto s = experiment_.create_session(log_, session_id, subject_id, kind_name, mix, seed);
    return {201,
            {{"session_id", s.session_id},
             {"subject_id", s.subject_id},
             {"subject_kind", s.subject_kind},
             {"type_mix", s.type_mix},
             {"created_at", s.created_at}}};
  });
}

ApiResponse Service::next_trial(const std::string& session_id) {
  return guarded([&]() -> ApiResponse {
    std::lock_guard lock(mutex_);
    const auto trial = experiment_.serve_trial(log_, session_id);
    return {200, trial_view_json(trial, experiment_.fragments().at(trial.fragment_id), session_id)};
  });
}

ApiResponse Service::submit_guess(const std::string& session_id, const std::string& trial_id,
                                  const std::string& body) {
  return guarded([&]() -> ApiResponse {
    const Json req = parse_body(body);
    Response response;
    if (req.contains("response")) {
      if (!req.at("response").is_string()) throw Error(ErrorCode::MalformedResponse, "/response: expected a string");
      response = req.at("response").get<std::string>();
    } else if (req.contains("choice")) {
      if (!req.at("choice").is_number_integer()) throw Error(ErrorCode::MalformedResponse, "/choice: expected 0 or 1");
      response = req.at("choice").get<int>();
    } else {
      throw Error(ErrorCode::MalformedResponse, "/: expected 'response' or 'choice'");
    }

    std::lock_guard lock(mutex_);
    if (!experiment_.sessions().contains(session_id)) {
      throw Error(ErrorCode::UnknownSession, "no session '" + session_id + "'");
    }
    const auto& trials = experiment_.trials();
    const auto it = trials.find(trial_id);
    if (it == trials.end() || it->second.session_id != session_id) {
      throw Error(ErrorCode::UnknownTrial, "no trial '" + trial_id + "' in session '" + session_id + "'");
    }
    const auto& subject_id = experiment_.sessions().at(session_id).subject_id;
    const auto outcome = experiment_.record_guess(log_, trial_id, response, subject_id);
    return {200, {{"trial_id", trial_id}, {"correct", outcome.record.correct}, {"answer", outcome.answer}}};
  });
}

ApiResponse Service::analysis(const std::map<std::string, std::string>& params) {
  return guarded([&]() -> ApiResponse {
    auto get = [&](const char* key, const char* fallback) {
      auto it = params.find(key);
      return it == params.end() ? std::string(fallback) : it->second;
    };
    auto number = [&](const char* key, double fallback) {
      auto it = params.find(key);
      if (it == params.end()) return fallback;
      double v = 0;
      const auto& s = it->second;
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw Error(ErrorCode::ValidationFailure, std::string("/") + key + ": expected a number");
      }
      return v;
    };
    AnalysisOptions options;
    try {
      options = make_analysis_options(get("unit", "chars"), get("kind", "all"), get("trial_type", "1"),
                                      get("fit_range", ""), number("z", stats::kDefaultZ),
                                      static_cast<std::int64_t>(number("min_bucket_trials", stats::kDefaultMinBucketTrials)));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::InvalidArgument) throw Error(ErrorCode::ValidationFailure, e.detail());
      throw;
    }
    std::vector<Event> events;
    {
      std::lock_guard lock(mutex_);
      events = log_.replay();
    }
    return {200, to_json(analyze(events, options))};
  });
}

}  // namespace cloze
