#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <string>

#include "cloze/error.hpp"
#include "cloze/experiment.hpp"
#include "cloze/store.hpp"

namespace httplib {
class Server;
}

namespace cloze {

struct ApiResponse {
  int status = 200;
  Json body;
};

// Error envelope: {"error": code, "detail": text}.
ApiResponse error_response(const Error& error);
int http_status(ErrorCode code);

struct ServiceOptions {
  std::uint64_t seed = 0;
};

// Transport-independent handlers for the trial API. One mutex serializes
// every handler, so the log sees appends in arrival order.
//
//   POST /sessions                          create_session
//   GET  /sessions/{id}/trial               next_trial
//   POST /sessions/{id}/trials/{tid}/guess  submit_guess
//   GET  /analysis                          analysis
class Service {
 public:
  Service(Experiment& experiment, EventLog& log, ServiceOptions options = {});

  ApiResponse create_session(const std::string& body);
  ApiResponse next_trial(const std::string& session_id);
  ApiResponse submit_guess(const std::string& session_id, const std::string& trial_id, const std::string& body);
  // Recognized parameters: unit, kind, trial_type, fit_range, z, min_bucket_trials.
  ApiResponse analysis(const std::map<std::string, std::string>& params);

  // Registers the four routes on an httplib server.
  void bind(httplib::Server& server);

 private:
  Experiment& experiment_;
  EventLog& log_;
  ServiceOptions options_;
  std::mutex mutex_;
};

// The trial as shown to a player: no target surface for type 1, no
// original/replacement labelling for types 2 and 3.
Json trial_view_json(const Trial& trial, const Fragment& fragment, const std::string& session_id);

}  // namespace cloze
