#include <httplib.h>

#include "cloze/service.hpp"

namespace cloze {

namespace {

void send(httplib::Response& res, const ApiResponse& api) {
  res.status = api.status;
  res.set_header("Access-Control-Allow-Origin", "*");
  res.set_content(api.body.dump(), "application/json");
}

}  // namespace

void Service::bind(httplib::Server& server) {
  server.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, create_session(req.body));
  });
  server.Get(R"(/sessions/([^/]+)/trial)", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, next_trial(req.matches[1]));
  });
  server.Post(R"(/sessions/([^/]+)/trials/([^/]+)/guess)", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, submit_guess(req.matches[1], req.matches[2], req.body));
  });
  server.Get("/analysis", [this](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> params;
    for (const auto& [k, v] : req.params) params[k] = v;
    send(res, analysis(params));
  });
  server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.status = 204;
  });
}

}  // namespace cloze
