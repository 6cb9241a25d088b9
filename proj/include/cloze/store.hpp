#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cloze/corpus.hpp"
#include "cloze/trials.hpp"

namespace cloze {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

enum class EventKind { FragmentAdded, SessionCreated, TrialCreated, GuessRecorded, PoolUpdated };

std::string_view to_string(EventKind kind);
EventKind parse_event_kind(std::string_view name);

struct Event {
  std::int64_t seq = 0;
  EventKind kind = EventKind::FragmentAdded;
  std::string timestamp;  // RFC 3339, UTC
  Json payload;
};

// One JSON object per line: schema_version, seq, kind, ts, payload.
std::string serialize_event(const Event& event);
// The same line with `ts` removed, for determinism comparisons.
std::string serialize_event_without_timestamp(const Event& event);
// Throws StorageFailure on malformed lines.
Event parse_event(std::string_view line);

// Throws ValidationFailure naming the offending field path.
void validate_payload(EventKind kind, const Json& payload);

std::string utc_now_rfc3339();

// Append-only JSON-lines event store with a single serialized writer.
// A record counts as written once its terminating newline is on disk; a torn
// tail is dropped when the log is opened for writing.
class EventLog {
 public:
  using Clock = std::function<std::string()>;

  struct Options {
    // fsync after every append; otherwise appends are durable against
    // process crashes but not power loss.
    bool sync = false;
    Clock clock = utc_now_rfc3339;
  };

  static EventLog in_memory(Options options);
  static EventLog in_memory() { return in_memory(Options{}); }
  // Creates the file when missing.
  static EventLog open(const std::filesystem::path& path, Options options);
  static EventLog open(const std::filesystem::path& path) { return open(path, Options{}); }

  // Committed events of a log file, without modifying it.
  static std::vector<Event> read(const std::filesystem::path& path);

  EventLog(EventLog&&) noexcept;
  EventLog& operator=(EventLog&&) noexcept;
  ~EventLog();

  // Validates, assigns the next seq, persists, then returns the event.
  Event append(EventKind kind, Json payload);

  // Events with seq >= from_seq, in order.
  std::vector<Event> replay(std::int64_t from_seq = 1) const;

  std::int64_t last_seq() const;
  const std::optional<std::filesystem::path>& path() const { return path_; }

 private:
  EventLog() = default;

  std::optional<std::filesystem::path> path_;
  Options options_;
  int fd_ = -1;
  std::int64_t last_seq_ = 0;
  std::vector<Event> events_;  // mirror of the committed log
  mutable std::unique_ptr<std::mutex> mutex_ = std::make_unique<std::mutex>();
};

// Payload codecs.
Json fragment_payload(const Fragment& fragment);
Fragment fragment_from_payload(const Json& payload);

Json trial_payload(const Trial& trial, std::string_view session_id = {});
Trial trial_from_payload(const Json& payload, const std::string& created_at = {});

Json response_json(const Response& response);
Response response_from_json(const Json& value);

Json guess_payload(const GuessRecord& record, std::string_view session_id = {});
GuessRecord guess_from_payload(const Json& payload, const std::string& timestamp = {});

Json pool_payload(const TargetKey& key, const std::string& word);

}  // namespace cloze
