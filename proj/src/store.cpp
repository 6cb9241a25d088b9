#include "cloze/store.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

#include "cloze/error.hpp"

namespace cloze {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::FragmentAdded: return "fragment_added";
    case EventKind::SessionCreated: return "session_created";
    case EventKind::TrialCreated: return "trial_created";
    case EventKind::GuessRecorded: return "guess_recorded";
    case EventKind::PoolUpdated: return "pool_updated";
  }
  return "unknown";
}

EventKind parse_event_kind(std::string_view name) {
  for (auto k : {EventKind::FragmentAdded, EventKind::SessionCreated, EventKind::TrialCreated,
                 EventKind::GuessRecorded, EventKind::PoolUpdated}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::StorageFailure, "unknown event kind '" + std::string(name) + "'");
}

namespace {

Json event_json(const Event& event, bool with_timestamp) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["seq"] = event.seq;
  j["kind"] = to_string(event.kind);
  if (with_timestamp) j["ts"] = event.timestamp;
  j["payload"] = event.payload;
  return j;
}

}  // namespace

std::string serialize_event(const Event& event) { return event_json(event, true).dump(); }

std::string serialize_event_without_timestamp(const Event& event) { return event_json(event, false).dump(); }

Event parse_event(std::string_view line) {
  try {
    const Json j = Json::parse(line);
    if (j.at("schema_version").get<int>() != kSchemaVersion) {
      throw Error(ErrorCode::StorageFailure, "unsupported schema_version " + j.at("schema_version").dump());
    }
    Event e;
    e.seq = j.at("seq").get<std::int64_t>();
    e.kind = parse_event_kind(j.at("kind").get<std::string>());
    e.timestamp = j.at("ts").get<std::string>();
    e.payload = j.at("payload");
    return e;
  } catch (const Json::exception& ex) {
    throw Error(ErrorCode::StorageFailure, std::string("malformed event line: ") + ex.what());
  }
}

// ---------------------------------------------------------------------------
// Validation

namespace {

enum class Field { String, NonEmptyString, Unsigned, Integer, Boolean, Number, Object, Array };

void expect(const Json& obj, const std::string& path, const char* name, Field type, bool nullable = false) {
  const std::string where = path + "/" + name;
  if (!obj.contains(name)) throw Error(ErrorCode::ValidationFailure, where + ": missing");
  const Json& v = obj.at(name);
  if (nullable && v.is_null()) return;
  bool ok = false;
  switch (type) {
    case Field::String: ok = v.is_string(); break;
    case Field::NonEmptyString: ok = v.is_string() && !v.get_ref<const std::string&>().empty(); break;
    case Field::Unsigned: ok = v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0); break;
    case Field::Integer: ok = v.is_number_integer(); break;
    case Field::Boolean: ok = v.is_boolean(); break;
    case Field::Number: ok = v.is_number(); break;
    case Field::Object: ok = v.is_object(); break;
    case Field::Array: ok = v.is_array(); break;
  }
  if (!ok) throw Error(ErrorCode::ValidationFailure, where + ": wrong type or empty");
}

void expect_one_of(const Json& obj, const std::string& path, const char* name,
                   std::initializer_list<std::string_view> allowed) {
  expect(obj, path, name, Field::String);
  const auto& v = obj.at(name).get_ref<const std::string&>();
  for (auto a : allowed) {
    if (v == a) return;
  }
  throw Error(ErrorCode::ValidationFailure, path + "/" + name + ": unexpected value '" + v + "'");
}

}  // namespace

void validate_payload(EventKind kind, const Json& p) {
  const std::string root = "/payload";
  if (!p.is_object()) throw Error(ErrorCode::ValidationFailure, root + ": expected object");
  switch (kind) {
    case EventKind::FragmentAdded:
      expect(p, root, "id", Field::NonEmptyString);
      expect(p, root, "text", Field::NonEmptyString);
      expect_one_of(p, root, "kind", {"poetry", "prose"});
      expect(p, root, "title", Field::String);
      expect(p, root, "author", Field::String);
      break;
    case EventKind::SessionCreated: {
      expect(p, root, "session_id", Field::NonEmptyString);
      expect(p, root, "subject_id", Field::NonEmptyString);
      expect(p, root, "subject_kind", Field::NonEmptyString);
      expect(p, root, "seed", Field::Unsigned);
      expect(p, root, "type_mix", Field::Array);
      const auto& mix = p.at("type_mix");
      if (mix.size() != 3) throw Error(ErrorCode::ValidationFailure, root + "/type_mix: expected 3 weights");
      for (std::size_t i = 0; i < 3; ++i) {
        if (!mix[i].is_number() || mix[i].get<double>() < 0.0) {
          throw Error(ErrorCode::ValidationFailure, root + "/type_mix/" + std::to_string(i) + ": expected weight >= 0");
        }
      }
      break;
    }
    case EventKind::TrialCreated: {
      expect(p, root, "trial_id", Field::NonEmptyString);
      expect(p, root, "session_id", Field::String);
      expect(p, root, "fragment_id", Field::NonEmptyString);
      expect_one_of(p, root, "fragment_kind", {"poetry", "prose"});
      expect(p, root, "trial_type", Field::Integer);
      const int type = p.at("trial_type").get<int>();
      if (type < 1 || type > 3) throw Error(ErrorCode::ValidationFailure, root + "/trial_type: expected 1, 2 or 3");
      expect(p, root, "decoy", Field::String, true);
      expect(p, root, "original_first", Field::Boolean);
      if (type == 1 && !p.at("decoy").is_null()) throw Error(ErrorCode::ValidationFailure, root + "/decoy: must be null for type 1");
      if (type == 3 && p.at("decoy").is_null()) throw Error(ErrorCode::ValidationFailure, root + "/decoy: required for type 3");
      expect(p, root, "target", Field::Object);
      const auto& t = p.at("target");
      const auto tp = root + "/target";
      expect(t, tp, "start", Field::Unsigned);
      expect(t, tp, "end", Field::Unsigned);
      expect(t, tp, "surface", Field::NonEmptyString);
      expect(t, tp, "length_chars", Field::Unsigned);
      expect(t, tp, "length_syllables", Field::Unsigned, true);
      if (t.at("end").get<std::int64_t>() - t.at("start").get<std::int64_t>() != t.at("length_chars").get<std::int64_t>()) {
        throw Error(ErrorCode::ValidationFailure, tp + "/length_chars: does not match offsets");
      }
      break;
    }
    case EventKind::GuessRecorded:
      expect(p, root, "trial_id", Field::NonEmptyString);
      expect(p, root, "session_id", Field::String);
      expect(p, root, "subject_id", Field::String);
      expect(p, root, "correct", Field::Boolean);
      if (!p.contains("response") || !(p.at("response").is_string() || p.at("response").is_number_integer())) {
        throw Error(ErrorCode::ValidationFailure, root + "/response: expected string or integer");
      }
      break;
    case EventKind::PoolUpdated:
      expect(p, root, "fragment_id", Field::NonEmptyString);
      expect(p, root, "start", Field::Unsigned);
      expect(p, root, "end", Field::Unsigned);
      expect(p, root, "word", Field::NonEmptyString);
      break;
  }
}

std::string utc_now_rfc3339() {
  const auto now = std::chrono::system_clock::now();
  const auto secs = std::chrono::time_point_cast<std::chrono::seconds>(now);
  const auto millis = std::chrono::duration_cast<std::chrono::milliseconds>(now - secs).count();
  const std::time_t t = std::chrono::system_clock::to_time_t(secs);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1,
                tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(millis));
  return buf;
}

// ---------------------------------------------------------------------------
// EventLog

namespace {

struct Scan {
  std::vector<Event> events;
  std::size_t committed_bytes = 0;
};

// Only newline-terminated lines are committed; a trailing partial line is a
// torn write and is ignored.
Scan scan_log(const std::string& contents, const std::string& origin) {
  Scan scan;
  std::size_t pos = 0;
  while (pos < contents.size()) {
    const auto eol = contents.find('\n', pos);
    if (eol == std::string::npos) break;
    const std::string_view line(contents.data() + pos, eol - pos);
    if (!line.empty()) {
      Event e;
      try {
        e = parse_event(line);
      } catch (const Error& ex) {
        throw Error(ErrorCode::StorageFailure, origin + ": corrupt record at byte " + std::to_string(pos) + ": " + ex.detail());
      }
      const auto expected = static_cast<std::int64_t>(scan.events.size()) + 1;
      if (e.seq != expected) {
        throw Error(ErrorCode::StorageFailure,
                    origin + ": seq " + std::to_string(e.seq) + " where " + std::to_string(expected) + " was expected");
      }
      scan.events.push_back(std::move(e));
    }
    pos = eol + 1;
    scan.committed_bytes = pos;
  }
  return scan;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::StorageFailure, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

EventLog EventLog::in_memory(Options options) {
  EventLog log;
  log.options_ = std::move(options);
  return log;
}

EventLog EventLog::open(const std::filesystem::path& path, Options options) {
  EventLog log;
  log.options_ = std::move(options);
  log.path_ = path;
  std::string contents;
  if (std::filesystem::exists(path)) contents = read_file(path);
  auto scan = scan_log(contents, path.string());

  log.fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_CLOEXEC, 0644);
  if (log.fd_ < 0) throw Error(ErrorCode::StorageFailure, "cannot open " + path.string() + ": " + std::strerror(errno));
  if (scan.committed_bytes < contents.size()) {
    if (::ftruncate(log.fd_, static_cast<off_t>(scan.committed_bytes)) != 0) {
      throw Error(ErrorCode::StorageFailure, "cannot drop torn tail of " + path.string());
    }
  }
  if (::lseek(log.fd_, 0, SEEK_END) < 0) throw Error(ErrorCode::StorageFailure, "cannot seek " + path.string());
  log.events_ = std::move(scan.events);
  log.last_seq_ = static_cast<std::int64_t>(log.events_.size());
  return log;
}

std::vector<Event> EventLog::read(const std::filesystem::path& path) {
  return scan_log(read_file(path), path.string()).events;
}

EventLog::EventLog(EventLog&& other) noexcept
    : path_(std::move(other.path_)),
      options_(std::move(other.options_)),
      fd_(std::exchange(other.fd_, -1)),
      last_seq_(other.last_seq_),
      events_(std::move(other.events_)),
      mutex_(std::move(other.mutex_)) {}

EventLog& EventLog::operator=(EventLog&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    path_ = std::move(other.path_);
    options_ = std::move(other.options_);
    fd_ = std::exchange(other.fd_, -1);
    last_seq_ = other.last_seq_;
    events_ = std::move(other.events_);
    mutex_ = std::move(other.mutex_);
  }
  return *this;
}

EventLog::~EventLog() {
  if (fd_ >= 0) ::close(fd_);
}

Event EventLog::append(EventKind kind, Json payload) {
  validate_payload(kind, payload);
  std::lock_guard lock(*mutex_);
  Event e;
  e.seq = last_seq_ + 1;
  e.kind = kind;
  e.timestamp = options_.clock ? options_.clock() : std::string{};
  e.payload = std::move(payload);

  if (fd_ >= 0) {
    const std::string line = serialize_event(e) + "\n";
    const off_t start = ::lseek(fd_, 0, SEEK_CUR);
    std::size_t written = 0;
    while (written < line.size()) {
      const auto n = ::write(fd_, line.data() + written, line.size() - written);
      if (n < 0) {
        if (errno == EINTR) continue;
        const std::string why = std::strerror(errno);
        // Leave no partial record behind for the next append.
        if (::ftruncate(fd_, start) == 0) ::lseek(fd_, start, SEEK_SET);
        throw Error(ErrorCode::StorageFailure, "append to " + path_->string() + " failed: " + why);
      }
      written += static_cast<std::size_t>(n);
    }
    if (options_.sync && ::fsync(fd_) != 0) {
      throw Error(ErrorCode::StorageFailure, "fsync of " + path_->string() + " failed: " + std::strerror(errno));
    }
  }
  last_seq_ = e.seq;
  events_.push_back(e);
  return e;
}

std::vector<Event> EventLog::replay(std::int64_t from_seq) const {
  if (from_seq < 1) throw Error(ErrorCode::InvalidArgument, "replay starts at seq 1 or later");
  std::lock_guard lock(*mutex_);
  if (from_seq > last_seq_) return {};
  return {events_.begin() + (from_seq - 1), events_.end()};
}

std::int64_t EventLog::last_seq() const {
  std::lock_guard lock(*mutex_);
  return last_seq_;
}

// ---------------------------------------------------------------------------
// Codecs

Json fragment_payload(const Fragment& f) {
  return {{"id", f.id}, {"text", f.text}, {"kind", to_string(f.kind)}, {"title", f.title}, {"author", f.author}};
}

Fragment fragment_from_payload(const Json& p) {
  Fragment f;
  f.id = p.at("id").get<std::string>();
  f.text = p.at("text").get<std::string>();
  f.kind = parse_text_kind(p.at("kind").get<std::string>());
  f.title = p.at("title").get<std::string>();
  f.author = p.at("author").get<std::string>();
  return f;
}

Json trial_payload(const Trial& t, std::string_view session_id) {
  Json target = {{"start", t.target.start},
                 {"end", t.target.end},
                 {"surface", t.target.surface},
                 {"length_chars", t.target.length_chars},
                 {"length_syllables", nullptr}};
  if (t.target.length_syllables) target["length_syllables"] = *t.target.length_syllables;
  Json j = {{"trial_id", t.id},
            {"session_id", session_id},
            {"fragment_id", t.fragment_id},
            {"fragment_kind", to_string(t.fragment_kind)},
            {"trial_type", static_cast<int>(t.type)},
            {"decoy", nullptr},
            {"original_first", t.original_first},
            {"target", target}};
  if (t.decoy) j["decoy"] = *t.decoy;
  return j;
}

Trial trial_from_payload(const Json& p, const std::string& created_at) {
  Trial t;
  t.id = p.at("trial_id").get<std::string>();
  t.fragment_id = p.at("fragment_id").get<std::string>();
  t.fragment_kind = parse_text_kind(p.at("fragment_kind").get<std::string>());
  t.type = trial_type_from_int(p.at("trial_type").get<int>());
  if (!p.at("decoy").is_null()) t.decoy = p.at("decoy").get<std::string>();
  t.original_first = p.at("original_first").get<bool>();
  const auto& target = p.at("target");
  t.target.fragment_id = t.fragment_id;
  t.target.start = target.at("start").get<std::size_t>();
  t.target.end = target.at("end").get<std::size_t>();
  t.target.surface = target.at("surface").get<std::string>();
  t.target.length_chars = target.at("length_chars").get<int>();
  if (!target.at("length_syllables").is_null()) t.target.length_syllables = target.at("length_syllables").get<int>();
  t.created_at = created_at;
  return t;
}

Json response_json(const Response& response) {
  return std::visit([](const auto& v) { return Json(v); }, response);
}

Response response_from_json(const Json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return value.get<int>();
  throw Error(ErrorCode::MalformedResponse, "response must be a string or an integer choice");
}

Json guess_payload(const GuessRecord& r, std::string_view session_id) {
  return {{"trial_id", r.trial_id},
          {"session_id", session_id},
          {"subject_id", r.subject_id},
          {"response", response_json(r.response)},
          {"correct", r.correct}};
}

GuessRecord guess_from_payload(const Json& p, const std::string& timestamp) {
  GuessRecord r;
  r.trial_id = p.at("trial_id").get<std::string>();
  r.subject_id = p.at("subject_id").get<std::string>();
  r.response = response_from_json(p.at("response"));
  r.correct = p.at("correct").get<bool>();
  r.timestamp = timestamp;
  return r;
}

Json pool_payload(const TargetKey& key, const std::string& word) {
  return {{"fragment_id", key.fragment_id}, {"start", key.start}, {"end", key.end}, {"word", word}};
}

}  // namespace cloze
