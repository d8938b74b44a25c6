#pragma once

// HTTP session service: REST routes plus a server-sent event stream of
// optimization iterations.

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <json.hpp>

#include "pics/optimizer.hpp"

namespace httplib {
class Server;
}

namespace pics::service {

struct ServiceConfig {
  /// When set, every export is also written under <workdir>/<session id>/.
  std::optional<std::filesystem::path> workdir;
  /// Emit an iteration event every `event_every` iterations (the last
  /// iteration before a stop or pause is always sent).
  int event_every = 1;
  /// Include the knot list in iteration events.
  bool stream_knots = true;
  int threads = default_thread_count();
};

enum class RunState { Idle, Running, Paused, Done };

std::string to_string(RunState state);

class Session;

class AnnotationService {
 public:
  explicit AnnotationService(ServiceConfig config = {});
  ~AnnotationService();

  AnnotationService(const AnnotationService&) = delete;
  AnnotationService& operator=(const AnnotationService&) = delete;

  /// Registers all routes on `server`.
  void mount(httplib::Server& server);

  /// Stops every running optimization and joins its worker.
  void shutdown();

  const ServiceConfig& config() const { return config_; }

 private:
  std::shared_ptr<Session> find(const std::string& id) const;
  std::string add(std::shared_ptr<Session> session);

  ServiceConfig config_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  unsigned long next_id_ = 1;
};

/// JSON payload of one iteration event; field names are shared with the
/// trace CSV columns.
nlohmann::json iteration_event(const IterationRecord& record, const Knots* knots);

}  // namespace pics::service
