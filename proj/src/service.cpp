#include "pics/service.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <thread>
#include <vector>

#include "pics/io.hpp"
#include "pics/volume.hpp"

// After Eigen: resolv.h, pulled in by httplib, defines a `_res` macro.
#include <httplib.h>

namespace pics::service {

using nlohmann::json;

namespace {

constexpr const char* kJson = "application/json";

struct HttpError {
  int status;
  std::string code;
  std::string message;
};

[[noreturn]] void fail(int status, std::string code, std::string message) {
  throw HttpError{status, std::move(code), std::move(message)};
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    json j = json::parse(req.body);
    if (!j.is_object()) fail(400, "MalformedDocument", "request body must be a JSON object");
    return j;
  } catch (const json::exception& e) {
    fail(400, "MalformedDocument", e.what());
  }
}

template <typename T>
std::optional<T> optional_field(const json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end() || it->is_null()) return std::nullopt;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    fail(400, "MalformedDocument", std::string("field '") + key + "' has the wrong type");
  }
}

std::string slice_name(std::size_t slice) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "slice_%03zu", slice);
  return buf;
}

}  // namespace

std::string to_string(RunState state) {
  switch (state) {
    case RunState::Idle: return "idle";
    case RunState::Running: return "running";
    case RunState::Paused: return "paused";
    case RunState::Done: return "done";
  }
  return "unknown";
}

json iteration_event(const IterationRecord& r, const Knots* knots) {
  json e{{"iter", r.iteration},
         {"j_int", r.loss.j_int},
         {"j_ext", r.loss.j_ext},
         {"j_shape", r.loss.j_shape},
         {"j_total", r.loss.j_total},
         {"opi", r.has_opi() ? json(r.opi) : json(nullptr)},
         {"mu", r.mu}};
  if (knots) e["knots"] = knots_to_json(*knots);
  return e;
}

// One SSE message log per run segment (run -> done/paused). Readers replay it
// from the start and block for new entries until a terminal event arrives.
struct EventLog {
  std::vector<std::string> messages;
  bool closed = false;
};

class Session {
 public:
  Session(std::vector<GrayImage> slices, std::vector<std::string> names)
      : slices_(std::move(slices)), names_(std::move(names)) {}

  ~Session() { stop(); }

  std::mutex mutex;
  std::condition_variable changed;

  const GrayImage& image() const { return slices_[slice]; }
  std::size_t slice_count() const { return slices_.size(); }
  const std::string& name() const { return names_[slice]; }

  Bounds bounds() const {
    return {static_cast<double>(image().width()), static_cast<double>(image().height())};
  }

  void stop() {
    control.request_pause();
    if (worker.joinable()) worker.join();
  }

  std::size_t slice = 0;
  std::optional<Knots> knots;
  Hyperparameters hyper = builtin_presets().at("disk").hyper;
  std::string preset = "disk";
  RunState state = RunState::Idle;
  std::unique_ptr<ContourOptimizer> optimizer;
  ControlChannel control;
  std::thread worker;
  std::shared_ptr<EventLog> events;
  // Mirrors of the optimizer's progress, written under `mutex` so readers
  // never touch a running optimizer.
  std::size_t iterations = 0;
  double mu = 0.0;
  StopReason stop_reason = StopReason::None;

 private:
  std::vector<GrayImage> slices_;
  std::vector<std::string> names_;
};

namespace {

json describe(const Session& s, const std::string& id) {
  json j{{"id", id},
         {"slices", s.slice_count()},
         {"slice", s.slice},
         {"width", s.image().width()},
         {"height", s.image().height()},
         {"state", to_string(s.state)},
         {"preset", s.preset},
         {"hyperparameters", to_json(s.hyper)}};
  if (s.knots) {
    j["knots"] = knots_to_json(*s.knots);
    j["pinned"] = s.knots->pinned();
  } else {
    j["knots"] = nullptr;
    j["pinned"] = nullptr;
  }
  j["iterations"] = s.iterations;
  j["mu"] = s.optimizer ? s.mu : s.hyper.mu;
  j["stop"] = to_string(s.stop_reason);
  return j;
}

std::string sse(const std::string& event, const json& data, std::optional<int> id = {}) {
  std::string out;
  if (id) out += "id: " + std::to_string(*id) + "\n";
  out += "event: " + event + "\n";
  out += "data: " + data.dump() + "\n\n";
  return out;
}

std::vector<KnotEdit> parse_edits(const json& body) {
  auto it = body.find("edits");
  if (it == body.end() || !it->is_array()) fail(400, "MalformedDocument", "'edits' must be an array");
  std::vector<KnotEdit> edits;
  for (const auto& e : *it) {
    if (!e.is_object()) fail(400, "MalformedDocument", "each edit must be an object");
    KnotEdit edit;
    const auto index = optional_field<long long>(e, "index");
    if (!index) fail(400, "MalformedDocument", "edit without 'index'");
    edit.index = static_cast<Eigen::Index>(*index);
    const auto x = optional_field<double>(e, "x");
    const auto y = optional_field<double>(e, "y");
    if (x.has_value() != y.has_value()) {
      fail(400, "MalformedDocument", "an edit moves a knot with both 'x' and 'y'");
    }
    if (x) edit.position = Point(*x, *y);
    edit.pinned = optional_field<bool>(e, "pinned");
    edits.push_back(edit);
  }
  return edits;
}

void resolve_hyper(Session& s, const json& body) {
  if (auto preset = optional_field<std::string>(body, "preset")) {
    s.hyper = builtin_presets().at(*preset).hyper;
    s.preset = *preset;
  }
  if (auto it = body.find("hyperparameters"); it != body.end() && !it->is_null()) {
    Hyperparameters h = hyper_from_json(*it, s.hyper);
    h.validate();
    s.hyper = h;
    s.preset = "custom";
  }
}

}  // namespace

AnnotationService::AnnotationService(ServiceConfig config) : config_(std::move(config)) {
  if (config_.event_every < 1) throw InvalidArgument("event_every must be >= 1");
}

AnnotationService::~AnnotationService() { shutdown(); }

void AnnotationService::shutdown() {
  std::map<std::string, std::shared_ptr<Session>> sessions;
  {
    std::lock_guard lock(mutex_);
    sessions = sessions_;
  }
  for (auto& [id, s] : sessions) {
    std::thread worker;
    {
      std::lock_guard lock(s->mutex);
      s->control.request_pause();
      worker = std::move(s->worker);
    }
    if (worker.joinable()) worker.join();
  }
}

std::shared_ptr<Session> AnnotationService::find(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) fail(404, "NotFound", "no session '" + id + "'");
  return it->second;
}

std::string AnnotationService::add(std::shared_ptr<Session> session) {
  std::lock_guard lock(mutex_);
  const std::string id = "s" + std::to_string(next_id_++);
  sessions_.emplace(id, std::move(session));
  return id;
}

void AnnotationService::mount(httplib::Server& server) {
  // Every handler body runs through `guard`, which maps library errors to
  // status codes and JSON error bodies.
  auto guard = [](auto body) {
    return [body](const httplib::Request& req, httplib::Response& res) {
      int status = 500;
      std::string code = "Internal";
      std::string message;
      try {
        body(req, res);
        return;
      } catch (const HttpError& e) {
        status = e.status;
        code = e.code;
        message = e.message;
      } catch (const Error& e) {
        switch (e.code()) {
          case ErrorCode::UnknownPreset:
          case ErrorCode::MalformedDocument:
            status = 400;
            break;
          case ErrorCode::IoError:
            status = 500;
            break;
          default:
            status = 422;
        }
        code = pics::to_string(e.code());
        message = e.what();
      } catch (const std::exception& e) {
        message = e.what();
      }
      res.status = status;
      res.set_content(json{{"error", code}, {"message", message}}.dump(), kJson);
    };
  };

  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Methods", "GET, POST, PATCH, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  server.Post("/sessions", guard([this](const httplib::Request& req, httplib::Response& res) {
    std::vector<GrayImage> slices;
    std::vector<std::string> names;
    auto take = [&](const std::string& name, const std::string& content) {
      const auto* data = reinterpret_cast<const std::uint8_t*>(content.data());
      slices.push_back(decode_gray(std::span(data, content.size())));
      names.push_back(name.empty() ? slice_name(names.size()) : name);
    };
    if (req.is_multipart_form_data()) {
      for (const auto& [field, file] : req.files) take(file.filename, file.content);
    } else if (!req.body.empty()) {
      take("", req.body);
    }
    if (slices.empty()) fail(422, "InvalidArgument", "no images uploaded");
    for (std::size_t i = 1; i < slices.size(); ++i) {
      if (slices[i].width() != slices[0].width() || slices[i].height() != slices[0].height()) {
        fail(422, "DimensionMismatch",
             "image " + names[i] + " is " + std::to_string(slices[i].width()) + "x" +
                 std::to_string(slices[i].height()) + ", expected " +
                 std::to_string(slices[0].width()) + "x" + std::to_string(slices[0].height()));
      }
    }
    auto session = std::make_shared<Session>(std::move(slices), std::move(names));
    const std::string id = add(session);
    std::lock_guard lock(session->mutex);
    res.status = 201;
    res.set_content(describe(*session, id).dump(), kJson);
  }));

  server.Get(R"(/sessions/([^/]+))",
             guard([this](const httplib::Request& req, httplib::Response& res) {
               const std::string id = req.matches[1];
               auto s = find(id);
               std::lock_guard lock(s->mutex);
               res.set_content(describe(*s, id).dump(), kJson);
             }));

  server.Post(R"(/sessions/([^/]+)/init)",
              guard([this](const httplib::Request& req, httplib::Response& res) {
                const std::string id = req.matches[1];
                auto s = find(id);
                const json body = parse_body(req);
                std::lock_guard lock(s->mutex);
                if (s->state == RunState::Running) fail(409, "Conflict", "session is running");
                const auto x = optional_field<double>(body, "x");
                const auto y = optional_field<double>(body, "y");
                if (!x || !y) fail(400, "MalformedDocument", "'x' and 'y' are required");
                resolve_hyper(*s, body);
                Hyperparameters h = s->hyper;
                if (auto r = optional_field<double>(body, "radius")) h.init_radius = *r;
                if (auto n = optional_field<int>(body, "n_knots")) h.n_knots = *n;
                h.validate();
                const Bounds b = s->bounds();
                Knots knots = init_from_click(Point(*x, *y), h.init_radius, h.n_knots, b.width,
                                              b.height);
                s->hyper = h;
                s->knots = std::move(knots);
                s->optimizer.reset();
                s->iterations = 0;
                s->stop_reason = StopReason::None;
                s->state = RunState::Idle;
                res.set_content(describe(*s, id).dump(), kJson);
              }));

  server.Post(R"(/sessions/([^/]+)/run)",
              guard([this](const httplib::Request& req, httplib::Response& res) {
                const std::string id = req.matches[1];
                auto s = find(id);
                const json body = parse_body(req);
                std::unique_lock lock(s->mutex);
                if (s->state == RunState::Running) fail(409, "Conflict", "session is already running");
                if (!s->knots) fail(409, "Conflict", "session has no contour; POST init first");
                const Hyperparameters before = s->hyper;
                resolve_hyper(*s, body);
                if (auto m = optional_field<int>(body, "max_iters")) {
                  Hyperparameters h = s->hyper;
                  h.max_iters = *m;
                  h.validate();
                  s->hyper = h;
                }
                if (s->worker.joinable()) s->worker.join();

                if (!s->optimizer || !(s->hyper == before)) {
                  s->optimizer = std::make_unique<ContourOptimizer>(s->image(), *s->knots, s->hyper,
                                                                    config_.threads);
                } else if (s->optimizer->finished()) {
                  s->optimizer->restart();
                }
                s->iterations = s->optimizer->trace().size();
                s->mu = s->optimizer->mu();
                s->stop_reason = StopReason::None;
                s->control.clear_pause();
                s->events = std::make_shared<EventLog>();
                s->state = RunState::Running;

                const int every = config_.event_every;
                const bool with_knots = config_.stream_knots;
                Session* raw = s.get();
                s->worker = std::thread([raw, every, with_knots] {
                  Session& ss = *raw;
                  std::optional<std::string> pending;
                  auto observer = [&](const IterationRecord& r, const Knots& k) {
                    std::string msg = sse("iteration", iteration_event(r, with_knots ? &k : nullptr),
                                          r.iteration);
                    std::lock_guard guard(ss.mutex);
                    ss.knots = k;
                    ss.iterations = static_cast<std::size_t>(r.iteration);
                    ss.mu = ss.optimizer->mu();
                    if (r.iteration % every == 0) {
                      ss.events->messages.push_back(std::move(msg));
                      pending.reset();
                      ss.changed.notify_all();
                    } else {
                      pending = std::move(msg);
                    }
                  };
                  StopReason reason = StopReason::None;
                  std::string error;
                  try {
                    reason = ss.optimizer->run(observer, &ss.control);
                  } catch (const std::exception& e) {
                    error = e.what();
                  }
                  std::lock_guard guard(ss.mutex);
                  if (pending) ss.events->messages.push_back(std::move(*pending));
                  // Edits that arrived after the last boundary are applied now
                  // so they are not lost when the loop ends.
                  for (const auto& batch : ss.control.take_edits()) {
                    try {
                      ss.optimizer->apply_edits(batch);
                    } catch (const InvalidEdit& e) {
                      ss.control.report_rejection(e.what());
                    }
                  }
                  ss.knots = ss.optimizer->knots();
                  ss.iterations = ss.optimizer->trace().size();
                  ss.mu = ss.optimizer->mu();
                  ss.stop_reason = reason;
                  const json summary{{"iterations", ss.optimizer->trace().size()},
                                     {"reason", to_string(reason)},
                                     {"mu", ss.optimizer->mu()}};
                  if (!error.empty()) {
                    ss.state = RunState::Done;
                    ss.events->messages.push_back(sse("error", json{{"message", error}}));
                  } else if (reason == StopReason::Paused) {
                    ss.state = RunState::Paused;
                    ss.events->messages.push_back(sse("paused", summary));
                  } else {
                    ss.state = RunState::Done;
                    ss.events->messages.push_back(sse("done", summary));
                  }
                  ss.events->closed = true;
                  ss.changed.notify_all();
                });
                res.set_content(describe(*s, id).dump(), kJson);
              }));

  server.Post(R"(/sessions/([^/]+)/pause)",
              guard([this](const httplib::Request& req, httplib::Response& res) {
                const std::string id = req.matches[1];
                auto s = find(id);
                std::thread worker;
                {
                  std::lock_guard lock(s->mutex);
                  if (s->state != RunState::Running) {
                    fail(409, "Conflict", "session is " + to_string(s->state) + ", not running");
                  }
                  s->control.request_pause();
                  worker = std::move(s->worker);
                }
                if (worker.joinable()) worker.join();
                std::lock_guard lock(s->mutex);
                res.set_content(describe(*s, id).dump(), kJson);
              }));

  server.Patch(R"(/sessions/([^/]+)/knots)",
               guard([this](const httplib::Request& req, httplib::Response& res) {
                 const std::string id = req.matches[1];
                 auto s = find(id);
                 const json body = parse_body(req);
                 std::vector<KnotEdit> edits = parse_edits(body);
                 std::lock_guard lock(s->mutex);
                 if (!s->knots) fail(409, "Conflict", "session has no contour; POST init first");
                 // Validated against the current knots; a running loop applies
                 // the batch at its next iteration boundary.
                 Knots edited = apply_knot_edits(*s->knots, edits, s->bounds());
                 json out{{"queued", s->state == RunState::Running}};
                 if (s->state == RunState::Running) {
                   s->control.push_edits(std::move(edits));
                 } else {
                   if (s->optimizer) {
                     s->optimizer->apply_edits(edits);
                     s->knots = s->optimizer->knots();
                   } else {
                     s->knots = std::move(edited);
                   }
                   edited = *s->knots;
                 }
                 out["knots"] = knots_to_json(edited);
                 out["pinned"] = edited.pinned();
                 res.set_content(out.dump(), kJson);
               }));

  server.Get(R"(/sessions/([^/]+)/events)",
             guard([this](const httplib::Request& req, httplib::Response& res) {
               const std::string id = req.matches[1];
               auto s = find(id);
               std::shared_ptr<EventLog> log;
               {
                 std::lock_guard lock(s->mutex);
                 log = s->events;
               }
               if (!log) fail(409, "Conflict", "no run has been started on this session");
               auto cursor = std::make_shared<std::size_t>(0);
               res.set_header("Cache-Control", "no-cache");
               res.set_chunked_content_provider(
                   "text/event-stream", [s, log, cursor](std::size_t, httplib::DataSink& sink) {
                     std::vector<std::string> batch;
                     bool closed = false;
                     {
                       std::unique_lock lock(s->mutex);
                       s->changed.wait_for(lock, std::chrono::milliseconds(200), [&] {
                         return log->messages.size() > *cursor || log->closed;
                       });
                       batch.assign(log->messages.begin() + static_cast<std::ptrdiff_t>(*cursor),
                                    log->messages.end());
                       *cursor = log->messages.size();
                       closed = log->closed;
                     }
                     for (const auto& m : batch) {
                       if (!sink.write(m.data(), m.size())) return false;
                     }
                     if (closed) {
                       sink.done();
                     } else if (batch.empty()) {
                       // Comment line keeps idle connections alive and
                       // detects clients that went away.
                       static const std::string ping = ":\n\n";
                       if (!sink.write(ping.data(), ping.size())) return false;
                     }
                     return true;
                   });
             }));

  server.Get(R"(/sessions/([^/]+)/export)",
             guard([this](const httplib::Request& req, httplib::Response& res) {
               const std::string id = req.matches[1];
               auto s = find(id);
               std::lock_guard lock(s->mutex);
               if (!s->knots) fail(409, "Conflict", "session has no contour; POST init first");
               const GrayImage& image = s->image();
               Hyperparameters h = s->hyper;
               if (s->optimizer) h.mu = s->mu;
               const LossBreakdown loss = total_loss(image, image_gradient(image), *s->knots, h);
               const AnnotationRecord record{s->name(), image.width(), image.height(), *s->knots,
                                             h,         loss,          std::nullopt,   kToolVersion};
               const std::string doc = export_annotation(record);
               const Mask mask =
                   contour_mask(*s->knots, image.width(), image.height(), h.samples_per_segment);
               const auto pgm = encode_mask_pgm(mask);
               const std::string pgm_text(pgm.begin(), pgm.end());
               if (config_.workdir) {
                 const auto dir = *config_.workdir / id;
                 std::filesystem::create_directories(dir);
                 const std::string stem = slice_name(s->slice);
                 write_file(dir / (stem + ".json"),
                            std::span(reinterpret_cast<const std::uint8_t*>(doc.data()), doc.size()));
                 write_file(dir / (stem + "_mask.pgm"), pgm);
               }
               const json out{{"slice", s->slice},
                              {"annotation", json::parse(doc)},
                              {"mask_pgm_base64", httplib::detail::base64_encode(pgm_text)}};
               res.set_content(out.dump(), kJson);
             }));

  server.Post(R"(/sessions/([^/]+)/next-slice)",
              guard([this](const httplib::Request& req, httplib::Response& res) {
                const std::string id = req.matches[1];
                auto s = find(id);
                std::lock_guard lock(s->mutex);
                if (s->state == RunState::Running) fail(409, "Conflict", "session is running");
                if (s->slice + 1 >= s->slice_count()) fail(409, "Conflict", "already on the last slice");
                if (!s->knots) fail(409, "Conflict", "session has no contour; POST init first");
                if (s->worker.joinable()) s->worker.join();
                // Warm start: the current knots seed the next slice.
                ++s->slice;
                s->optimizer.reset();
                s->iterations = 0;
                s->stop_reason = StopReason::None;
                s->events.reset();
                s->state = RunState::Idle;
                res.set_content(describe(*s, id).dump(), kJson);
              }));
}

}  // namespace pics::service
