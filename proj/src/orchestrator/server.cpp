#include "restore/server.hpp"

#include <httplib.h>

#include <condition_variable>
#include <map>
#include <mutex>

#include "restore/serialize.hpp"
#include "restore/session.hpp"

namespace restore::run {

namespace {

// Mutex that admits waiters in arrival order.
class FifoLock {
 public:
  void lock() {
    std::unique_lock<std::mutex> l(mu_);
    const std::uint64_t ticket = next_++;
    cv_.wait(l, [&] { return serving_ == ticket; });
  }
  void unlock() {
    {
      std::lock_guard<std::mutex> l(mu_);
      ++serving_;
    }
    cv_.notify_all();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::uint64_t next_ = 0;
  std::uint64_t serving_ = 0;
};

struct Snapshot {
  std::string state;
  std::string belief;
  std::string plan;
  std::string log;
};

struct Entry {
  std::unique_ptr<Session> session;
  FifoLock lock;
  std::mutex snap_mu;
  std::shared_ptr<const Snapshot> snap;

  std::shared_ptr<const Snapshot> read() {
    std::lock_guard<std::mutex> l(snap_mu);
    return snap;
  }

  // Called with `lock` held.
  void publish() {
    Session& s = *session;
    const CaseModel& c = s.model();
    auto next = std::make_shared<Snapshot>();
    io::Json plan;
    if (!s.done()) {
      plan = io::to_json(c, s.plan());
    } else {
      plan["type"] = "decision";
      plan["t"] = s.t();
      plan["targets"] = io::Json::object();
      plan["done"] = true;
    }
    io::Json state = io::to_json(c, s.world().view());
    state["total_cost"] = s.total_cost();
    state["done"] = s.done();
    state["finished"] = s.world().finished();
    state["interactive"] = s.config().interactive;
    io::Json curve = io::Json::array();
    for (const auto& r : s.steps()) curve.push_back(r.served_fraction);
    state["curve"] = curve;
    next->state = state.dump();
    next->belief = io::to_json(c, s.belief()).dump();
    next->plan = plan.dump();
    next->log = s.log_jsonl();
    std::lock_guard<std::mutex> l(snap_mu);
    snap = std::move(next);
  }
};

void reply_error(httplib::Response& res, int status, const std::string& msg) {
  res.status = status;
  res.set_content(io::Json{{"error", msg}}.dump(), "application/json");
}

nlohmann::json body_json(const httplib::Request& req) {
  if (req.body.empty()) return nlohmann::json::object();
  nlohmann::json j = nlohmann::json::parse(req.body);
  if (!j.is_object()) throw SessionError("request body must be a JSON object");
  return j;
}

}  // namespace

struct SessionServer::Impl {
  ServerOptions opts;
  httplib::Server http;
  std::mutex sessions_mu;
  std::map<std::string, std::shared_ptr<Entry>> sessions;
  std::uint64_t next_id = 1;

  std::shared_ptr<Entry> find(const std::string& id) {
    std::lock_guard<std::mutex> l(sessions_mu);
    auto it = sessions.find(id);
    return it == sessions.end() ? nullptr : it->second;
  }

  // Runs a handler, mapping failures to HTTP errors.
  template <class F>
  void guarded(httplib::Response& res, F&& f) {
    try {
      f();
    } catch (const nlohmann::json::exception& e) {
      reply_error(res, 400, std::string("bad JSON: ") + e.what());
    } catch (const std::invalid_argument& e) {
      reply_error(res, 400, e.what());
    } catch (const std::runtime_error& e) {
      reply_error(res, 400, e.what());
    } catch (const std::exception& e) {
      reply_error(res, 500, e.what());
    }
  }

  // Looks up the session named in the path; 404 when absent.
  std::shared_ptr<Entry> entry(const httplib::Request& req, httplib::Response& res) {
    auto e = find(req.matches[1]);
    if (!e) reply_error(res, 404, "no session '" + std::string(req.matches[1]) + "'");
    return e;
  }

  template <class F>
  void command(const httplib::Request& req, httplib::Response& res, F&& f) {
    auto e = entry(req, res);
    if (!e) return;
    guarded(res, [&] {
      std::lock_guard<FifoLock> l(e->lock);
      f(*e->session);
      e->publish();
      res.set_content(e->read()->state, "application/json");
    });
  }

  void routes() {
    http.Post("/session", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        nlohmann::json j;
        j["case"] = opts.case_path;
        if (opts.interactive) j["truth"] = "interactive";
        else j["truth"] = opts.truth_path;
        const nlohmann::json body = body_json(req);
        for (auto& [k, v] : body.items()) j[k] = v;
        if (j.value("interactive", false)) j["truth"] = "interactive";
        const SessionConfig cfg = io::config_from_json(j);
        if (cfg.case_path.empty()) throw SessionError("no case given");
        auto e = std::make_shared<Entry>();
        e->session = std::make_unique<Session>(cfg);
        {
          std::lock_guard<FifoLock> l(e->lock);
          e->publish();
        }
        std::string id;
        {
          std::lock_guard<std::mutex> l(sessions_mu);
          id = std::to_string(next_id++);
          sessions[id] = e;
        }
        res.status = 201;
        res.set_content(io::Json{{"id", id}}.dump(), "application/json");
      });
    });

    auto getter = [this](std::string Snapshot::*field, const char* type) {
      return [this, field, type](const httplib::Request& req, httplib::Response& res) {
        auto e = entry(req, res);
        if (!e) return;
        res.set_content(e->read().get()->*field, type);
      };
    };
    http.Get(R"(/session/(\d+)/state)", getter(&Snapshot::state, "application/json"));
    http.Get(R"(/session/(\d+)/belief)", getter(&Snapshot::belief, "application/json"));
    http.Get(R"(/session/(\d+)/plan)", getter(&Snapshot::plan, "application/json"));
    http.Get(R"(/session/(\d+)/log)", getter(&Snapshot::log, "application/x-ndjson"));

    http.Post(R"(/session/(\d+)/observe)", [this](const httplib::Request& req, httplib::Response& res) {
      command(req, res, [&](Session& s) {
        const nlohmann::json j = body_json(req);
        bool any = false;
        if (j.contains("inspection")) {
          const auto& ins = j.at("inspection");
          const std::string result = ins.at("result").get<std::string>();
          if (result != "intact" && result != "faulty")
            throw SessionError("inspection result must be intact or faulty");
          s.observe_inspection(ins.at("pipeline").get<std::string>(), result == "faulty");
          any = true;
        }
        if (j.contains("service")) {
          const auto& sv = j.at("service");
          s.observe_service(sv.value("unserved", std::vector<std::string>{}),
                            sv.value("served", std::vector<std::string>{}));
          any = true;
        }
        if (!any) throw SessionError("observe needs an inspection or a service reading");
      });
    });

    http.Post(R"(/session/(\d+)/dispatch)", [this](const httplib::Request& req, httplib::Response& res) {
      command(req, res, [&](Session& s) {
        const nlohmann::json j = body_json(req);
        std::vector<std::pair<std::string, std::string>> overrides;
        const nlohmann::json targets = j.value("targets", nlohmann::json::object());
        for (auto& [crew, comp] : targets.items())
          overrides.emplace_back(crew, comp.is_null() ? std::string() : comp.get<std::string>());
        s.dispatch(overrides);
      });
    });

    http.Post(R"(/session/(\d+)/advance)", [this](const httplib::Request& req, httplib::Response& res) {
      command(req, res, [&](Session& s) {
        const int n = body_json(req).value("steps", 1);
        if (n < 1) throw SessionError("steps must be at least 1");
        s.advance(n);
      });
    });
  }
};

SessionServer::SessionServer(ServerOptions o) : impl_(std::make_unique<Impl>()) {
  impl_->opts = std::move(o);
  impl_->routes();
}

SessionServer::~SessionServer() { stop(); }

void SessionServer::listen() {
  if (!impl_->http.listen(impl_->opts.host, impl_->opts.port))
    throw SessionError("cannot listen on " + impl_->opts.host + ":" + std::to_string(impl_->opts.port));
}

int SessionServer::bind_any_port() {
  const int port = impl_->http.bind_to_any_port(impl_->opts.host);
  if (port < 0) throw SessionError("cannot bind " + impl_->opts.host);
  impl_->opts.port = port;
  return port;
}

void SessionServer::listen_after_bind() { impl_->http.listen_after_bind(); }

void SessionServer::stop() {
  if (impl_) impl_->http.stop();
}

bool SessionServer::running() const { return impl_->http.is_running(); }

}  // namespace restore::run
