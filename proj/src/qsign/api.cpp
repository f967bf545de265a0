#include "qsign/api.hpp"

#include <cmath>

#include <fmt/format.h>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include "qsign/error.hpp"
#include "qsign/hash.hpp"

namespace qsign::api {

using nlohmann::json;

std::string TokenStore::issue() {
  auto token = hash::to_hex(hash::random_bytes(32));
  std::lock_guard lock(mutex_);
  const auto now = Clock::now();
  std::erase_if(expiry_, [&](const auto& kv) { return kv.second <= now; });
  expiry_[token] = now + ttl_;
  return token;
}

bool TokenStore::valid(const std::string& token) {
  if (token.empty()) return false;
  std::lock_guard lock(mutex_);
  auto it = expiry_.find(token);
  if (it == expiry_.end()) return false;
  if (it->second <= Clock::now()) {
    expiry_.erase(it);
    return false;
  }
  return true;
}

std::string css_color(const sig::HslColor& c) { return fmt::format("hsl({}, {}%, {}%)", c.h, c.s, c.l); }

json public_message_json(const store::MessageRecord& r) {
  json j = r;
  j["photo_url"] = r.photo_ref ? json("/api/photos/" + *r.photo_ref) : json(nullptr);
  if (r.signature_status == store::SignatureStatus::completed && r.badge && r.provenance) {
    j["badge"]["text"] = sig::render(*r.badge);
    j["badge"]["css_color"] = css_color(r.badge->color);
    j["provenance"].erase("rng_seed");
    j["provenance"]["fallback"] = r.provenance->device == backend::kFallbackDevice;
  } else {
    j.erase("badge");
    j.erase("provenance");
  }
  return j;
}

json admin_message_json(const store::MessageRecord& r) {
  json j = r;
  j["photo_url"] = r.photo_ref ? json("/api/photos/" + *r.photo_ref) : json(nullptr);
  json audit = {{"signature_status", store::to_string(r.signature_status)}};
  if (r.badge) {
    j["badge"]["text"] = sig::render(*r.badge);
    j["badge"]["css_color"] = css_color(r.badge->color);
  }
  if (r.provenance) {
    const auto& p = *r.provenance;
    audit["device"] = p.device;
    audit["algorithm"] = p.algorithm;
    audit["bell_state"] = {p.bell.p00, p.bell.p01, p.bell.p10, p.bell.p11};
    audit["quantum_number"] = p.q_num;
    audit["fallback"] = p.device == backend::kFallbackDevice;
  }
  j["audit"] = std::move(audit);
  return j;
}

json summary_json(const store::GroupSummary& s) {
  json board = json::array();
  for (const auto& e : s.leaderboard) board.push_back({{"sender_handle", e.sender_handle}, {"count", e.count}});
  return {{"group_id", s.group_id}, {"message_count", s.message_count}, {"leaderboard", board}};
}

namespace {

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, std::string_view message) {
  reply(res, status, json{{"error", message}});
}

std::string bearer_of(const httplib::Request& req) {
  const auto header = req.get_header_value("Authorization");
  constexpr std::string_view prefix = "Bearer ";
  if (header.size() <= prefix.size() || header.compare(0, prefix.size(), prefix) != 0) return {};
  return header.substr(prefix.size());
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::contract_violation: return 422;
    case ErrorCode::not_found: return 404;
    case ErrorCode::too_large: return 413;
    case ErrorCode::unauthorized: return 401;
    case ErrorCode::parse: return 400;
    default: return 500;
  }
}

}  // namespace

ApiServer::ApiServer(store::Store& store, ingest::Ingestor& ingestor, ApiConfig config, std::string backend_kind)
    : store_(store),
      ingestor_(ingestor),
      config_(std::move(config)),
      backend_kind_(std::move(backend_kind)),
      tokens_(config_.token_ttl),
      started_(std::chrono::steady_clock::now()),
      server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

ApiServer::~ApiServer() { stop(); }

void ApiServer::install_routes() {
  auto& srv = *server_;

  srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const Error& e) {
      reply_error(res, status_for(e.code()), e.what());
    } catch (const std::exception& e) {
      spdlog::error("request failed: {}", e.what());
      reply_error(res, 500, "internal error");
    }
  });

  if (!config_.ui_origin.empty()) {
    srv.set_post_routing_handler([origin = config_.ui_origin](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", origin);
      res.set_header("Vary", "Origin");
    });
    srv.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Methods", "GET, POST, PATCH, DELETE, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Authorization, Content-Type");
      res.status = 204;
    });
  }

  auto require_bearer = [this](const httplib::Request& req, httplib::Response& res) {
    if (tokens_.valid(bearer_of(req))) return true;
    reply_error(res, 401, "bearer token required");
    return false;
  };

  srv.Post(R"(/api/webhook/([A-Za-z0-9_-]{1,64}))", [this](const httplib::Request& req, httplib::Response& res) {
    const auto presented = req.get_header_value(config_.secret_header);
    if (config_.webhook_secret.empty() || !hash::constant_time_equal(presented, config_.webhook_secret)) {
      reply_error(res, 401, "invalid webhook secret");
      return;
    }
    ingest::WebhookUpdate update;
    try {
      update = ingest::parse_update(req.body);
    } catch (const Error& e) {
      reply_error(res, 400, e.what());
      return;
    }
    const auto status = ingestor_.handle_update(req.matches[1], update);
    reply(res, 200, json{{"ok", true}, {"status", ingest::to_string(status)}});
  });

  srv.Get(R"(/api/messages/([A-Za-z0-9_-]{1,64}))", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string group = req.matches[1];
    std::optional<std::int64_t> since;
    if (req.has_param("since")) {
      try {
        since = std::stoll(req.get_param_value("since"));
      } catch (const std::exception&) {
        reply_error(res, 400, "since must be an integer millisecond timestamp");
        return;
      }
    }
    json messages = json::array();
    for (const auto& r : store_.list_messages(group, since)) messages.push_back(public_message_json(r));
    auto summary = summary_json(store_.summary(group));
    reply(res, 200, json{{"messages", messages}, {"leaderboard", summary["leaderboard"]}});
  });

  srv.Delete(R"(/api/messages/([A-Za-z0-9_-]{1,64}))",
             [this, require_bearer](const httplib::Request& req, httplib::Response& res) {
               if (!require_bearer(req, res)) return;
               if (!req.has_param("id")) {
                 reply_error(res, 400, "missing id parameter");
                 return;
               }
               store_.soft_delete(req.matches[1], req.get_param_value("id"));
               reply(res, 200, json{{"ok", true}});
             });

  srv.Patch(R"(/api/messages/([A-Za-z0-9_-]{1,64}))",
            [this, require_bearer](const httplib::Request& req, httplib::Response& res) {
              if (!require_bearer(req, res)) return;
              std::string id;
              double x = 0.0;
              double y = 0.0;
              try {
                const auto body = json::parse(req.body);
                id = body.at("id").is_string() ? body["id"].get<std::string>()
                                               : std::to_string(body["id"].get<std::int64_t>());
                x = body.at("x_pct").get<double>();
                y = body.at("y_pct").get<double>();
              } catch (const json::exception&) {
                reply_error(res, 400, "body must be {id, x_pct, y_pct}");
                return;
              }
              if (!(x >= 0.0 && x <= 100.0 && y >= 0.0 && y <= 100.0)) {
                reply_error(res, 422, "x_pct and y_pct must be within [0,100]");
                return;
              }
              store_.set_position(req.matches[1], id, x, y);
              reply(res, 200, json{{"ok", true}});
            });

  srv.Get("/api/groups", [this](const httplib::Request&, httplib::Response& res) {
    json groups = json::array();
    for (const auto& s : store_.groups()) groups.push_back(summary_json(s));
    reply(res, 200, json{{"groups", groups}});
  });

  srv.Post("/api/admin", [this](const httplib::Request& req, httplib::Response& res) {
    std::string password;
    try {
      password = json::parse(req.body).at("password").get<std::string>();
    } catch (const json::exception&) {
      reply_error(res, 400, "body must be {password}");
      return;
    }
    if (config_.admin_password.empty() || !hash::constant_time_equal(password, config_.admin_password)) {
      std::this_thread::sleep_for(config_.login_failure_delay);
      reply_error(res, 401, "invalid credentials");
      return;
    }
    const auto ttl_s = std::chrono::duration_cast<std::chrono::seconds>(tokens_.ttl()).count();
    reply(res, 200, json{{"token", tokens_.issue()}, {"expires_in_s", ttl_s}});
  });

  srv.Get("/api/health", [this](const httplib::Request&, httplib::Response& res) {
    const auto uptime =
        std::chrono::duration_cast<std::chrono::seconds>(std::chrono::steady_clock::now() - started_).count();
    reply(res, 200, json{{"status", "ok"}, {"backend", backend_kind_}, {"uptime_s", uptime}});
  });

  srv.Get(R"(/api/admin/messages/([A-Za-z0-9_-]{1,64}))",
          [this, require_bearer](const httplib::Request& req, httplib::Response& res) {
            if (!require_bearer(req, res)) return;
            json messages = json::array();
            for (const auto& r : store_.admin_list(req.matches[1])) messages.push_back(admin_message_json(r));
            reply(res, 200, json{{"messages", messages}});
          });

  srv.Get(R"(/api/photos/([0-9a-f]{64}))", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string key = req.matches[1];
    const auto info = store_.blob_info(key);
    if (!info) {
      reply_error(res, 404, "unknown photo");
      return;
    }
    const auto bytes = store_.get_blob(key);
    res.set_content(std::string(bytes.begin(), bytes.end()), info->media_type);
  });
}

int ApiServer::start(const std::string& host, int port) {
  port_ = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (port_ < 0) throw Error(ErrorCode::io, "cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void ApiServer::run(const std::string& host, int port) {
  port_ = port;
  if (!server_->listen(host, port)) throw Error(ErrorCode::io, "cannot listen on " + host + ":" + std::to_string(port));
}

void ApiServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace qsign::api
