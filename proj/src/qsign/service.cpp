#include "qsign/service.hpp"

#include <set>

#include "qsign/error.hpp"

namespace qsign {

using nlohmann::json;

ServiceConfig service_config_from_json(const json& j) {
  static const std::set<std::string> known = {
      "host",         "port",        "data_dir",      "webhook_secret", "secret_header", "admin_password",
      "backend",      "remote_url",  "remote_token",  "remote_device",  "timeout_ms",    "ui_origin",
      "bot_handle",   "bot_token",   "bot_api_base",  "workers",        "token_ttl_s",   "login_delay_ms"};
  if (!j.is_object()) throw Error(ErrorCode::parse, "service config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw Error(ErrorCode::parse, "unknown config key '" + key + "'");
  }
  ServiceConfig c;
  try {
    c.host = j.value("host", c.host);
    c.port = j.value("port", c.port);
    c.data_dir = j.value("data_dir", c.data_dir);
    c.webhook_secret = j.value("webhook_secret", c.webhook_secret);
    c.secret_header = j.value("secret_header", c.secret_header);
    c.admin_password = j.value("admin_password", c.admin_password);
    c.backend = j.value("backend", c.backend);
    c.remote_url = j.value("remote_url", c.remote_url);
    c.remote_token = j.value("remote_token", c.remote_token);
    c.remote_device = j.value("remote_device", c.remote_device);
    c.timeout_ms = j.value("timeout_ms", c.timeout_ms);
    c.ui_origin = j.value("ui_origin", c.ui_origin);
    c.bot_handle = j.value("bot_handle", c.bot_handle);
    c.bot_token = j.value("bot_token", c.bot_token);
    c.bot_api_base = j.value("bot_api_base", c.bot_api_base);
    c.workers = j.value("workers", c.workers);
    c.token_ttl_s = j.value("token_ttl_s", c.token_ttl_s);
    c.login_delay_ms = j.value("login_delay_ms", c.login_delay_ms);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse, std::string("bad config value: ") + e.what());
  }
  if (c.timeout_ms <= 0) contract_violation("timeout_ms must be positive");
  if (c.port < 0 || c.port > 65535) contract_violation("port out of range");
  return c;
}

std::shared_ptr<backend::QuantumBackend> make_backend(const ServiceConfig& config) {
  if (config.backend == "local") return std::make_shared<backend::LocalSimulatorBackend>();
  if (config.backend == "fail") return std::make_shared<backend::AlwaysFailBackend>();
  if (config.backend == "remote") {
    if (config.remote_url.empty()) contract_violation("remote backend needs remote_url");
    backend::RemoteBackendConfig rc;
    rc.endpoint = config.remote_url;
    rc.credentials = config.remote_token;
    rc.device_id = config.remote_device;
    return std::make_shared<backend::RemoteBackend>(rc);
  }
  contract_violation("unknown backend '" + config.backend + "' (expected local, remote or fail)");
}

Service::Service(ServiceConfig config) : config_(std::move(config)) {
  if (config_.bot_handle.empty()) contract_violation("bot_handle is required; without it no update can match");
  backend_ = make_backend(config_);
  store_ = std::make_unique<store::Store>(config_.data_dir);

  ingest::IngestConfig ic;
  ic.bot_handle = config_.bot_handle;
  ic.backend = backend_;
  ic.timeout = std::chrono::milliseconds(config_.timeout_ms);
  ic.workers = config_.workers;
  if (!config_.bot_token.empty()) {
    ic.photo_fetcher = std::make_shared<ingest::HttpPhotoFetcher>(config_.bot_api_base, config_.bot_token);
  }
  ingestor_ = std::make_unique<ingest::Ingestor>(*store_, std::move(ic));

  api::ApiConfig ac;
  ac.webhook_secret = config_.webhook_secret;
  ac.secret_header = config_.secret_header;
  ac.admin_password = config_.admin_password;
  ac.token_ttl = std::chrono::seconds(config_.token_ttl_s);
  ac.login_failure_delay = std::chrono::milliseconds(config_.login_delay_ms);
  ac.ui_origin = config_.ui_origin;
  server_ = std::make_unique<api::ApiServer>(*store_, *ingestor_, std::move(ac), backend_->kind());
}

Service::~Service() { stop(); }

int Service::start() { return server_->start(config_.host, config_.port); }

void Service::run() { server_->run(config_.host, config_.port); }

void Service::stop() {
  if (server_) server_->stop();
}

}  // namespace qsign
