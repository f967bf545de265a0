#pragma once

#include <chrono>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "qsign/api.hpp"
#include "qsign/backend.hpp"
#include "qsign/ingest.hpp"
#include "qsign/store.hpp"

namespace qsign {

struct ServiceConfig {
  std::string host = "0.0.0.0";
  int port = 8080;
  std::string data_dir = "qsign-data";
  std::string webhook_secret;
  std::string secret_header = api::kDefaultSecretHeader;
  std::string admin_password;
  std::string backend = "local";  // local | remote | fail
  std::string remote_url;
  std::string remote_token;
  std::string remote_device = "remote-sv1";
  std::int64_t timeout_ms = backend::kDefaultTimeout.count();
  std::string ui_origin;
  std::string bot_handle;
  std::string bot_token;  // enables photo downloads via the bot file API
  std::string bot_api_base = "https://api.telegram.org";
  std::size_t workers = 4;
  std::int64_t token_ttl_s = 12 * 3600;
  std::int64_t login_delay_ms = 500;
};

// Unknown keys are rejected so typos in config files surface early.
ServiceConfig service_config_from_json(const nlohmann::json& j);

std::shared_ptr<backend::QuantumBackend> make_backend(const ServiceConfig& config);

// Store + ingestor + HTTP server, owned together.
class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();

  int start();  // background; returns the bound port
  void run();   // blocks
  void stop();

  store::Store& store() { return *store_; }
  ingest::Ingestor& ingestor() { return *ingestor_; }
  const ServiceConfig& config() const { return config_; }

 private:
  ServiceConfig config_;
  std::shared_ptr<backend::QuantumBackend> backend_;
  std::unique_ptr<store::Store> store_;
  std::unique_ptr<ingest::Ingestor> ingestor_;
  std::unique_ptr<api::ApiServer> server_;
};

}  // namespace qsign
