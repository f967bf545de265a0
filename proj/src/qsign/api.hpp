#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "qsign/ingest.hpp"
#include "qsign/store.hpp"

namespace httplib {
class Server;
}

namespace qsign::api {

inline constexpr const char* kDefaultSecretHeader = "X-Telegram-Bot-Api-Secret-Token";

struct ApiConfig {
  std::string webhook_secret;
  std::string secret_header = kDefaultSecretHeader;
  std::string admin_password;
  std::chrono::milliseconds token_ttl = std::chrono::hours(12);
  std::chrono::milliseconds login_failure_delay{500};
  std::string ui_origin;  // CORS allow-origin; empty disables CORS headers
};

// Bearer tokens: 32 random bytes as hex, expiring after a fixed TTL.
class TokenStore {
 public:
  explicit TokenStore(std::chrono::milliseconds ttl) : ttl_(ttl) {}

  std::string issue();
  bool valid(const std::string& token);
  std::chrono::milliseconds ttl() const { return ttl_; }

 private:
  using Clock = std::chrono::steady_clock;
  std::chrono::milliseconds ttl_;
  std::mutex mutex_;
  std::map<std::string, Clock::time_point> expiry_;
};

// Wire projections shared with the UI contract (docs/api.md).
nlohmann::json public_message_json(const store::MessageRecord& r);
nlohmann::json admin_message_json(const store::MessageRecord& r);
nlohmann::json summary_json(const store::GroupSummary& s);
std::string css_color(const sig::HslColor& c);

class ApiServer {
 public:
  ApiServer(store::Store& store, ingest::Ingestor& ingestor, ApiConfig config, std::string backend_kind);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  // Binds and serves on a background thread; port 0 picks an ephemeral port.
  // Returns the bound port.
  int start(const std::string& host, int port);
  // Serves on the calling thread until stop().
  void run(const std::string& host, int port);
  void stop();
  int port() const { return port_; }

 private:
  void install_routes();

  store::Store& store_;
  ingest::Ingestor& ingestor_;
  ApiConfig config_;
  std::string backend_kind_;
  TokenStore tokens_;
  std::chrono::steady_clock::time_point started_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace qsign::api
