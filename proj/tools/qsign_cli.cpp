// qsign command-line driver. Talks to the library exclusively through the C API.

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qsign/qsign.h"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

struct CString {
  char* p = nullptr;
  ~CString() { qsign_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

int fail(qsign_status status) {
  std::cerr << "qsign: " << qsign_status_string(status) << ": " << qsign_last_error() << "\n";
  return kExitDomain;
}

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v != nullptr ? std::string(v) : fallback;
}

struct ServeOptions {
  std::string config_file;
  json overrides = json::object();
};

int run_serve(const ServeOptions& opts) {
  json config = json::object();
  if (!opts.config_file.empty()) {
    std::ifstream in(opts.config_file);
    if (!in) {
      std::cerr << "qsign: cannot read config " << opts.config_file << "\n";
      return kExitUsage;
    }
    try {
      config = json::parse(in);
    } catch (const json::exception& e) {
      std::cerr << "qsign: bad config file: " << e.what() << "\n";
      return kExitUsage;
    }
  }
  for (const auto& [key, value] : opts.overrides.items()) config[key] = value;
  for (const auto& [key, var] : {std::pair{"webhook_secret", "QSIGN_WEBHOOK_SECRET"},
                                 std::pair{"admin_password", "QSIGN_ADMIN_PASSWORD"},
                                 std::pair{"remote_token", "QSIGN_REMOTE_TOKEN"},
                                 std::pair{"bot_token", "QSIGN_BOT_TOKEN"}}) {
    if (!config.contains(key)) {
      const auto v = env_or(var, "");
      if (!v.empty()) config[key] = v;
    }
  }

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  qsign_service_t* raw = nullptr;
  if (auto st = qsign_service_create(config.dump().c_str(), &raw); st != QSIGN_OK) return fail(st);
  std::unique_ptr<qsign_service_t, decltype(&qsign_service_destroy)> service(raw, qsign_service_destroy);
  int port = 0;
  if (auto st = qsign_service_start(service.get(), &port); st != QSIGN_OK) return fail(st);
  std::cerr << "qsign: listening on port " << port << "\n";

  int sig = 0;
  sigwait(&signals, &sig);
  std::cerr << "qsign: shutting down\n";
  qsign_service_stop(service.get());
  qsign_service_wait_idle(service.get());
  return kExitOk;
}

struct BadgeOptions {
  std::string username;
  std::string text;
  std::uint64_t seed = 0;
  std::string nonce_hex;
  std::int64_t timestamp_ms = 0;
  std::string backend = "local";
  bool timing = false;
  std::string record_out;
};

int run_badge(const BadgeOptions& o) {
  json req = {{"username", o.username}, {"text", o.text},       {"seed", o.seed},
              {"timestamp_ms", o.timestamp_ms}, {"backend", o.backend}, {"include_timing", o.timing}};
  if (!o.nonce_hex.empty()) req["nonce_hex"] = o.nonce_hex;
  CString report;
  CString record;
  if (auto st = qsign_badge(req.dump().c_str(), &report.p, o.record_out.empty() ? nullptr : &record.p);
      st != QSIGN_OK) {
    return fail(st);
  }
  std::cout << report.str();
  std::cout << json::parse(report.str()).at("rendered").get<std::string>() << "\n";
  if (!o.record_out.empty()) {
    std::ofstream out(o.record_out, std::ios::binary | std::ios::trunc);
    out << record.str();
    if (!out) {
      std::cerr << "qsign: cannot write " << o.record_out << "\n";
      return kExitDomain;
    }
  }
  return kExitOk;
}

struct StatsOptions {
  int shots = 100000;
  std::uint64_t seed = 0;
  int samples = 1000;
  std::string username;
  std::string format = "both";
};

int run_stats(const StatsOptions& o) {
  json req = {{"shots", o.shots}, {"seed", o.seed}, {"samples", o.samples}, {"username", o.username}};
  CString report;
  CString text;
  if (auto st = qsign_stats(req.dump().c_str(), &report.p, &text.p); st != QSIGN_OK) return fail(st);
  if (o.format != "json") std::cout << text.str();
  if (o.format != "text") std::cout << report.str();
  return kExitOk;
}

int run_verify(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "qsign: cannot read " << path << "\n";
    return kExitDomain;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  int matched = 0;
  CString report;
  if (auto st = qsign_verify(buf.str().c_str(), &matched, &report.p); st != QSIGN_OK) return fail(st);
  std::cout << report.str();
  std::cout << (matched ? "match" : "MISMATCH") << "\n";
  return matched ? kExitOk : kExitDomain;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qsign: quantum-seeded identity badges for chat walls"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(qsign_version()));

  ServeOptions serve;
  int port = 8080;
  std::string host, data_dir, secret, secret_header, password, backend_kind, remote_url, remote_device;
  std::string ui_origin, bot_handle, bot_api_base;
  std::int64_t timeout_ms = 30000;
  std::size_t workers = 4;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  serve_cmd->add_option("--config", serve.config_file, "JSON config file (flags override it)");
  auto* o_port = serve_cmd->add_option("--port", port, "Listen port")->check(CLI::Range(0, 65535));
  auto* o_host = serve_cmd->add_option("--host", host, "Listen address");
  auto* o_data = serve_cmd->add_option("--data-dir", data_dir, "Directory for records and photos");
  auto* o_secret = serve_cmd->add_option("--webhook-secret", secret, "Webhook secret (or QSIGN_WEBHOOK_SECRET)");
  auto* o_header = serve_cmd->add_option("--secret-header", secret_header, "Header carrying the webhook secret");
  auto* o_pass = serve_cmd->add_option("--admin-password", password, "Admin password (or QSIGN_ADMIN_PASSWORD)");
  auto* o_backend = serve_cmd->add_option("--backend", backend_kind, "Quantum backend")
                        ->check(CLI::IsMember({"local", "remote", "fail"}));
  auto* o_remote = serve_cmd->add_option("--remote-url", remote_url, "Remote backend base URL");
  auto* o_device = serve_cmd->add_option("--remote-device", remote_device, "Device id reported for remote runs");
  auto* o_timeout = serve_cmd->add_option("--timeout-ms", timeout_ms, "Quantum pipeline timeout")
                        ->check(CLI::PositiveNumber);
  auto* o_origin = serve_cmd->add_option("--ui-origin", ui_origin, "CORS origin of the wall UI");
  auto* o_handle = serve_cmd->add_option("--bot-handle", bot_handle, "Bot username that must be mentioned");
  auto* o_api = serve_cmd->add_option("--bot-api-base", bot_api_base, "Bot platform API base URL");
  auto* o_workers = serve_cmd->add_option("--workers", workers, "Badge pipeline workers")->check(CLI::PositiveNumber);

  BadgeOptions badge;
  auto* badge_cmd = app.add_subcommand("badge", "Issue one badge offline and print it");
  badge_cmd->add_option("--username", badge.username, "Sender identity")->required();
  badge_cmd->add_option("--text", badge.text, "Message text");
  badge_cmd->add_option("--seed", badge.seed, "Shot sampler seed");
  badge_cmd->add_option("--nonce", badge.nonce_hex, "32-byte nonce as hex (default: derived from seed)");
  badge_cmd->add_option("--timestamp-ms", badge.timestamp_ms, "Message timestamp in UTC ms");
  badge_cmd->add_option("--backend", badge.backend, "Backend")->check(CLI::IsMember({"local", "fail"}));
  badge_cmd->add_flag("--timing", badge.timing, "Include wall-clock duration (breaks byte-identical output)");
  badge_cmd->add_option("--record-out", badge.record_out, "Also write the completed record to this file");

  StatsOptions stats;
  auto* stats_cmd = app.add_subcommand("stats", "Randomness-quality report for both circuits");
  stats_cmd->add_option("--shots", stats.shots, "Shots per circuit")->check(CLI::PositiveNumber);
  stats_cmd->add_option("--seed", stats.seed, "Sampler seed");
  stats_cmd->add_option("--samples", stats.samples, "q_num draws for the min-entropy estimate")
      ->check(CLI::PositiveNumber);
  stats_cmd->add_option("--username", stats.username, "Seed the RNG circuit rotations");
  stats_cmd->add_option("--format", stats.format, "Output format")->check(CLI::IsMember({"text", "json", "both"}));

  std::string record_file;
  auto* verify_cmd = app.add_subcommand("verify", "Recompute a stored record's badge");
  verify_cmd->add_option("record-file", record_file, "Stored record JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  if (*serve_cmd) {
    auto& ov = serve.overrides;
    if (*o_port) ov["port"] = port;
    if (*o_host) ov["host"] = host;
    if (*o_data) ov["data_dir"] = data_dir;
    if (*o_secret) ov["webhook_secret"] = secret;
    if (*o_header) ov["secret_header"] = secret_header;
    if (*o_pass) ov["admin_password"] = password;
    if (*o_backend) ov["backend"] = backend_kind;
    if (*o_remote) ov["remote_url"] = remote_url;
    if (*o_device) ov["remote_device"] = remote_device;
    if (*o_timeout) ov["timeout_ms"] = timeout_ms;
    if (*o_origin) ov["ui_origin"] = ui_origin;
    if (*o_handle) ov["bot_handle"] = bot_handle;
    if (*o_api) ov["bot_api_base"] = bot_api_base;
    if (*o_workers) ov["workers"] = workers;
    return run_serve(serve);
  }
  if (*badge_cmd) return run_badge(badge);
  if (*stats_cmd) return run_stats(stats);
  return run_verify(record_file);
}
