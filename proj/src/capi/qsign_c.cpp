#include "qsign/qsign.h"

#include <cstring>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "qsign/error.hpp"
#include "qsign/offline.hpp"
#include "qsign/service.hpp"

struct qsign_service {
  std::unique_ptr<qsign::Service> impl;
};

namespace {

using nlohmann::json;

thread_local std::string g_last_error;

qsign_status status_of(qsign::ErrorCode code) {
  switch (code) {
    case qsign::ErrorCode::contract_violation: return QSIGN_ERR_INVALID_ARGUMENT;
    case qsign::ErrorCode::not_found: return QSIGN_ERR_NOT_FOUND;
    case qsign::ErrorCode::too_large: return QSIGN_ERR_TOO_LARGE;
    case qsign::ErrorCode::unauthorized: return QSIGN_ERR_UNAUTHORIZED;
    case qsign::ErrorCode::parse: return QSIGN_ERR_PARSE;
    case qsign::ErrorCode::io: return QSIGN_ERR_IO;
    case qsign::ErrorCode::internal: return QSIGN_ERR_INTERNAL;
  }
  return QSIGN_ERR_INTERNAL;
}

template <typename F>
qsign_status try_(F&& f) {
  try {
    f();
    g_last_error.clear();
    return QSIGN_OK;
  } catch (const qsign::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const json::exception& e) {
    g_last_error = e.what();
    return QSIGN_ERR_PARSE;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return QSIGN_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown exception";
    return QSIGN_ERR_INTERNAL;
  }
}

template <typename T>
T& deref(T* p, const char* what) {
  if (p == nullptr) qsign::contract_violation(std::string(what) + " must not be NULL");
  return *p;
}

json parse_arg(const char* text, const char* what) {
  if (text == nullptr) qsign::contract_violation(std::string(what) + " must not be NULL");
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw qsign::Error(qsign::ErrorCode::parse, std::string(what) + ": " + e.what());
  }
}

char* dup_string(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* qsign_version(void) { return "0.1.0"; }

const char* qsign_status_string(qsign_status status) {
  switch (status) {
    case QSIGN_OK: return "ok";
    case QSIGN_ERR_INVALID_ARGUMENT: return "invalid argument";
    case QSIGN_ERR_NOT_FOUND: return "not found";
    case QSIGN_ERR_TOO_LARGE: return "too large";
    case QSIGN_ERR_UNAUTHORIZED: return "unauthorized";
    case QSIGN_ERR_PARSE: return "parse error";
    case QSIGN_ERR_IO: return "i/o error";
    case QSIGN_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* qsign_last_error(void) { return g_last_error.c_str(); }

void qsign_string_free(char* s) { std::free(s); }

qsign_status qsign_service_create(const char* config_json, qsign_service_t** out) {
  return try_([&] {
    auto& slot = deref(out, "out");
    slot = nullptr;
    auto config = qsign::service_config_from_json(parse_arg(config_json, "config_json"));
    auto svc = std::make_unique<qsign_service>();
    svc->impl = std::make_unique<qsign::Service>(std::move(config));
    slot = svc.release();
  });
}

qsign_status qsign_service_start(qsign_service_t* service, int* bound_port) {
  return try_([&] {
    const int port = deref(service, "service").impl->start();
    if (bound_port != nullptr) *bound_port = port;
  });
}

qsign_status qsign_service_run(qsign_service_t* service) {
  return try_([&] { deref(service, "service").impl->run(); });
}

qsign_status qsign_service_stop(qsign_service_t* service) {
  return try_([&] { deref(service, "service").impl->stop(); });
}

qsign_status qsign_service_wait_idle(qsign_service_t* service) {
  return try_([&] { deref(service, "service").impl->ingestor().wait_idle(); });
}

void qsign_service_destroy(qsign_service_t* service) { delete service; }

qsign_status qsign_badge(const char* request_json, char** report_json, char** record_json) {
  return try_([&] {
    auto& report_out = deref(report_json, "report_json");
    report_out = nullptr;
    if (record_json != nullptr) *record_json = nullptr;

    const auto j = parse_arg(request_json, "request_json");
    qsign::offline::BadgeRequest req;
    req.username = j.value("username", std::string{});
    req.text = j.value("text", std::string{});
    req.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("nonce_hex") && !j["nonce_hex"].is_null()) {
      req.nonce = qsign::hash::from_hex(j["nonce_hex"].get<std::string>());
    }
    req.timestamp_ms = j.value("timestamp_ms", std::int64_t{0});
    req.backend = j.value("backend", req.backend);
    req.timeout_ms = j.value("timeout_ms", req.timeout_ms);
    req.include_timing = j.value("include_timing", false);

    const auto outcome = qsign::offline::issue_badge(req);
    std::string record = record_json != nullptr ? qsign::store::encode_record(outcome.record) : std::string{};
    report_out = dup_string(outcome.report.dump(2) + "\n");
    if (record_json != nullptr) *record_json = dup_string(record);
  });
}

qsign_status qsign_stats(const char* request_json, char** report_json, char** report_text) {
  return try_([&] {
    if (report_json != nullptr) *report_json = nullptr;
    if (report_text != nullptr) *report_text = nullptr;
    const auto j = parse_arg(request_json, "request_json");
    qsign::offline::StatsRequest req;
    req.shots = j.value("shots", req.shots);
    req.seed = j.value("seed", req.seed);
    req.samples = j.value("samples", req.samples);
    req.username = j.value("username", req.username);
    const auto report = qsign::offline::stats_report(req);
    if (report_json != nullptr) *report_json = dup_string(report.dump(2) + "\n");
    if (report_text != nullptr) *report_text = dup_string(qsign::offline::stats_text(report));
  });
}

qsign_status qsign_verify(const char* record_json, int* matched, char** report_json) {
  return try_([&] {
    auto& match_out = deref(matched, "matched");
    match_out = 0;
    if (report_json != nullptr) *report_json = nullptr;
    qsign::store::MessageRecord record;
    try {
      record = parse_arg(record_json, "record_json").get<qsign::store::MessageRecord>();
    } catch (const json::exception& e) {
      throw qsign::Error(qsign::ErrorCode::parse, std::string("not a stored record: ") + e.what());
    }
    const auto report = qsign::offline::verify_record(record);
    match_out = report.at("match").get<bool>() ? 1 : 0;
    if (report_json != nullptr) *report_json = dup_string(report.dump(2) + "\n");
  });
}

}  // extern "C"
