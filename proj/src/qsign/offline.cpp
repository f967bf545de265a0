#include "qsign/offline.hpp"

#include <memory>
#include <sstream>

#include <fmt/format.h>

#include "qsign/api.hpp"
#include "qsign/backend.hpp"
#include "qsign/error.hpp"
#include "qsign/ingest.hpp"
#include "qsign/sig.hpp"
#include "qsign/statcheck.hpp"

namespace qsign::offline {

using nlohmann::json;

hash::Bytes nonce_from_seed(std::uint64_t seed) {
  hash::Bytes input;
  hash::append(input, "qsign/offline-nonce");
  hash::append_be64(input, seed);
  return hash::shake256(input, backend::kNonceSize);
}

namespace {

json counts_json(const qsim::ShotHistogram& h) {
  json j = json::object();
  for (const auto& [bits, n] : h.counts) j[bits] = n;
  return j;
}

}  // namespace

BadgeOutcome issue_badge(const BadgeRequest& request) {
  const auto nonce = request.nonce ? *request.nonce : nonce_from_seed(request.seed);
  if (nonce.size() != backend::kNonceSize) contract_violation("nonce must be 32 bytes (64 hex characters)");

  std::shared_ptr<backend::QuantumBackend> be;
  if (request.backend == "local") {
    be = std::make_shared<backend::LocalSimulatorBackend>();
  } else if (request.backend == "fail") {
    be = std::make_shared<backend::AlwaysFailBackend>();
  } else {
    contract_violation("offline badge supports backends 'local' and 'fail'");
  }

  const auto text = ingest::sanitize(request.text);
  auto qr = backend::execute_pipeline(request.username, be, std::chrono::milliseconds(request.timeout_ms),
                                      request.seed, {nonce, request.timestamp_ms});
  const auto measured_ms = qr.duration_ms;
  if (!request.include_timing) qr.duration_ms = 0;
  const auto badge = sig::derive_badge(request.username, text, qr, nonce);

  store::MessageRecord record;
  record.group_id = "offline";
  record.message_id = "1";
  record.timestamp_ms = request.timestamp_ms;
  record.sender_name = request.username;
  record.sender_handle = request.username;
  record.text = text;
  record.signature_status = store::SignatureStatus::completed;
  record.badge = badge;
  record.provenance = store::provenance_of(qr);

  json badge_json = badge;
  badge_json["text"] = sig::render(badge);
  badge_json["css_color"] = api::css_color(badge.color);
  json report = {
      {"badge", badge_json},
      {"rendered", sig::render(badge)},
      {"quantum",
       {{"device", qr.device},
        {"algorithm", qr.algorithm},
        {"q_num", qr.q_num},
        {"bell", qr.bell},
        {"rng_seed", qr.rng_seed},
        {"bell_seed", backend::derive_bell_seed(qr.rng_seed)},
        {"hist_a", counts_json(qr.hist_a)},
        {"hist_b", counts_json(qr.hist_b)}}},
      {"inputs",
       {{"username", request.username},
        {"text", text},
        {"timestamp_ms", request.timestamp_ms},
        {"nonce_hex", hash::to_hex(nonce)}}},
  };
  if (request.include_timing) report["timing"] = {{"duration_ms", measured_ms}};
  return {std::move(report), std::move(record)};
}

json stats_report(const StatsRequest& request) {
  if (request.shots <= 0) contract_violation("shots must be positive");
  if (request.samples <= 0) contract_violation("samples must be positive");

  const auto thetas = qsim::derive_rotation_angles(request.username);
  const auto rng = qsim::run_circuit(qsim::make_rng_circuit(thetas, request.shots), request.seed);
  const auto chi = statcheck::chi_square_uniformity(rng, 16);

  const auto bell_hist =
      qsim::run_circuit(qsim::make_bell_circuit(request.shots), backend::derive_bell_seed(request.seed));
  const auto sym = statcheck::bell_symmetry_report(bell_hist);

  std::vector<int> qnums;
  qnums.reserve(static_cast<std::size_t>(request.samples));
  const auto per_run = qsim::make_rng_circuit(thetas);
  std::uint64_t s = request.seed;
  for (int i = 0; i < request.samples; ++i) {
    s = backend::derive_bell_seed(s);
    qnums.push_back(qsim::extract_qnum(qsim::run_circuit(per_run, s)));
  }

  return {
      {"rng_circuit",
       {{"username", request.username},
        {"shots", request.shots},
        {"seed", request.seed},
        {"chi_square", chi.statistic},
        {"degrees_of_freedom", chi.degrees_of_freedom},
        {"p_value", chi.p_value},
        {"counts", counts_json(rng)}}},
      {"bell_circuit",
       {{"shots", request.shots},
        {"seed", backend::derive_bell_seed(request.seed)},
        {"p00", sym.p00},
        {"p11", sym.p11},
        {"cross_mass", sym.cross_mass}}},
      {"q_num_min_entropy", {{"samples", request.samples}, {"bits", statcheck::min_entropy_estimate(qnums)}}},
  };
}

std::string stats_text(const json& report) {
  const auto& a = report.at("rng_circuit");
  const auto& b = report.at("bell_circuit");
  const auto& m = report.at("q_num_min_entropy");
  std::ostringstream out;
  out << fmt::format("RNG circuit   shots={} seed={}\n", a.at("shots").get<int>(), a.at("seed").get<std::uint64_t>());
  out << fmt::format("  chi-square  {:.6f} (df={})  p={:.6g}\n", a.at("chi_square").get<double>(),
                     a.at("degrees_of_freedom").get<int>(), a.at("p_value").get<double>());
  out << fmt::format("Bell circuit  shots={}\n", b.at("shots").get<int>());
  out << fmt::format("  P(00)={:.6f} P(11)={:.6f} cross={:.6f}\n", b.at("p00").get<double>(),
                     b.at("p11").get<double>(), b.at("cross_mass").get<double>());
  out << fmt::format("q_num min-entropy over {} runs: {:.6f} bits\n", m.at("samples").get<int>(),
                     m.at("bits").get<double>());
  return out.str();
}

json verify_record(const store::MessageRecord& record) {
  if (record.signature_status != store::SignatureStatus::completed || !record.badge || !record.provenance) {
    contract_violation("record " + record.group_id + "/" + record.message_id + " has no completed badge");
  }
  const auto& stored = *record.badge;
  const auto nonce = hash::from_hex(stored.nonce_hex);
  const auto expected = sig::derive_badge(record.sender_handle, record.text, record.provenance->q_num,
                                          record.provenance->bell, nonce);

  json mismatches = json::array();
  if (expected.q_num != stored.q_num) mismatches.push_back("q_num");
  if (expected.pk_hash != stored.pk_hash) mismatches.push_back("pk_hash");
  if (expected.signature != stored.signature) mismatches.push_back("signature");
  if (expected.color != stored.color) mismatches.push_back("color");
  return {{"match", mismatches.empty()},
          {"group_id", record.group_id},
          {"message_id", record.message_id},
          {"mismatches", mismatches},
          {"expected", expected},
          {"stored", stored}};
}

}  // namespace qsign::offline
