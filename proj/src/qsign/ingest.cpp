#include "qsign/ingest.hpp"

#include <algorithm>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "qsign/error.hpp"
#include "qsign/sig.hpp"
#include "qsign/text.hpp"

namespace qsign::ingest {

using nlohmann::json;

namespace {

std::vector<MessageEntity> parse_entities(const json& arr) {
  std::vector<MessageEntity> out;
  for (const auto& e : arr) {
    out.push_back({e.at("type").get<std::string>(), e.at("offset").get<std::int64_t>(),
                   e.at("length").get<std::int64_t>()});
  }
  return out;
}

template <typename T>
std::optional<T> optional_field(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<T>();
}

std::optional<std::string> find_mention(std::string_view text, const std::vector<MessageEntity>& entities,
                                        const std::string& wanted) {
  for (const auto& e : entities) {
    if (e.type != "mention") continue;
    std::string slice;
    if (e.offset < 0 || e.length <= 0 ||
        !text::utf16_slice(text, static_cast<std::size_t>(e.offset), static_cast<std::size_t>(e.length), slice)) {
      spdlog::warn("ignoring malformed mention entity (offset {}, length {})", e.offset, e.length);
      continue;
    }
    if (text::to_lower_ascii(slice) == wanted) return slice;
  }
  return std::nullopt;
}

}  // namespace

WebhookUpdate parse_update(std::string_view body) {
  try {
    const auto j = json::parse(body);
    WebhookUpdate u;
    u.update_id = j.at("update_id").get<std::int64_t>();
    if (!j.contains("message") || j["message"].is_null()) return u;
    const auto& m = j["message"];
    WebhookMessage msg;
    msg.message_id = m.at("message_id").get<std::int64_t>();
    msg.date_s = m.at("date").get<std::int64_t>();
    msg.chat_id = m.at("chat").at("id").get<std::int64_t>();
    if (m.contains("from") && m["from"].is_object()) {
      msg.first_name = m["from"].value("first_name", std::string{});
      msg.username = m["from"].value("username", std::string{});
    }
    msg.text = optional_field<std::string>(m, "text");
    msg.caption = optional_field<std::string>(m, "caption");
    if (m.contains("entities")) msg.entities = parse_entities(m["entities"]);
    if (m.contains("caption_entities")) msg.caption_entities = parse_entities(m["caption_entities"]);
    if (m.contains("photo")) {
      for (const auto& p : m["photo"]) {
        msg.photo.push_back({p.at("file_id").get<std::string>(), optional_field<std::int64_t>(p, "file_size")});
      }
    }
    u.message = std::move(msg);
    return u;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse, std::string("malformed webhook update: ") + e.what());
  }
}

MentionDecision detect_mention(const WebhookUpdate& update, std::string_view bot_handle) {
  if (!update.message) return {};
  std::string_view handle = bot_handle;
  if (!handle.empty() && handle.front() == '@') handle.remove_prefix(1);
  if (handle.empty()) return {};
  const std::string wanted = "@" + text::to_lower_ascii(handle);

  const auto& m = *update.message;
  if (m.text) {
    if (auto hit = find_mention(*m.text, m.entities, wanted)) return {true, hit};
  }
  if (m.caption) {
    if (auto hit = find_mention(*m.caption, m.caption_entities, wanted)) return {true, hit};
  }
  return {};
}

std::string sanitize(std::string_view input) {
  std::string out;
  out.reserve(input.size());
  std::size_t chars = 0;
  for (std::uint32_t cp : text::decode_utf8(input)) {
    std::string_view entity;
    switch (cp) {
      case '&': entity = "&amp;"; break;
      case '<': entity = "&lt;"; break;
      case '>': entity = "&gt;"; break;
      case '"': entity = "&quot;"; break;
      case '\'': entity = "&#39;"; break;
      default: break;
    }
    const std::size_t width = entity.empty() ? 1 : entity.size();
    if (chars + width > store::kMaxTextChars) break;
    if (entity.empty()) {
      text::append_utf8(out, cp);
    } else {
      out.append(entity);
    }
    chars += width;
  }
  return out;
}

void FixturePhotoFetcher::add(std::string file_id, FetchedPhoto photo) {
  std::lock_guard lock(mutex_);
  photos_[std::move(file_id)] = std::move(photo);
}

FetchedPhoto FixturePhotoFetcher::fetch(const PhotoSize& photo) {
  std::lock_guard lock(mutex_);
  auto it = photos_.find(photo.file_id);
  if (it == photos_.end()) throw Error(ErrorCode::not_found, "no fixture for file " + photo.file_id);
  return it->second;
}

HttpPhotoFetcher::HttpPhotoFetcher(std::string api_base, std::string bot_token)
    : api_base_(std::move(api_base)), bot_token_(std::move(bot_token)) {
  while (!api_base_.empty() && api_base_.back() == '/') api_base_.pop_back();
}

FetchedPhoto HttpPhotoFetcher::fetch(const PhotoSize& photo) {
  httplib::Client client(api_base_);
  client.set_connection_timeout(std::chrono::seconds(10));
  client.set_read_timeout(std::chrono::seconds(30));
  client.set_follow_location(true);

  httplib::Params params{{"file_id", photo.file_id}};
  auto meta = client.Get("/bot" + bot_token_ + "/getFile", params, httplib::Headers{});
  if (!meta || meta->status != 200) throw Error(ErrorCode::io, "getFile failed for " + photo.file_id);
  const auto j = json::parse(meta->body);
  if (!j.value("ok", false)) throw Error(ErrorCode::io, "getFile rejected " + photo.file_id);
  const auto& result = j.at("result");
  if (result.contains("file_size") && result["file_size"].get<std::int64_t>() >
                                          static_cast<std::int64_t>(store::kMaxBlobBytes)) {
    throw Error(ErrorCode::too_large, "photo " + photo.file_id + " exceeds 20 MB");
  }
  const auto path = result.at("file_path").get<std::string>();

  FetchedPhoto out;
  std::size_t received = 0;
  auto res = client.Get("/file/bot" + bot_token_ + "/" + path, httplib::Headers{},
                        [&](const char* data, std::size_t len) {
                          received += len;
                          if (received > store::kMaxBlobBytes) return false;
                          out.bytes.insert(out.bytes.end(), data, data + len);
                          return true;
                        });
  if (received > store::kMaxBlobBytes) throw Error(ErrorCode::too_large, "photo exceeds 20 MB");
  if (!res || res->status != 200) throw Error(ErrorCode::io, "download failed for " + photo.file_id);
  if (res->has_header("Content-Type")) out.media_type = res->get_header_value("Content-Type");
  return out;
}

std::string_view to_string(AckStatus s) {
  return s == AckStatus::acknowledged ? "acknowledged" : "ignored";
}

std::string sender_identity(const WebhookMessage& message) {
  return message.username.empty() ? message.first_name : message.username;
}

Ingestor::Ingestor(store::Store& store, IngestConfig config)
    : store_(store), config_(std::move(config)) {
  if (!config_.entropy) {
    config_.entropy = [] { return PipelineEntropy{hash::random_bytes(backend::kNonceSize), hash::random_u64()}; };
  }
  const std::size_t n = std::max<std::size_t>(1, config_.workers);
  workers_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    workers_.emplace_back([this](std::stop_token stop) { worker_loop(stop); });
  }
}

Ingestor::~Ingestor() {
  wait_idle();
  for (auto& w : workers_) w.request_stop();
  work_cv_.notify_all();
  workers_.clear();
}

std::optional<std::string> Ingestor::store_photo(const WebhookMessage& message) {
  if (message.photo.empty()) return std::nullopt;
  // Sizes arrive smallest first; keep the largest one.
  const auto& best = *std::max_element(message.photo.begin(), message.photo.end(), [](const auto& a, const auto& b) {
    return a.file_size.value_or(0) < b.file_size.value_or(0);
  });
  if (best.file_size && *best.file_size > static_cast<std::int64_t>(store::kMaxBlobBytes)) {
    spdlog::warn("photo {} is {} bytes, over the 20 MB limit; storing message without it", best.file_id,
                 *best.file_size);
    return std::nullopt;
  }
  if (!config_.photo_fetcher) {
    spdlog::warn("no photo fetcher configured; dropping photo {}", best.file_id);
    return std::nullopt;
  }
  try {
    auto photo = config_.photo_fetcher->fetch(best);
    return store_.put_blob(photo.bytes, photo.media_type).key;
  } catch (const std::exception& e) {
    spdlog::warn("photo {} not stored: {}", best.file_id, e.what());
    return std::nullopt;
  }
}

AckStatus Ingestor::handle_update(const std::string& group_id, const WebhookUpdate& update) {
  const auto decision = detect_mention(update, config_.bot_handle);
  if (!decision.mentioned) return AckStatus::ignored;
  const auto& m = *update.message;

  store::MessageRecord record;
  record.group_id = group_id;
  record.message_id = std::to_string(m.message_id);
  record.timestamp_ms = m.date_s * 1000;
  record.sender_name = m.first_name;
  record.sender_handle = sender_identity(m);
  record.text = sanitize(m.text ? *m.text : m.caption.value_or(""));

  if (store_.get(group_id, record.message_id)) return AckStatus::acknowledged;  // webhook retry
  record.photo_ref = store_photo(m);
  if (!store_.put_phase1(record)) return AckStatus::acknowledged;

  Job job{std::move(record), config_.entropy()};
  {
    std::lock_guard lock(mutex_);
    queue_.push_back(std::move(job));
    ++in_flight_;
  }
  work_cv_.notify_one();
  return AckStatus::acknowledged;
}

void Ingestor::run_job(const Job& job) {
  const auto& r = job.record;
  const backend::FallbackInputs fallback{job.entropy.nonce, r.timestamp_ms};
  backend::QuantumResult qr;
  sig::Badge badge;
  try {
    qr = backend::execute_pipeline(r.sender_handle, config_.backend, config_.timeout, job.entropy.rng_seed,
                                   fallback);
    badge = sig::derive_badge(r.sender_handle, r.text, qr, job.entropy.nonce);
  } catch (const std::exception& e) {
    spdlog::error("pipeline for {}/{} failed ({}); issuing fallback badge", r.group_id, r.message_id, e.what());
    qr = backend::fallback_result(r.sender_handle, job.entropy.nonce, r.timestamp_ms);
    qr.rng_seed = job.entropy.rng_seed;
    badge = sig::derive_badge(r.sender_handle, r.text, qr, job.entropy.nonce);
  }
  try {
    store_.complete_signature(r.group_id, r.message_id, badge, store::provenance_of(qr));
  } catch (const Error& e) {
    spdlog::warn("dropping badge for {}/{}: {}", r.group_id, r.message_id, e.what());
  }
}

void Ingestor::worker_loop(std::stop_token stop) {
  while (true) {
    Job job;
    {
      std::unique_lock lock(mutex_);
      if (!work_cv_.wait(lock, stop, [&] { return !queue_.empty(); })) return;
      job = std::move(queue_.front());
      queue_.pop_front();
    }
    try {
      run_job(job);
    } catch (const std::exception& e) {
      spdlog::error("badge job crashed: {}", e.what());
    }
    {
      std::lock_guard lock(mutex_);
      --in_flight_;
    }
    idle_cv_.notify_all();
  }
}

void Ingestor::wait_idle() {
  std::unique_lock lock(mutex_);
  idle_cv_.wait(lock, [&] { return in_flight_ == 0; });
}

std::size_t Ingestor::pending() const {
  std::lock_guard lock(mutex_);
  return in_flight_;
}

}  // namespace qsign::ingest
