#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "qsign/backend.hpp"
#include "qsign/hash.hpp"
#include "qsign/store.hpp"

namespace qsign::ingest {

struct MessageEntity {
  std::string type;
  std::int64_t offset = 0;  // UTF-16 code units
  std::int64_t length = 0;
};

struct PhotoSize {
  std::string file_id;
  std::optional<std::int64_t> file_size;
};

struct WebhookMessage {
  std::int64_t message_id = 0;
  std::int64_t date_s = 0;
  std::int64_t chat_id = 0;
  std::string first_name;
  std::string username;
  std::optional<std::string> text;
  std::vector<MessageEntity> entities;
  std::optional<std::string> caption;
  std::vector<MessageEntity> caption_entities;
  std::vector<PhotoSize> photo;
};

// Subset of the bot-platform Update object. Updates without `message`
// (edits, callbacks, ...) parse fine and are ignored downstream.
struct WebhookUpdate {
  std::int64_t update_id = 0;
  std::optional<WebhookMessage> message;
};

// Throws Error(parse) on invalid JSON or wrong field types.
WebhookUpdate parse_update(std::string_view body);

struct MentionDecision {
  bool mentioned = false;
  std::optional<std::string> matched_text;
};

MentionDecision detect_mention(const WebhookUpdate& update, std::string_view bot_handle);

// HTML-entity encodes & < > " ' and truncates to 4096 characters without
// splitting an entity.
std::string sanitize(std::string_view text);

struct FetchedPhoto {
  std::vector<std::uint8_t> bytes;
  std::string media_type = "image/jpeg";
};

class PhotoFetcher {
 public:
  virtual ~PhotoFetcher() = default;
  // Throws on failure.
  virtual FetchedPhoto fetch(const PhotoSize& photo) = 0;
};

class FixturePhotoFetcher final : public PhotoFetcher {
 public:
  void add(std::string file_id, FetchedPhoto photo);
  FetchedPhoto fetch(const PhotoSize& photo) override;

 private:
  std::mutex mutex_;
  std::map<std::string, FetchedPhoto> photos_;
};

// Bot file API: GET {api_base}/bot{token}/getFile?file_id=..., then
// GET {api_base}/file/bot{token}/{file_path}.
class HttpPhotoFetcher final : public PhotoFetcher {
 public:
  HttpPhotoFetcher(std::string api_base, std::string bot_token);
  FetchedPhoto fetch(const PhotoSize& photo) override;

 private:
  std::string api_base_;
  std::string bot_token_;
};

enum class AckStatus { acknowledged, ignored };
std::string_view to_string(AckStatus s);

struct PipelineEntropy {
  hash::Bytes nonce;  // 32 bytes
  std::uint64_t rng_seed = 0;
};

struct IngestConfig {
  std::string bot_handle;
  std::shared_ptr<backend::QuantumBackend> backend;
  std::chrono::milliseconds timeout = backend::kDefaultTimeout;
  std::shared_ptr<PhotoFetcher> photo_fetcher;  // optional
  std::size_t workers = 4;
  // Defaults to the OS CSPRNG.
  std::function<PipelineEntropy()> entropy;
};

// Webhook front half: mention gate, sanitize, phase-1 persist, then hands the
// quantum pipeline to a worker pool and returns without waiting for it.
class Ingestor {
 public:
  Ingestor(store::Store& store, IngestConfig config);
  ~Ingestor();
  Ingestor(const Ingestor&) = delete;
  Ingestor& operator=(const Ingestor&) = delete;

  AckStatus handle_update(const std::string& group_id, const WebhookUpdate& update);

  // Blocks until every dispatched pipeline has finished.
  void wait_idle();
  std::size_t pending() const;
  const IngestConfig& config() const { return config_; }

 private:
  struct Job {
    store::MessageRecord record;
    PipelineEntropy entropy;
  };

  std::optional<std::string> store_photo(const WebhookMessage& message);
  void run_job(const Job& job);
  void worker_loop(std::stop_token stop);

  store::Store& store_;
  IngestConfig config_;

  mutable std::mutex mutex_;
  std::condition_variable_any work_cv_;
  std::condition_variable idle_cv_;
  std::deque<Job> queue_;
  std::size_t in_flight_ = 0;
  std::vector<std::jthread> workers_;
};

// Identity used for rotation angles and badge derivation: handle if present,
// otherwise first name.
std::string sender_identity(const WebhookMessage& message);

}  // namespace qsign::ingest
