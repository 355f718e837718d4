#pragma once
// Message rendering and delivery. Templates are keyed "kind.label" with
// "kind.threshold" for the rule-based messages; providers are pluggable and
// the recording mock doubles as the simulation outbox.

#include "jitai/domain.hpp"
#include "jitai/result.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace jitai {

class MessageTemplates {
 public:
  // Built-in copy covering every key; studies ship a JSON file to reword.
  static MessageTemplates defaults();
  // JSON object mapping "thermal.threshold", "noise.prefer_quieter", ... to
  // template strings. Placeholders: {temperature}, {sound_level}, {hour}.
  // Fails unless every required key is present and placeholders are known.
  static Result<MessageTemplates> from_json_file(const std::filesystem::path& path);
  static Result<MessageTemplates> from_json_text(std::string_view text);

  static std::string key_of(const TriggerEvent& event);
  static std::vector<std::string> required_keys();

  const std::string& raw(const std::string& key) const;

  // Deterministic substitution; measured causes render to one decimal and
  // {hour} renders as the local hour of fired_at.
  Result<std::string> render(const TriggerEvent& event, const TimeZone& tz) const;

 private:
  std::map<std::string, std::string> templates_;
};

struct PushMessage {
  std::string recipient;
  std::string title;
  std::string body;
  UtcTime sent_at{};

  bool operator==(const PushMessage&) const = default;
};

struct DeliveryReceipt {
  bool accepted = false;
  std::string reason;

  static DeliveryReceipt ok() { return {true, {}}; }
  static DeliveryReceipt failed(std::string why) { return {false, std::move(why)}; }
};

class PushProvider {
 public:
  virtual ~PushProvider() = default;
  virtual DeliveryReceipt send(const PushMessage& message) = 0;
};

// Records accepted messages in an inspectable outbox.
class MockPushProvider : public PushProvider {
 public:
  DeliveryReceipt send(const PushMessage& message) override;

  const std::vector<PushMessage>& outbox() const { return outbox_; }
  std::string outbox_jsonl() const;
  Result<std::monostate> export_outbox(const std::filesystem::path& file) const;

 private:
  std::vector<PushMessage> outbox_;
};

// Always fails with a fixed reason; exercises the DispatchError path.
class FailingPushProvider : public PushProvider {
 public:
  explicit FailingPushProvider(std::string reason = "connection refused")
      : reason_(std::move(reason)) {}
  DeliveryReceipt send(const PushMessage&) override { return DeliveryReceipt::failed(reason_); }

 private:
  std::string reason_;
};

// POST {recipient, title, body, sent_at} as JSON; the api key rides in an
// Authorization bearer header (PUSH_API_KEY).
class HttpPushProvider : public PushProvider {
 public:
  HttpPushProvider(std::string url, std::string api_key);
  DeliveryReceipt send(const PushMessage& message) override;

 private:
  std::string url_;
  std::string api_key_;
};

}  // namespace jitai
