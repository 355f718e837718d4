#include "jitai/dispatch.hpp"

#include "httplib.h"
#include "json.hpp"

#include <cstdio>
#include <fstream>

namespace jitai {

using nlohmann::json;

namespace {

std::string one_decimal(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

const std::map<std::string, std::string>& default_templates() {
  static const std::map<std::string, std::string> kDefaults{
      {"thermal.threshold",
       "It is {temperature} C outside. Consider moving somewhere cooler or adjusting your "
       "space."},
      {"noise.threshold",
       "Sound around you reached {sound_level} dBA. A quieter spot or earphones could help."},
      {"thermal.prefer_cooler",
       "Around {hour}:00 you usually prefer it cooler. A shaded or air-conditioned spot may "
       "help."},
      {"thermal.prefer_warmer",
       "Around {hour}:00 you usually prefer it warmer. Consider a sunnier or less chilled "
       "spot."},
      {"noise.prefer_quieter",
       "Around {hour}:00 you usually prefer it quieter. A calmer spot or earphones could "
       "help."},
      {"noise.prefer_louder",
       "Around {hour}:00 you usually prefer a livelier setting. A busier spot might suit "
       "you."},
  };
  return kDefaults;
}

}  // namespace

MessageTemplates MessageTemplates::defaults() {
  MessageTemplates t;
  t.templates_ = default_templates();
  return t;
}

std::vector<std::string> MessageTemplates::required_keys() {
  std::vector<std::string> keys;
  for (const auto& [key, _] : default_templates()) keys.push_back(key);
  return keys;
}

std::string MessageTemplates::key_of(const TriggerEvent& event) {
  std::string key{to_string(event.kind)};
  key += '.';
  if (event.mechanism == TriggerMechanism::Threshold) {
    key += "threshold";
  } else {
    key += event.target_label.text();
  }
  return key;
}

Result<MessageTemplates> MessageTemplates::from_json_text(std::string_view text) {
  auto j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) {
    return Result<MessageTemplates>::failure("template file must be a JSON object");
  }
  MessageTemplates t;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_string()) {
      return Result<MessageTemplates>::failure("template '" + key + "' must be a string");
    }
    t.templates_[key] = value.get<std::string>();
  }
  for (const std::string& key : required_keys()) {
    if (!t.templates_.count(key)) {
      return Result<MessageTemplates>::failure("missing template for key '" + key + "'");
    }
  }
  // reject unknown placeholders up front so render never leaves one behind
  for (const auto& [key, body] : t.templates_) {
    std::size_t pos = 0;
    while ((pos = body.find('{', pos)) != std::string::npos) {
      auto end = body.find('}', pos);
      if (end == std::string::npos) {
        return Result<MessageTemplates>::failure("unterminated placeholder in '" + key + "'");
      }
      const std::string name = body.substr(pos + 1, end - pos - 1);
      if (name != "temperature" && name != "sound_level" && name != "hour") {
        return Result<MessageTemplates>::failure("unknown placeholder {" + name + "} in '" +
                                                 key + "'");
      }
      pos = end + 1;
    }
  }
  return Result<MessageTemplates>::success(std::move(t));
}

Result<MessageTemplates> MessageTemplates::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return Result<MessageTemplates>::failure("cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_text(text);
}

const std::string& MessageTemplates::raw(const std::string& key) const {
  static const std::string kEmpty;
  auto it = templates_.find(key);
  return it == templates_.end() ? kEmpty : it->second;
}

Result<std::string> MessageTemplates::render(const TriggerEvent& event,
                                             const TimeZone& tz) const {
  const std::string key = key_of(event);
  auto it = templates_.find(key);
  if (it == templates_.end()) {
    return Result<std::string>::failure("missing template for key '" + key + "'");
  }
  const std::string& body = it->second;

  std::string out;
  out.reserve(body.size() + 8);
  for (std::size_t i = 0; i < body.size();) {
    if (body[i] != '{') {
      out += body[i++];
      continue;
    }
    auto end = body.find('}', i);
    if (end == std::string::npos) {
      return Result<std::string>::failure("unterminated placeholder in '" + key + "'");
    }
    const std::string name = body.substr(i + 1, end - i - 1);
    if (name == "temperature" || name == "sound_level") {
      out += one_decimal(event.cause.value);
    } else if (name == "hour") {
      out += std::to_string(tz.to_local(event.fired_at).hour);
    } else {
      return Result<std::string>::failure("unknown placeholder {" + name + "} in '" + key + "'");
    }
    i = end + 1;
  }
  return Result<std::string>::success(std::move(out));
}

DeliveryReceipt MockPushProvider::send(const PushMessage& message) {
  outbox_.push_back(message);
  return DeliveryReceipt::ok();
}

std::string MockPushProvider::outbox_jsonl() const {
  std::string out;
  for (const PushMessage& m : outbox_) {
    json j;
    j["recipient"] = m.recipient;
    j["title"] = m.title;
    j["body"] = m.body;
    j["sent_at"] = format_rfc3339(m.sent_at);
    out += j.dump();
    out += '\n';
  }
  return out;
}

Result<std::monostate> MockPushProvider::export_outbox(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::binary);
  if (!out) return Result<std::monostate>::failure("cannot open " + file.string());
  out << outbox_jsonl();
  if (!out.good()) return Result<std::monostate>::failure("write failed: " + file.string());
  return Result<std::monostate>::success({});
}

HttpPushProvider::HttpPushProvider(std::string url, std::string api_key)
    : url_(std::move(url)), api_key_(std::move(api_key)) {}

DeliveryReceipt HttpPushProvider::send(const PushMessage& message) {
  auto split = url_.find('/', url_.find("//") + 2);
  const std::string base = split == std::string::npos ? url_ : url_.substr(0, split);
  const std::string path = split == std::string::npos ? "/" : url_.substr(split);

  json j;
  j["recipient"] = message.recipient;
  j["title"] = message.title;
  j["body"] = message.body;
  j["sent_at"] = format_rfc3339(message.sent_at);

  httplib::Client client(base);
  client.set_connection_timeout(5);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
  auto res = client.Post(path, headers, j.dump(), "application/json");
  if (!res) return DeliveryReceipt::failed("connection failed");
  if (res->status < 200 || res->status >= 300) {
    return DeliveryReceipt::failed("provider returned status " + std::to_string(res->status));
  }
  return DeliveryReceipt::ok();
}

}  // namespace jitai
