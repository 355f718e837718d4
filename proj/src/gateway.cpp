#include "jitai/gateway.hpp"

#include "httplib.h"

namespace jitai {

using nlohmann::json;

GatewayIngestResponse handle_ingest(TimeSeriesStore& store, std::string_view jsonl_body) {
  const IngestReport report = import_jsonl_text(store, jsonl_body);

  GatewayIngestResponse response;
  response.body["appended"] = report.appended;
  json errors = json::array();
  for (const auto& e : report.errors) {
    errors.push_back(json{{"line", e.line}, {"error", e.message}});
  }
  response.body["errors"] = errors;
  if (report.errors.empty()) {
    response.status = 200;
  } else if (report.appended > 0) {
    response.status = 207;
  } else {
    response.status = 400;
  }
  return response;
}

GatewayExportResponse handle_export(const TimeSeriesStore& store, std::string_view series_name,
                                    std::string_view from, std::string_view to) {
  GatewayExportResponse response;
  auto series = parse_series(series_name);
  if (!series) {
    response.status = 400;
    response.content_type = "text/plain";
    response.body = "unknown series '" + std::string(series_name) +
                    "' (use survey|sensor|weather|notification)\n";
    return response;
  }
  UtcTime t0 = UtcTime::min();
  UtcTime t1 = UtcTime::max();
  if (!from.empty()) {
    auto parsed = parse_rfc3339(from);
    if (!parsed) {
      response.status = 400;
      response.content_type = "text/plain";
      response.body = "bad 'from' timestamp\n";
      return response;
    }
    t0 = *parsed;
  }
  if (!to.empty()) {
    auto parsed = parse_rfc3339(to);
    if (!parsed) {
      response.status = 400;
      response.content_type = "text/plain";
      response.body = "bad 'to' timestamp\n";
      return response;
    }
    t1 = *parsed;
  }
  const auto keys = store.keys();
  response.status = 200;
  response.content_type = "text/csv";
  response.body = csv::encode_series(store, *series, keys, t0, t1);
  return response;
}

void attach_gateway(httplib::Server& server, TimeSeriesStore& store) {
  server.Post("/ingest", [&store](const httplib::Request& req, httplib::Response& res) {
    auto response = handle_ingest(store, req.body);
    res.status = response.status;
    res.set_content(response.body.dump() + "\n", "application/json");
  });
  server.Get("/export", [&store](const httplib::Request& req, httplib::Response& res) {
    auto response = handle_export(store, req.get_param_value("series"),
                                  req.get_param_value("from"), req.get_param_value("to"));
    res.status = response.status;
    res.set_content(response.body, response.content_type);
  });
}

}  // namespace jitai
