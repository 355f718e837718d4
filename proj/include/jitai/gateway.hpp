#pragma once
// Ingestion gateway wire shape: POST /ingest with a JSONL body returning
// per-line status, GET /export streaming a series as CSV. The handlers are
// plain functions; attach_gateway mounts them on an embedding httplib server.

#include "jitai/result.hpp"
#include "jitai/store.hpp"

#include "json.hpp"

#include <string>
#include <string_view>

namespace httplib {
class Server;
}

namespace jitai {

struct GatewayIngestResponse {
  int status = 200;  // 200 all lines ok, 207 partial, 400 nothing appended
  nlohmann::json body;
};

GatewayIngestResponse handle_ingest(TimeSeriesStore& store, std::string_view jsonl_body);

struct GatewayExportResponse {
  int status = 200;
  std::string content_type;
  std::string body;
};

// series: survey|sensor|weather|notification; from/to optional RFC 3339
// bounds ([from, to), the store's half-open convention).
GatewayExportResponse handle_export(const TimeSeriesStore& store, std::string_view series,
                                    std::string_view from, std::string_view to);

void attach_gateway(httplib::Server& server, TimeSeriesStore& store);

}  // namespace jitai
