// jitai — command-line front end: ingest, simulate, train, plan, summarize,
// bin, export. Exit codes: 0 success, 1 validation error, 2 I/O error.
// Diagnostics go to stderr; data goes to files or stdout.

#include "jitai/gateway.hpp"
#include "jitai/sim.hpp"
#include "jitai/spatial.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace jitai;
using nlohmann::json;

constexpr int kOk = 0;
constexpr int kValidationError = 1;
constexpr int kIoError = 2;

Result<std::string> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return Result<std::string>::failure("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return Result<std::string>::success(buf.str());
}

// an engine config from a run directory's resolved_config.json, or defaults
EngineConfig engine_config_for_run(const std::filesystem::path& run_dir) {
  EngineConfig config;
  auto text = read_file(run_dir / "resolved_config.json");
  if (!text.ok()) return config;
  json doc = json::parse(*text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) return config;
  CohortSpec spec;
  if (doc.contains("cohort")) {
    auto parsed = cohort_from_json(doc["cohort"]);
    if (parsed.ok()) spec = *parsed;
  }
  if (doc.contains("engine")) {
    auto parsed = engine_config_from_json(doc["engine"], spec);
    if (parsed.ok()) config = *parsed;
  }
  return config;
}

Result<std::vector<MicroSurveyResponse>> surveys_for_participant(
    const std::filesystem::path& run_dir, const std::string& participant) {
  using Out = Result<std::vector<MicroSurveyResponse>>;
  auto text = read_file(run_dir / "surveys.csv");
  if (!text.ok()) return Out::failure(text.error);
  auto parsed = csv::parse(*text);
  if (!parsed.ok()) return Out::failure("surveys.csv: " + parsed.error);
  std::vector<MicroSurveyResponse> surveys;
  for (auto& [key, record] : *parsed) {
    if (key.series != Series::Survey || key.owner != participant) continue;
    surveys.push_back(std::get<MicroSurveyResponse>(std::move(record)));
  }
  return Out::success(std::move(surveys));
}

int cmd_ingest(const std::string& input, const std::string& store_dir) {
  TimeSeriesStore store;
  const auto snapshot = std::filesystem::path(store_dir) / "store.jsonl";
  if (std::filesystem::exists(snapshot)) {
    auto loaded = load_jsonl(store, snapshot);
    if (!loaded.ok()) {
      std::cerr << "jitai: " << loaded.error << "\n";
      return kIoError;
    }
  }

  std::ifstream in(input, std::ios::binary);
  if (!in) {
    std::cerr << "jitai: cannot open " << input << "\n";
    return kIoError;
  }
  const IngestReport report = import_jsonl(store, in);

  auto saved = save_jsonl(store, snapshot);
  if (!saved.ok()) {
    std::cerr << "jitai: " << saved.error << "\n";
    return kIoError;
  }

  json out;
  out["appended"] = report.appended;
  json errors = json::array();
  for (const auto& e : report.errors) {
    errors.push_back(json{{"line", e.line}, {"error", e.message}});
    std::cerr << "jitai: line " << e.line << ": " << e.message << "\n";
  }
  out["errors"] = errors;
  std::cout << out.dump() << "\n";
  return report.errors.empty() ? kOk : kValidationError;
}

int cmd_simulate(const std::string& cohort_file, const std::string& out_dir,
                 const std::string& push_url, const std::string& templates_file) {
  auto spec = load_cohort_file(cohort_file);
  if (!spec.ok()) {
    std::cerr << "jitai: " << spec.error << "\n";
    return kValidationError;
  }
  // engine overrides may ride in the same config file
  json doc = json::object();
  {
    auto text = read_file(cohort_file);
    if (text.ok()) {
      if (std::filesystem::path(cohort_file).extension() == ".toml") {
        auto parsed = parse_toml_lite(*text);
        if (parsed.ok()) doc = std::move(*parsed);
      } else {
        auto parsed = json::parse(*text, nullptr, false);
        if (!parsed.is_discarded()) doc = std::move(parsed);
      }
    }
  }
  auto engine_config = engine_config_from_json(doc, *spec);
  if (!engine_config.ok()) {
    std::cerr << "jitai: " << engine_config.error << "\n";
    return kValidationError;
  }

  // fixtures and the recording outbox unless live endpoints are configured
  RunProviders providers;
  if (!templates_file.empty()) {
    auto templates = MessageTemplates::from_json_file(templates_file);
    if (!templates.ok()) {
      std::cerr << "jitai: " << templates.error << "\n";
      return kValidationError;
    }
    providers.templates = std::move(*templates);
  }
  if (const char* weather_url = std::getenv("WEATHER_API_URL");
      weather_url != nullptr && *weather_url != '\0') {
    providers.weather = std::make_shared<HttpWeatherProvider>(weather_url);
    providers.stations = *StationRegistry::from_stations(default_stations());
    std::cerr << "jitai: polling live weather from WEATHER_API_URL\n";
  }
  std::unique_ptr<HttpPushProvider> live_push;
  if (!push_url.empty()) {
    const char* key = std::getenv("PUSH_API_KEY");
    live_push = std::make_unique<HttpPushProvider>(push_url, key ? key : "");
    providers.push = live_push.get();
    std::cerr << "jitai: dispatching through " << push_url << "\n";
  }

  auto run = run_phase(*spec, *engine_config, providers);
  if (!run.ok()) {
    std::cerr << "jitai: " << run.error << "\n";
    return kValidationError;
  }
  auto written = write_run_dir(**run, *spec, *engine_config, out_dir);
  if (!written.ok()) {
    std::cerr << "jitai: " << written.error << "\n";
    return kIoError;
  }

  int sent = 0;
  for (const auto& r : (*run)->notifications) sent += r.is_sent() ? 1 : 0;
  std::cerr << "jitai: simulated " << spec->n_participants << " participants over "
            << spec->duration_weekdays << " weekdays: " << sent << " sent, "
            << ((*run)->notifications.size() - std::size_t(sent)) << " suppressed -> "
            << out_dir << "\n";
  return kOk;
}

int train_models(const std::filesystem::path& run_dir, const std::string& participant,
                 json& out_doc) {
  const EngineConfig config = engine_config_for_run(run_dir);
  auto surveys = surveys_for_participant(run_dir, participant);
  if (!surveys.ok()) {
    std::cerr << "jitai: " << surveys.error << "\n";
    return kIoError;
  }
  const int need = config.phase.personalization_switch_count;
  if (int(surveys->size()) < need) {
    std::cerr << "jitai: insufficient surveys (need " << need << ")\n";
    return kValidationError;
  }
  surveys->resize(std::size_t(need));

  out_doc = json::object();
  for (LabelKind kind : {LabelKind::Thermal, LabelKind::Noise}) {
    auto rows = extract_training_set(*surveys, kind, config.trigger.timezone);
    auto seed = derive_seed(config.training_seed,
                            participant + ":" + std::string(to_string(kind)));
    auto model = train_forest_cv(rows, config.training_grid, seed,
                                 ParticipantId{participant}, kind);
    out_doc[std::string(to_string(kind))] = model.to_json();
  }
  return kOk;
}

int cmd_train(const std::string& run_dir, const std::string& participant) {
  json models;
  const int status = train_models(run_dir, participant, models);
  if (status != kOk) return status;

  const auto model_dir = std::filesystem::path(run_dir) / "models";
  std::error_code ec;
  std::filesystem::create_directories(model_dir, ec);
  const auto path = model_dir / (participant + ".json");
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "jitai: cannot write " << path.string() << "\n";
    return kIoError;
  }
  out << models.dump(2) << "\n";
  std::cout << path.string() << "\n";
  return kOk;
}

int cmd_plan(const std::string& run_dir_s, const std::string& participant,
             const std::string& date) {
  const std::filesystem::path run_dir(run_dir_s);
  auto day = parse_date(date);
  if (!day) {
    std::cerr << "jitai: bad --date (expected YYYY-MM-DD)\n";
    return kValidationError;
  }
  const EngineConfig config = engine_config_for_run(run_dir);

  json models;
  const auto model_path = run_dir / "models" / (participant + ".json");
  if (std::filesystem::exists(model_path)) {
    auto text = read_file(model_path);
    if (!text.ok()) {
      std::cerr << "jitai: " << text.error << "\n";
      return kIoError;
    }
    models = json::parse(*text, nullptr, false);
    if (models.is_discarded()) {
      std::cerr << "jitai: " << model_path.string() << " is not valid JSON\n";
      return kValidationError;
    }
  } else {
    const int status = train_models(run_dir, participant, models);
    if (status != kOk) return status;
  }

  auto thermal = PersonalModel::from_json(models["thermal"]);
  auto noise = PersonalModel::from_json(models["noise"]);
  if (!thermal.ok() || !noise.ok()) {
    std::cerr << "jitai: " << (thermal.ok() ? noise.error : thermal.error) << "\n";
    return kValidationError;
  }

  auto surveys = surveys_for_participant(run_dir, participant);
  if (!surveys.ok()) {
    std::cerr << "jitai: " << surveys.error << "\n";
    return kIoError;
  }
  const int need = config.phase.personalization_switch_count;
  if (int(surveys->size()) < need) {
    std::cerr << "jitai: insufficient surveys (need " << need << ")\n";
    return kValidationError;
  }
  surveys->resize(std::size_t(need));

  const DayPlan plan = plan_day(*thermal, *noise, *surveys, *day,
                                config.trigger.window_start_hour,
                                config.trigger.window_end_hour);
  json out;
  out["participant"] = participant;
  out["date"] = format_date(*day);
  json entries = json::array();
  for (const DayPlanEntry& e : plan.entries) {
    entries.push_back(json{{"hour", e.hour},
                           {"kind", to_string(e.kind)},
                           {"target_label", e.target_label.text()},
                           {"probability", e.probability}});
  }
  out["entries"] = entries;
  std::cout << out.dump(2) << "\n";
  return kOk;
}

int cmd_summarize(const std::string& run_dir_s) {
  const std::filesystem::path run_dir(run_dir_s);
  auto log = notifications_from_csv_file(run_dir / "notifications.csv");
  if (!log.ok()) {
    std::cerr << "jitai: " << log.error << "\n";
    return kIoError;
  }
  const auto table = summarize(*log);
  const std::string csv_text = summary_csv(table);
  std::ofstream out(run_dir / "summary.csv", std::ios::binary);
  if (!out) {
    std::cerr << "jitai: cannot write summary.csv\n";
    return kIoError;
  }
  out << csv_text;
  std::cout << csv_text;
  return kOk;
}

int cmd_bin(const std::string& run_dir_s, double edge_m, double origin_lat, double origin_lon,
            bool origin_set, const std::string& cluster_file) {
  const std::filesystem::path run_dir(run_dir_s);
  if (edge_m <= 0.0) {
    std::cerr << "jitai: --hex-edge-m must be positive\n";
    return kValidationError;
  }
  auto log = notifications_from_csv_file(run_dir / "notifications.csv");
  if (!log.ok()) {
    std::cerr << "jitai: " << log.error << "\n";
    return kIoError;
  }
  const GeoPoint origin =
      origin_set ? GeoPoint{origin_lat, origin_lon} : centroid_origin(*log);

  json stats;
  stats["origin"] = json::array({origin.lat, origin.lon});
  stats["edge_m"] = edge_m;
  struct Slice {
    const char* name;
    std::optional<TriggerMechanism> mechanism;
  };
  for (const Slice& slice :
       {Slice{"all", std::nullopt}, Slice{"threshold", TriggerMechanism::Threshold},
        Slice{"personalized", TriggerMechanism::Personalized}}) {
    std::vector<NotificationRecord> filtered;
    for (const auto& r : *log) {
      if (!slice.mechanism || r.event.mechanism == *slice.mechanism) filtered.push_back(r);
    }
    const BinResult result = bin(filtered, origin, edge_m);
    const auto path = run_dir / ("hex_" + std::string(slice.name) + ".geojson");
    auto saved = export_geojson(result, path);
    if (!saved.ok()) {
      std::cerr << "jitai: " << saved.error << "\n";
      return kIoError;
    }
    stats[slice.name] = json{{"cells", result.cells.size()},
                             {"geolocated_sent", result.geolocated_sent},
                             {"sent_without_location", result.sent_without_location}};
  }

  if (!cluster_file.empty()) {
    auto text = read_file(cluster_file);
    if (!text.ok()) {
      std::cerr << "jitai: " << text.error << "\n";
      return kIoError;
    }
    json poly = json::parse(*text, nullptr, false);
    if (poly.is_discarded() || !poly.is_array()) {
      std::cerr << "jitai: cluster polygon must be a JSON array of [lat, lon]\n";
      return kValidationError;
    }
    std::vector<GeoPoint> polygon;
    for (const auto& vertex : poly) {
      if (!vertex.is_array() || vertex.size() != 2) {
        std::cerr << "jitai: cluster polygon must be a JSON array of [lat, lon]\n";
        return kValidationError;
      }
      polygon.push_back(GeoPoint{vertex[0].get<double>(), vertex[1].get<double>()});
    }
    stats["cluster_share"] =
        json{{"threshold", cluster_share(*log, polygon, TriggerMechanism::Threshold)},
             {"personalized", cluster_share(*log, polygon, TriggerMechanism::Personalized)}};
  }

  std::cout << stats.dump(2) << "\n";
  return kOk;
}

int cmd_export(const std::string& dir_s) {
  const std::filesystem::path dir(dir_s);
  TimeSeriesStore store;
  auto loaded = load_jsonl(store, dir / "store.jsonl");
  if (!loaded.ok()) {
    std::cerr << "jitai: " << loaded.error << "\n";
    return kIoError;
  }
  auto files = export_csv(store, dir);
  if (!files.ok()) {
    std::cerr << "jitai: " << files.error << "\n";
    return kIoError;
  }
  for (const auto& path : *files) std::cout << path.string() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"jitai — urban heat & noise intervention engine"};
  app.require_subcommand(1);

  std::string ingest_input, ingest_store = "store";
  auto* ingest = app.add_subcommand("ingest", "Append a JSONL batch to a store directory");
  ingest->add_option("input", ingest_input, "JSONL file (one record per line)")->required();
  ingest->add_option("--store", ingest_store, "store directory (default: ./store)");

  std::string sim_cohort, sim_out, sim_push_url, sim_templates;
  auto* simulate = app.add_subcommand("simulate", "Run a cohort simulation end to end");
  simulate->add_option("cohort", sim_cohort, "cohort spec (.json or .toml)")->required();
  simulate->add_option("--out", sim_out, "run directory to write")->required();
  simulate->add_option("--push-url", sim_push_url,
                       "live push endpoint (credentials via PUSH_API_KEY); mock when absent");
  simulate->add_option("--templates", sim_templates,
                       "message template JSON (built-in copy when absent)");

  std::string train_run = ".", train_participant;
  auto* train = app.add_subcommand("train", "Train personal models from a run directory");
  train->add_option("--participant", train_participant, "participant id")->required();
  train->add_option("--run", train_run, "run directory (default: .)");

  std::string plan_run = ".", plan_participant, plan_date;
  auto* plan = app.add_subcommand("plan", "Plan a day of personalized send hours");
  plan->add_option("--participant", plan_participant, "participant id")->required();
  plan->add_option("--date", plan_date, "local date YYYY-MM-DD")->required();
  plan->add_option("--run", plan_run, "run directory (default: .)");

  std::string summarize_dir;
  auto* summarize_cmd =
      app.add_subcommand("summarize", "Per-participant sent/suppressed counts");
  summarize_cmd->add_option("dir", summarize_dir, "run directory")->required();

  std::string bin_dir, bin_cluster;
  double bin_edge = 250.0, bin_origin_lat = 0.0, bin_origin_lon = 0.0;
  auto* bin_cmd = app.add_subcommand("bin", "Hex-bin sent notifications to GeoJSON");
  bin_cmd->add_option("dir", bin_dir, "run directory")->required();
  bin_cmd->add_option("--hex-edge-m", bin_edge, "hexagon edge length in meters (default 250)");
  auto* origin_lat_opt = bin_cmd->add_option("--origin-lat", bin_origin_lat, "binning origin");
  bin_cmd->add_option("--origin-lon", bin_origin_lon, "binning origin")->needs(origin_lat_opt);
  bin_cmd->add_option("--cluster-polygon", bin_cluster,
                      "JSON [lat,lon] polygon for a cluster-share report");

  std::string export_dir;
  auto* export_cmd = app.add_subcommand("export", "Export a store snapshot to per-series CSVs");
  export_cmd->add_option("dir", export_dir, "directory holding store.jsonl")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_name() != "RequiredError" || argc > 1) std::cerr << "jitai: " << e.what() << "\n";
    std::cerr << app.help();
    return kValidationError;
  }

  if (ingest->parsed()) return cmd_ingest(ingest_input, ingest_store);
  if (simulate->parsed()) {
    return cmd_simulate(sim_cohort, sim_out, sim_push_url, sim_templates);
  }
  if (train->parsed()) return cmd_train(train_run, train_participant);
  if (plan->parsed()) return cmd_plan(plan_run, plan_participant, plan_date);
  if (summarize_cmd->parsed()) return cmd_summarize(summarize_dir);
  if (bin_cmd->parsed()) {
    return cmd_bin(bin_dir, bin_edge, bin_origin_lat, bin_origin_lon,
                   origin_lat_opt->count() > 0, bin_cluster);
  }
  if (export_cmd->parsed()) return cmd_export(export_dir);

  std::cerr << app.help();
  return kValidationError;
}
