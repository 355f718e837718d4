#include "jitai/triggers.hpp"

#include <algorithm>

namespace jitai {

NotificationScheduler::Decision NotificationScheduler::preview(const ParticipantId& participant,
                                                               UtcTime fired_at) const {
  Decision decision;
  const LocalCivil local = config_.timezone.to_local(fired_at);
  if (config_.weekdays_only && local.is_weekend()) {
    decision.reason = SuppressReason::Weekend;
    return decision;
  }
  const int minute = local.minutes_of_day();
  if (minute < config_.window_start_hour * 60 || minute >= config_.window_end_hour * 60) {
    decision.reason = SuppressReason::OutsideWindow;
    return decision;
  }
  const int sent = sent_on_day(participant, local.local_day);
  if (sent >= config_.daily_budget) {
    decision.reason = SuppressReason::BudgetExhausted;
    return decision;
  }
  decision.admitted = true;
  decision.sequence_in_day = sent + 1;
  return decision;
}

void NotificationScheduler::commit(const ParticipantId& participant, UtcTime fired_at) {
  const LocalCivil local = config_.timezone.to_local(fired_at);
  ++sent_[{participant.value, local.local_day}];
}

int NotificationScheduler::sent_on_day(const ParticipantId& participant,
                                       std::int64_t local_day) const {
  auto it = sent_.find({participant.value, local_day});
  return it == sent_.end() ? 0 : it->second;
}

std::optional<GeoPoint> latest_location(const TimeSeriesStore& store,
                                        const ParticipantId& participant, UtcTime t) {
  auto latest = store.latest_at_or_before(StreamKey::surveys(participant), t);
  if (!latest) return std::nullopt;
  return std::get<MicroSurveyResponse>(*latest).location();
}

std::optional<TriggerEvent> evaluate_thermal(const TimeSeriesStore& store,
                                             const StationRegistry& registry,
                                             const ParticipantId& participant, UtcTime t,
                                             const TriggerConfig& config) {
  const auto location = latest_location(store, participant, t);
  if (!location || registry.size() == 0) return std::nullopt;
  const Station& station = registry.nearest(location->lat, location->lon);
  auto latest = store.latest_at_or_before(StreamKey::weather(station.id), t);
  if (!latest) return std::nullopt;
  const auto& observation = std::get<WeatherObservation>(*latest);
  if (!(observation.air_temperature_c > config.temp_threshold_c)) return std::nullopt;

  TriggerEvent event;
  event.participant = participant;
  event.kind = LabelKind::Thermal;
  event.mechanism = TriggerMechanism::Threshold;
  event.target_label = PreferenceLabel::thermal_cooler();
  event.fired_at = t;
  event.cause = TriggerCause::temperature(observation.air_temperature_c);
  event.location = location;
  return event;
}

namespace {

TriggerEvent noise_event(const TimeSeriesStore& store, const ParticipantId& participant,
                         const SensorSample& sample) {
  TriggerEvent event;
  event.participant = participant;
  event.kind = LabelKind::Noise;
  event.mechanism = TriggerMechanism::Threshold;
  event.target_label = PreferenceLabel::noise_quieter();
  event.fired_at = sample.observed_at;
  event.cause = TriggerCause::sound(sample.value);
  event.location = latest_location(store, participant, sample.observed_at);
  return event;
}

}  // namespace

std::optional<TriggerEvent> evaluate_noise(const TimeSeriesStore& store,
                                           const ParticipantId& participant, UtcTime t,
                                           const TriggerConfig& config) {
  auto latest =
      store.latest_at_or_before(StreamKey::sensor(participant, SensorKind::SoundLevel), t);
  if (!latest) return std::nullopt;
  const auto& sample = std::get<SensorSample>(*latest);
  if (!(sample.value > config.noise_threshold_dba)) return std::nullopt;
  return noise_event(store, participant, sample);
}

std::vector<TriggerEvent> evaluate_noise_arrivals(const TimeSeriesStore& store,
                                                  const ParticipantId& participant,
                                                  UtcTime after, UtcTime until,
                                                  const TriggerConfig& config) {
  std::vector<TriggerEvent> events;
  if (until <= after) return events;
  const auto samples = store.query_range(
      StreamKey::sensor(participant, SensorKind::SoundLevel), after + seconds{1},
      until + seconds{1});
  for (const Record& record : samples) {
    const auto& sample = std::get<SensorSample>(record);
    if (sample.value > config.noise_threshold_dba) {
      events.push_back(noise_event(store, participant, sample));
    }
  }
  return events;
}

DecisionEngine::DecisionEngine(TimeSeriesStore* store, StationRegistry registry,
                               std::shared_ptr<WeatherProvider> weather, PushProvider* push,
                               MessageTemplates templates, EngineConfig config,
                               std::function<void(std::string)> log)
    : store_(store),
      registry_(std::move(registry)),
      push_(push),
      templates_(std::move(templates)),
      config_(std::move(config)),
      log_(std::move(log)),
      scheduler_(config_.trigger),
      poller_(std::move(weather), &registry_, store_, log_) {}

void DecisionEngine::train_if_due(const ParticipantId& participant, ParticipantState& state,
                                  UtcTime t, int survey_count) {
  if (state.trained || config_.phase.phase != Phase::Phase2) return;
  if (survey_count < config_.phase.personalization_switch_count) return;

  auto surveys = store_->query_range(StreamKey::surveys(participant), UtcTime::min(),
                                     UtcTime::max());
  std::vector<MicroSurveyResponse> history;
  history.reserve(std::size_t(config_.phase.personalization_switch_count));
  for (const Record& record : surveys) {
    history.push_back(std::get<MicroSurveyResponse>(record));
    if (int(history.size()) >= config_.phase.personalization_switch_count) break;
  }

  const TimeZone& tz = config_.trigger.timezone;
  for (LabelKind kind : {LabelKind::Thermal, LabelKind::Noise}) {
    auto rows = extract_training_set(history, kind, tz);
    auto seed = derive_seed(config_.training_seed,
                            participant.value + ":" + std::string(to_string(kind)));
    auto model = train_forest_cv(rows, config_.training_grid, seed, participant, kind);
    if (kind == LabelKind::Thermal) {
      state.thermal_model = std::move(model);
    } else {
      state.noise_model = std::move(model);
    }
  }
  state.trained = true;
  state.switch_tick = t;
  if (log_) {
    log_("participant " + participant.value + " switched to personalized mode at " +
         format_rfc3339(t));
  }
}

std::vector<TriggerEvent> DecisionEngine::personalized_events(const ParticipantId& participant,
                                                              ParticipantState& state,
                                                              UtcTime t) {
  std::vector<TriggerEvent> events;
  const TimeZone& tz = config_.trigger.timezone;
  const LocalCivil local = tz.to_local(t);

  if (state.plan_date != local.local_day) {
    auto surveys = store_->query_range(StreamKey::surveys(participant), UtcTime::min(),
                                       UtcTime::max());
    std::vector<MicroSurveyResponse> history;
    for (const Record& record : surveys) {
      history.push_back(std::get<MicroSurveyResponse>(record));
      if (int(history.size()) >= config_.phase.personalization_switch_count) break;
    }
    state.plan = plan_day(*state.thermal_model, *state.noise_model, history, local.local_day,
                          config_.trigger.window_start_hour, config_.trigger.window_end_hour);
    state.plan_date = local.local_day;
    state.plan_consumed.assign(state.plan.entries.size(), false);
  }

  if (t <= state.switch_tick) return events;  // never fire at the switch tick itself

  // fire order within one tick: hour, then thermal before noise
  std::vector<std::size_t> order(state.plan.entries.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const DayPlanEntry& ea = state.plan.entries[a];
    const DayPlanEntry& eb = state.plan.entries[b];
    if (ea.hour != eb.hour) return ea.hour < eb.hour;
    return ea.kind < eb.kind;
  });
  for (std::size_t idx : order) {
    if (state.plan_consumed[idx]) continue;
    const DayPlanEntry& entry = state.plan.entries[idx];
    if (local.hour != entry.hour) continue;
    state.plan_consumed[idx] = true;

    TriggerEvent event;
    event.participant = participant;
    event.kind = entry.kind;
    event.mechanism = TriggerMechanism::Personalized;
    event.target_label = entry.target_label;
    event.fired_at = t;
    event.cause = TriggerCause::probability(entry.probability);
    event.location = latest_location(*store_, participant, t);
    events.push_back(event);
  }
  return events;
}

NotificationRecord DecisionEngine::decide_and_dispatch(const TriggerEvent& event) {
  NotificationRecord record;
  record.event = event;

  const auto decision = scheduler_.preview(event.participant, event.fired_at);
  if (!decision.admitted) {
    record.suppressed = decision.reason;
    return record;
  }

  auto payload = templates_.render(event, config_.trigger.timezone);
  if (!payload.ok()) {
    if (log_) log_("render failed: " + payload.error);
    record.suppressed = SuppressReason::DispatchError;
    return record;
  }

  PushMessage message;
  message.recipient = event.participant.value;
  message.title = event.kind == LabelKind::Thermal ? "Thermal comfort" : "Noise";
  message.body = *payload;
  message.sent_at = event.fired_at;
  const DeliveryReceipt receipt = push_->send(message);
  if (!receipt.accepted) {
    if (log_) log_("dispatch failed: " + receipt.reason);
    record.suppressed = SuppressReason::DispatchError;
    return record;
  }

  scheduler_.commit(event.participant, event.fired_at);
  record.payload_text = *payload;
  record.sequence_in_day = decision.sequence_in_day;
  return record;
}

std::vector<NotificationRecord> DecisionEngine::run_tick(
    UtcTime t, std::span<const ParticipantId> participants) {
  std::vector<ParticipantId> ordered(participants.begin(), participants.end());
  std::sort(ordered.begin(), ordered.end());
  ordered.erase(std::unique(ordered.begin(), ordered.end()), ordered.end());

  const bool poll_now = t >= next_poll_;
  if (poll_now) {
    std::vector<WeatherPoller::ParticipantLocation> locations;
    for (const ParticipantId& p : ordered) {
      if (auto location = latest_location(*store_, p, t)) {
        locations.push_back({p, *location});
      }
    }
    poller_.poll(t, locations);
    next_poll_ = t + config_.trigger.weather_poll_interval;
  }

  std::vector<NotificationRecord> out;
  for (const ParticipantId& p : ordered) {
    ParticipantState& state = participants_[p.value];
    const int survey_count = store_->count_surveys(p, t);
    train_if_due(p, state, t, survey_count);

    std::vector<TriggerEvent> events;
    const TriggerMechanism mechanism = mode_of(survey_count, state.trained, config_.phase);
    if (mechanism == TriggerMechanism::Threshold) {
      if (survey_count >= config_.phase.threshold_start_surveys) {
        if (poll_now) {
          if (auto event = evaluate_thermal(*store_, registry_, p, t, config_.trigger)) {
            events.push_back(*event);
          }
        }
        auto noise_events =
            evaluate_noise_arrivals(*store_, p, state.sound_processed, t, config_.trigger);
        events.insert(events.end(), noise_events.begin(), noise_events.end());
      }
      // samples before the mechanism activates are never revisited
      state.sound_processed = std::max(state.sound_processed, t);
    } else {
      auto plan_events = personalized_events(p, state, t);
      events.insert(events.end(), plan_events.begin(), plan_events.end());
    }

    for (const TriggerEvent& event : events) {
      NotificationRecord record = decide_and_dispatch(event);
      auto ack = store_->append(StreamKey::notifications(p), Record{record});
      if (!ack.ok() && log_) log_("notification log append failed: " + ack.error);
      out.push_back(std::move(record));
    }
  }
  return out;
}

TriggerMechanism DecisionEngine::mode(const ParticipantId& participant, UtcTime t) const {
  auto it = participants_.find(participant.value);
  const bool trained = it != participants_.end() && it->second.trained;
  return mode_of(store_->count_surveys(participant, t), trained, config_.phase);
}

bool DecisionEngine::models_trained(const ParticipantId& participant) const {
  auto it = participants_.find(participant.value);
  return it != participants_.end() && it->second.trained;
}

const PersonalModel* DecisionEngine::model(const ParticipantId& participant,
                                           LabelKind kind) const {
  auto it = participants_.find(participant.value);
  if (it == participants_.end() || !it->second.trained) return nullptr;
  const auto& state = it->second;
  return kind == LabelKind::Thermal ? &*state.thermal_model : &*state.noise_model;
}

}  // namespace jitai
