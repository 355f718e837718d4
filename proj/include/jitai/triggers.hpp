#pragma once
// Threshold trigger evaluation and the admission scheduler shared by both
// mechanisms, plus the engine that runs one decision tick: poll weather,
// evaluate triggers or consume personalized plans, admit against the daily
// budget/window, dispatch, and log every decision.

#include "jitai/dispatch.hpp"
#include "jitai/domain.hpp"
#include "jitai/personalize.hpp"
#include "jitai/store.hpp"
#include "jitai/weather.hpp"

#include <functional>
#include <map>
#include <memory>
#include <span>

namespace jitai {

// Budget and window gate. Sends require a weekday local time inside
// [window_start, window_end) with the day's sent count under the budget;
// counts reset at local midnight because they key on the local date.
class NotificationScheduler {
 public:
  explicit NotificationScheduler(TriggerConfig config) : config_(std::move(config)) {}

  struct Decision {
    bool admitted = false;
    int sequence_in_day = 0;                                   // when admitted
    SuppressReason reason = SuppressReason::BudgetExhausted;   // when not
  };

  // Pure check; nothing is consumed until commit (a failed dispatch must not
  // burn budget).
  Decision preview(const ParticipantId& participant, UtcTime fired_at) const;
  void commit(const ParticipantId& participant, UtcTime fired_at);

  int sent_on_day(const ParticipantId& participant, std::int64_t local_day) const;
  const TriggerConfig& config() const { return config_; }

 private:
  // keyed by (participant, local day) so replay order cannot corrupt counts
  TriggerConfig config_;
  std::map<std::pair<std::string, std::int64_t>, int> sent_;
};

// Threshold rules. Both return nothing when no relevant data exists yet.
// Thermal reads the latest observation of the station nearest the
// participant's most recent survey location; fires iff strictly above the
// configured threshold.
std::optional<TriggerEvent> evaluate_thermal(const TimeSeriesStore& store,
                                             const StationRegistry& registry,
                                             const ParticipantId& participant, UtcTime t,
                                             const TriggerConfig& config);
// Latest sound sample at or before t, strictly above the threshold.
std::optional<TriggerEvent> evaluate_noise(const TimeSeriesStore& store,
                                           const ParticipantId& participant, UtcTime t,
                                           const TriggerConfig& config);
// One decision per sample arrival in (after, until]; fired_at is the sample
// time.
std::vector<TriggerEvent> evaluate_noise_arrivals(const TimeSeriesStore& store,
                                                  const ParticipantId& participant,
                                                  UtcTime after, UtcTime until,
                                                  const TriggerConfig& config);

// Most recent survey location at or before t.
std::optional<GeoPoint> latest_location(const TimeSeriesStore& store,
                                        const ParticipantId& participant, UtcTime t);

struct EngineConfig {
  TriggerConfig trigger;
  PhaseConfig phase;
  HyperparamGrid training_grid;
  std::uint64_t training_seed = 0;
};

class DecisionEngine {
 public:
  DecisionEngine(TimeSeriesStore* store, StationRegistry registry,
                 std::shared_ptr<WeatherProvider> weather, PushProvider* push,
                 MessageTemplates templates, EngineConfig config,
                 std::function<void(std::string)> log = {});

  // Advances the engine to time t. Weather polls run when due on the
  // configured cadence; thermal is evaluated at poll ticks, noise at sample
  // arrivals, personalized plans at their planned hours. Every decision is
  // appended to the notifications stream and returned.
  // Deterministic ordering: participants by id; within one participant,
  // thermal before noise.
  std::vector<NotificationRecord> run_tick(UtcTime t,
                                           std::span<const ParticipantId> participants);

  TriggerMechanism mode(const ParticipantId& participant, UtcTime t) const;
  bool models_trained(const ParticipantId& participant) const;
  const PersonalModel* model(const ParticipantId& participant, LabelKind kind) const;
  const NotificationScheduler& scheduler() const { return scheduler_; }
  const WeatherPoller& poller() const { return poller_; }
  const EngineConfig& config() const { return config_; }

 private:
  struct ParticipantState {
    UtcTime sound_processed = UtcTime::min();
    bool trained = false;
    std::optional<PersonalModel> thermal_model;
    std::optional<PersonalModel> noise_model;
    UtcTime switch_tick = UtcTime::max();  // plan entries fire strictly after
    std::int64_t plan_date = -1;
    DayPlan plan;
    std::vector<bool> plan_consumed;
  };

  void train_if_due(const ParticipantId& participant, ParticipantState& state, UtcTime t,
                    int survey_count);
  std::vector<TriggerEvent> personalized_events(const ParticipantId& participant,
                                                ParticipantState& state, UtcTime t);
  NotificationRecord decide_and_dispatch(const TriggerEvent& event);

  TimeSeriesStore* store_;
  StationRegistry registry_;
  PushProvider* push_;
  MessageTemplates templates_;
  EngineConfig config_;
  std::function<void(std::string)> log_;
  NotificationScheduler scheduler_;
  WeatherPoller poller_;
  UtcTime next_poll_ = UtcTime::min();
  std::map<std::string, ParticipantState> participants_;
};

}  // namespace jitai
