#pragma once
// Per-participant preference models. Each participant gets one model per
// label kind, trained on their first N micro-surveys. Features are the
// participant's class-proportion history plus the hour of day (4 features);
// the model is a random forest of Gini-grown binary trees, with 3-fold
// cross-validation selecting hyperparameters before the final refit.

#include "jitai/domain.hpp"
#include "jitai/result.hpp"
#include "jitai/rng.hpp"

#include "json.hpp"

#include <array>
#include <span>
#include <vector>

namespace jitai {

inline constexpr int kFeatureCount = kClassesPerKind + 1;  // proportions + hour

using ClassVector = std::array<double, kClassesPerKind>;

struct FeatureVector {
  ClassVector class_proportions{};  // sums to 1
  int hour = 0;                     // local hour of day, 0..23

  double feature(int index) const {
    return index < kClassesPerKind ? class_proportions[std::size_t(index)] : double(hour);
  }
  bool operator==(const FeatureVector&) const = default;
};

struct TrainingRow {
  FeatureVector features;
  int label = 0;  // class index in the kind's fixed order
};

// Proportion of each class over the whole span; uniform when empty.
ClassVector class_proportions(std::span<const MicroSurveyResponse> history, LabelKind kind);

// Row i pairs the class proportions over rows [0, i) (row 0 gets the uniform
// vector) with the local hour of row i's ended_at; the label is row i's
// answer. Features therefore never see row i's own label.
std::vector<TrainingRow> extract_training_set(std::span<const MicroSurveyResponse> history,
                                              LabelKind kind, const TimeZone& tz);

double gini_impurity(const ClassVector& counts);
// Weighted Gini of the partition x[feature] <= threshold vs greater.
double split_impurity(std::span<const TrainingRow> rows, int feature, double threshold);

struct TreeParams {
  int max_depth = 0;            // 0 = unlimited
  int min_leaf = 1;
  int feature_subset_size = 0;  // features sampled per node; 0 = all
};

class DecisionTree {
 public:
  struct Node {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    ClassVector class_counts{};  // leaves only

    bool is_leaf() const { return left < 0; }
  };

  // Greedy binary splits minimizing weighted Gini; candidate thresholds are
  // midpoints between consecutive distinct values; stops on purity,
  // max_depth, or min_leaf. Degenerate rows give a single-leaf tree.
  static DecisionTree train(std::span<const TrainingRow> rows, const TreeParams& params,
                            SplitMix64& rng);

  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& leaf_for(const FeatureVector& features) const;
  ClassVector predict_proba(const FeatureVector& features) const;  // normalized leaf counts

  nlohmann::json to_json() const;
  static Result<DecisionTree> from_json(const nlohmann::json& j);

 private:
  std::vector<Node> nodes_;
};

struct ForestParams {
  int n_trees = 100;
  int max_depth = 0;            // 0 = unlimited
  int min_leaf = 1;
  int feature_subset_size = 2;  // ceil(sqrt(feature count))
  bool bootstrap = true;
  std::uint64_t rng_seed = 0;

  bool operator==(const ForestParams&) const = default;
};

struct PersonalModel {
  ParticipantId participant;
  LabelKind label_kind = LabelKind::Thermal;
  int training_size = 0;
  ForestParams params;
  bool degenerate = false;  // single-class training data, CV skipped
  std::vector<std::string> warnings;
  std::vector<DecisionTree> forest;

  // Mean of per-tree leaf frequencies; a valid distribution.
  ClassVector predict_proba(const FeatureVector& features) const;
  int predict_class(const FeatureVector& features) const;  // argmax, ties to lowest index

  nlohmann::json to_json() const;
  static Result<PersonalModel> from_json(const nlohmann::json& j);
};

PersonalModel train_forest(std::span<const TrainingRow> rows, const ForestParams& params,
                           ParticipantId participant, LabelKind kind);

// Mean accuracy over stratified k folds (leave-one-out when rows < k). Folds
// degrade to plain random assignment when a class has fewer members than
// folds; `*warnings` records it when provided.
double cv_accuracy(std::span<const TrainingRow> rows, const ForestParams& params, int folds,
                   std::uint64_t seed, std::vector<std::string>* warnings = nullptr);

struct HyperparamGrid {
  std::vector<int> n_trees{25, 100};
  std::vector<int> max_depths{2, 4, 0};  // 0 = unlimited
  int min_leaf = 1;
  int feature_subset_size = 2;
  int folds = 3;
};

// Grid search by mean CV accuracy (ties prefer the simplest: smallest depth,
// then fewest trees), then a bootstrap refit on all rows. Deterministic for
// a given seed.
PersonalModel train_forest_cv(std::span<const TrainingRow> rows, const HyperparamGrid& grid,
                              std::uint64_t seed, ParticipantId participant, LabelKind kind);

struct DayPlanEntry {
  int hour = 0;  // local hour
  LabelKind kind = LabelKind::Thermal;
  PreferenceLabel target_label;
  double probability = 0.0;

  bool operator==(const DayPlanEntry&) const = default;
};

struct DayPlan {
  ParticipantId participant;
  std::int64_t local_date = 0;
  // sorted by descending probability, ties by ascending hour then
  // thermal-before-noise; at most four entries, never a no-change target
  std::vector<DayPlanEntry> entries;
};

// Evaluates both models at each hour of [start_hour, end_hour] (inclusive;
// 9..19 gives 11 hourly evaluations) with the participant's full-history
// class proportions. Hours whose argmax class is no-change contribute
// nothing; the top four candidates across both kinds form the plan.
DayPlan plan_day(const PersonalModel& thermal_model, const PersonalModel& noise_model,
                 std::span<const MicroSurveyResponse> history, std::int64_t local_date,
                 int start_hour, int end_hour);

// Phase 1 never personalizes; Phase 2 switches once the participant has
// completed the configured survey count and both models are trained.
TriggerMechanism mode_of(int survey_count, bool models_trained, const PhaseConfig& config);

}  // namespace jitai
