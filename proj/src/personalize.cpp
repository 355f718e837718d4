#include "jitai/personalize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace jitai {

using nlohmann::json;

ClassVector class_proportions(std::span<const MicroSurveyResponse> history, LabelKind kind) {
  ClassVector counts{};
  for (const MicroSurveyResponse& s : history) {
    const PreferenceLabel& label = kind == LabelKind::Thermal ? s.thermal : s.noise;
    counts[std::size_t(label.class_index())] += 1.0;
  }
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  if (total == 0.0) {
    counts.fill(1.0 / kClassesPerKind);
    return counts;
  }
  for (double& c : counts) c /= total;
  return counts;
}

std::vector<TrainingRow> extract_training_set(std::span<const MicroSurveyResponse> history,
                                              LabelKind kind, const TimeZone& tz) {
  std::vector<TrainingRow> rows;
  rows.reserve(history.size());
  ClassVector counts{};
  double total = 0.0;
  for (const MicroSurveyResponse& s : history) {
    TrainingRow row;
    if (total == 0.0) {
      row.features.class_proportions.fill(1.0 / kClassesPerKind);
    } else {
      for (int c = 0; c < kClassesPerKind; ++c) {
        row.features.class_proportions[std::size_t(c)] = counts[std::size_t(c)] / total;
      }
    }
    row.features.hour = tz.to_local(s.ended_at).hour;
    const PreferenceLabel& label = kind == LabelKind::Thermal ? s.thermal : s.noise;
    row.label = label.class_index();
    rows.push_back(row);

    counts[std::size_t(row.label)] += 1.0;
    total += 1.0;
  }
  return rows;
}

double gini_impurity(const ClassVector& counts) {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  if (total <= 0.0) return 0.0;
  double sum_sq = 0.0;
  for (double c : counts) {
    const double p = c / total;
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

double split_impurity(std::span<const TrainingRow> rows, int feature, double threshold) {
  ClassVector left{}, right{};
  for (const TrainingRow& row : rows) {
    if (row.features.feature(feature) <= threshold) {
      left[std::size_t(row.label)] += 1.0;
    } else {
      right[std::size_t(row.label)] += 1.0;
    }
  }
  const double n_left = std::accumulate(left.begin(), left.end(), 0.0);
  const double n_right = std::accumulate(right.begin(), right.end(), 0.0);
  const double n = n_left + n_right;
  if (n == 0.0) return 0.0;
  return (n_left / n) * gini_impurity(left) + (n_right / n) * gini_impurity(right);
}

namespace {

ClassVector count_labels(std::span<const TrainingRow> rows, std::span<const int> indices) {
  ClassVector counts{};
  for (int i : indices) counts[std::size_t(rows[std::size_t(i)].label)] += 1.0;
  return counts;
}

bool is_pure(const ClassVector& counts) {
  int nonzero = 0;
  for (double c : counts) {
    if (c > 0.0) ++nonzero;
  }
  return nonzero <= 1;
}

// distinct feature indices to search at this node, ascending
std::vector<int> sample_features(int subset_size, SplitMix64& rng) {
  std::vector<int> all(kFeatureCount);
  std::iota(all.begin(), all.end(), 0);
  if (subset_size <= 0 || subset_size >= kFeatureCount) return all;
  for (int i = 0; i < subset_size; ++i) {
    const int j = i + int(rng.bounded(std::uint64_t(kFeatureCount - i)));
    std::swap(all[std::size_t(i)], all[std::size_t(j)]);
  }
  all.resize(std::size_t(subset_size));
  std::sort(all.begin(), all.end());
  return all;
}

struct TreeBuilder {
  std::span<const TrainingRow> rows;
  const TreeParams& params;
  SplitMix64& rng;
  std::vector<DecisionTree::Node> nodes;

  int build(std::vector<int>& indices, int depth) {
    const ClassVector counts = count_labels(rows, indices);
    const bool depth_capped = params.max_depth > 0 && depth >= params.max_depth;
    if (is_pure(counts) || depth_capped ||
        int(indices.size()) < 2 * std::max(1, params.min_leaf)) {
      return make_leaf(counts);
    }

    const double parent = gini_impurity(counts);
    int best_feature = -1;
    double best_threshold = 0.0;
    double best_impurity = parent - 1e-12;

    for (int feature : sample_features(params.feature_subset_size, rng)) {
      // single sorted sweep; thresholds are midpoints between distinct values
      std::vector<std::pair<double, int>> ordered;
      ordered.reserve(indices.size());
      for (int i : indices) {
        ordered.emplace_back(rows[std::size_t(i)].features.feature(feature),
                             rows[std::size_t(i)].label);
      }
      std::sort(ordered.begin(), ordered.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });

      ClassVector left{}, right = counts;
      const double n = double(ordered.size());
      for (std::size_t v = 1; v < ordered.size(); ++v) {
        left[std::size_t(ordered[v - 1].second)] += 1.0;
        right[std::size_t(ordered[v - 1].second)] -= 1.0;
        if (ordered[v - 1].first == ordered[v].first) continue;
        const double n_left = double(v);
        const double n_right = n - n_left;
        if (n_left < params.min_leaf || n_right < params.min_leaf) continue;
        const double impurity =
            (n_left / n) * gini_impurity(left) + (n_right / n) * gini_impurity(right);
        if (impurity < best_impurity) {
          best_impurity = impurity;
          best_feature = feature;
          best_threshold = (ordered[v - 1].first + ordered[v].first) / 2.0;
        }
      }
    }

    if (best_feature < 0) return make_leaf(counts);

    std::vector<int> left_idx, right_idx;
    for (int i : indices) {
      if (rows[std::size_t(i)].features.feature(best_feature) <= best_threshold) {
        left_idx.push_back(i);
      } else {
        right_idx.push_back(i);
      }
    }
    indices.clear();
    indices.shrink_to_fit();

    const int node_index = int(nodes.size());
    nodes.emplace_back();
    nodes[std::size_t(node_index)].feature = best_feature;
    nodes[std::size_t(node_index)].threshold = best_threshold;
    const int left = build(left_idx, depth + 1);
    const int right = build(right_idx, depth + 1);
    nodes[std::size_t(node_index)].left = left;
    nodes[std::size_t(node_index)].right = right;
    return node_index;
  }

  int make_leaf(const ClassVector& counts) {
    const int index = int(nodes.size());
    nodes.emplace_back();
    nodes[std::size_t(index)].class_counts = counts;
    return index;
  }
};

ClassVector normalize(const ClassVector& counts) {
  ClassVector out = counts;
  const double total = std::accumulate(out.begin(), out.end(), 0.0);
  if (total <= 0.0) {
    out.fill(1.0 / kClassesPerKind);
    return out;
  }
  for (double& c : out) c /= total;
  return out;
}

}  // namespace

DecisionTree DecisionTree::train(std::span<const TrainingRow> rows, const TreeParams& params,
                                 SplitMix64& rng) {
  DecisionTree tree;
  if (rows.empty()) {
    Node leaf;
    leaf.class_counts.fill(1.0);  // uniform stand-in; callers guard empty rows
    tree.nodes_.push_back(leaf);
    return tree;
  }
  std::vector<int> indices(rows.size());
  std::iota(indices.begin(), indices.end(), 0);
  TreeBuilder builder{rows, params, rng, {}};
  builder.build(indices, 0);
  tree.nodes_ = std::move(builder.nodes);
  return tree;
}

const DecisionTree::Node& DecisionTree::leaf_for(const FeatureVector& features) const {
  int index = 0;
  while (!nodes_[std::size_t(index)].is_leaf()) {
    const Node& node = nodes_[std::size_t(index)];
    index = features.feature(node.feature) <= node.threshold ? node.left : node.right;
  }
  return nodes_[std::size_t(index)];
}

ClassVector DecisionTree::predict_proba(const FeatureVector& features) const {
  return normalize(leaf_for(features).class_counts);
}

json DecisionTree::to_json() const {
  json nodes = json::array();
  for (const Node& node : nodes_) {
    if (node.is_leaf()) {
      nodes.push_back(json{{"counts", node.class_counts}});
    } else {
      nodes.push_back(json{{"feature", node.feature},
                           {"threshold", node.threshold},
                           {"left", node.left},
                           {"right", node.right}});
    }
  }
  return json{{"nodes", nodes}};
}

Result<DecisionTree> DecisionTree::from_json(const json& j) {
  auto fail = [](std::string m) { return Result<DecisionTree>::failure(std::move(m)); };
  if (!j.is_object() || !j.contains("nodes") || !j["nodes"].is_array()) {
    return fail("tree: expected {nodes: [...]}");
  }
  DecisionTree tree;
  const auto& arr = j["nodes"];
  for (const auto& item : arr) {
    Node node;
    if (item.contains("counts")) {
      const auto& counts = item["counts"];
      if (!counts.is_array() || counts.size() != kClassesPerKind) {
        return fail("tree: leaf counts must have one entry per class");
      }
      for (int c = 0; c < kClassesPerKind; ++c) {
        node.class_counts[std::size_t(c)] = counts[std::size_t(c)].get<double>();
      }
    } else {
      node.feature = item.value("feature", -1);
      node.threshold = item.value("threshold", 0.0);
      node.left = item.value("left", -1);
      node.right = item.value("right", -1);
      if (node.feature < 0 || node.feature >= kFeatureCount || node.left < 0 ||
          node.right < 0 || node.left >= int(arr.size()) || node.right >= int(arr.size())) {
        return fail("tree: malformed internal node");
      }
    }
    tree.nodes_.push_back(node);
  }
  if (tree.nodes_.empty()) return fail("tree: empty node list");
  return Result<DecisionTree>::success(std::move(tree));
}

ClassVector PersonalModel::predict_proba(const FeatureVector& features) const {
  ClassVector sum{};
  if (forest.empty()) {
    sum.fill(1.0 / kClassesPerKind);
    return sum;
  }
  for (const DecisionTree& tree : forest) {
    const ClassVector p = tree.predict_proba(features);
    for (int c = 0; c < kClassesPerKind; ++c) sum[std::size_t(c)] += p[std::size_t(c)];
  }
  for (double& v : sum) v /= double(forest.size());
  return sum;
}

int PersonalModel::predict_class(const FeatureVector& features) const {
  const ClassVector p = predict_proba(features);
  int best = 0;
  for (int c = 1; c < kClassesPerKind; ++c) {
    if (p[std::size_t(c)] > p[std::size_t(best)]) best = c;
  }
  return best;
}

namespace {

std::vector<TrainingRow> bootstrap_sample(std::span<const TrainingRow> rows, SplitMix64& rng) {
  std::vector<TrainingRow> sample;
  sample.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    sample.push_back(rows[std::size_t(rng.bounded(rows.size()))]);
  }
  return sample;
}

bool single_class(std::span<const TrainingRow> rows, int* the_class = nullptr) {
  if (rows.empty()) return true;
  const int first = rows.front().label;
  for (const TrainingRow& row : rows) {
    if (row.label != first) return false;
  }
  if (the_class) *the_class = first;
  return true;
}

// Stratified fold ids; falls back to plain random when a class is smaller
// than the fold count.
std::vector<int> assign_folds(std::span<const TrainingRow> rows, int folds, SplitMix64& rng,
                              std::vector<std::string>* warnings) {
  std::vector<int> fold_of(rows.size(), 0);
  std::array<std::vector<int>, kClassesPerKind> by_class;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    by_class[std::size_t(rows[i].label)].push_back(int(i));
  }
  bool stratifiable = true;
  for (const auto& members : by_class) {
    if (!members.empty() && int(members.size()) < folds) stratifiable = false;
  }
  if (stratifiable) {
    for (auto& members : by_class) {
      rng.shuffle(members);
      for (std::size_t i = 0; i < members.size(); ++i) {
        fold_of[std::size_t(members[i])] = int(i) % folds;
      }
    }
  } else {
    if (warnings) {
      warnings->push_back("stratification degraded to random folds (class smaller than fold count)");
    }
    std::vector<int> order(rows.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    for (std::size_t i = 0; i < order.size(); ++i) {
      fold_of[std::size_t(order[i])] = int(i) % folds;
    }
  }
  return fold_of;
}

}  // namespace

PersonalModel train_forest(std::span<const TrainingRow> rows, const ForestParams& params,
                           ParticipantId participant, LabelKind kind) {
  PersonalModel model;
  model.participant = std::move(participant);
  model.label_kind = kind;
  model.training_size = int(rows.size());
  model.params = params;

  if (single_class(rows)) {
    model.degenerate = true;
    if (rows.empty()) {
      model.warnings.push_back("trained on zero rows; predictions are uniform");
      SplitMix64 rng(params.rng_seed);
      model.forest.push_back(DecisionTree::train(rows, TreeParams{}, rng));
      return model;
    }
    // pure root collapses to a single leaf predicting the constant class
    SplitMix64 rng(params.rng_seed);
    model.forest.push_back(DecisionTree::train(rows, TreeParams{0, 1, 0}, rng));
    return model;
  }

  const TreeParams tree_params{params.max_depth, params.min_leaf, params.feature_subset_size};
  for (int t = 0; t < std::max(1, params.n_trees); ++t) {
    SplitMix64 rng(derive_seed(params.rng_seed, "tree:" + std::to_string(t)));
    if (params.bootstrap) {
      const std::vector<TrainingRow> sample = bootstrap_sample(rows, rng);
      model.forest.push_back(DecisionTree::train(sample, tree_params, rng));
    } else {
      model.forest.push_back(DecisionTree::train(rows, tree_params, rng));
    }
  }
  return model;
}

double cv_accuracy(std::span<const TrainingRow> rows, const ForestParams& params, int folds,
                   std::uint64_t seed, std::vector<std::string>* warnings) {
  if (rows.empty()) return 0.0;
  int k = folds;
  if (int(rows.size()) < folds) {
    k = int(rows.size());  // leave-one-out
    if (warnings) warnings->push_back("fewer rows than folds; using leave-one-out");
  }
  if (k < 2) return 0.0;

  SplitMix64 fold_rng(derive_seed(seed, "folds"));
  const std::vector<int> fold_of = assign_folds(rows, k, fold_rng, warnings);

  double accuracy_sum = 0.0;
  int scored_folds = 0;
  for (int f = 0; f < k; ++f) {
    std::vector<TrainingRow> train_rows, test_rows;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      (fold_of[i] == f ? test_rows : train_rows).push_back(rows[i]);
    }
    if (test_rows.empty() || train_rows.empty()) continue;
    ForestParams fold_params = params;
    fold_params.rng_seed = derive_seed(seed, "cv:" + std::to_string(f));
    const PersonalModel model =
        train_forest(train_rows, fold_params, ParticipantId{"cv"}, LabelKind::Thermal);
    int correct = 0;
    for (const TrainingRow& row : test_rows) {
      if (model.predict_class(row.features) == row.label) ++correct;
    }
    accuracy_sum += double(correct) / double(test_rows.size());
    ++scored_folds;
  }
  return scored_folds == 0 ? 0.0 : accuracy_sum / double(scored_folds);
}

PersonalModel train_forest_cv(std::span<const TrainingRow> rows, const HyperparamGrid& grid,
                              std::uint64_t seed, ParticipantId participant, LabelKind kind) {
  if (single_class(rows)) {
    // CV is meaningless on one class; emit the constant model directly
    ForestParams params;
    params.n_trees = 1;
    params.min_leaf = grid.min_leaf;
    params.feature_subset_size = grid.feature_subset_size;
    params.rng_seed = derive_seed(seed, "final");
    return train_forest(rows, params, std::move(participant), kind);
  }

  std::vector<std::string> warnings;
  ForestParams best_params;
  double best_accuracy = -1.0;
  auto depth_rank = [](int depth) {
    return depth == 0 ? std::numeric_limits<int>::max() : depth;
  };

  int setting = 0;
  for (int depth : grid.max_depths) {
    for (int trees : grid.n_trees) {
      ForestParams candidate;
      candidate.n_trees = trees;
      candidate.max_depth = depth;
      candidate.min_leaf = grid.min_leaf;
      candidate.feature_subset_size = grid.feature_subset_size;
      candidate.bootstrap = true;
      const double accuracy =
          cv_accuracy(rows, candidate, grid.folds,
                      derive_seed(seed, "setting:" + std::to_string(setting)),
                      setting == 0 ? &warnings : nullptr);
      ++setting;
      const bool better =
          accuracy > best_accuracy ||
          (accuracy == best_accuracy &&
           (depth_rank(candidate.max_depth) < depth_rank(best_params.max_depth) ||
            (depth_rank(candidate.max_depth) == depth_rank(best_params.max_depth) &&
             candidate.n_trees < best_params.n_trees)));
      if (better) {
        best_accuracy = accuracy;
        best_params = candidate;
      }
    }
  }

  best_params.rng_seed = derive_seed(seed, "final");
  PersonalModel model = train_forest(rows, best_params, std::move(participant), kind);
  model.warnings.insert(model.warnings.end(), warnings.begin(), warnings.end());
  return model;
}

json PersonalModel::to_json() const {
  json j;
  j["participant"] = participant.value;
  j["label_kind"] = to_string(label_kind);
  j["training_size"] = training_size;
  j["degenerate"] = degenerate;
  j["warnings"] = warnings;
  json class_order = json::array();
  for (std::string_view name : PreferenceLabel::class_names(label_kind)) {
    class_order.push_back(std::string(name));
  }
  j["class_order"] = class_order;
  j["params"] = json{{"n_trees", params.n_trees},
                     {"max_depth", params.max_depth},
                     {"min_leaf", params.min_leaf},
                     {"feature_subset_size", params.feature_subset_size},
                     {"bootstrap", params.bootstrap},
                     {"rng_seed", params.rng_seed}};
  json trees = json::array();
  for (const DecisionTree& tree : forest) trees.push_back(tree.to_json());
  j["trees"] = trees;
  return j;
}

Result<PersonalModel> PersonalModel::from_json(const json& j) {
  auto fail = [](std::string m) { return Result<PersonalModel>::failure(std::move(m)); };
  if (!j.is_object()) return fail("model: expected a JSON object");
  auto kind = parse_label_kind(j.value("label_kind", std::string{}));
  if (!kind) return fail("model: bad label_kind");

  PersonalModel model;
  model.participant = ParticipantId{j.value("participant", std::string{})};
  model.label_kind = *kind;
  model.training_size = j.value("training_size", 0);
  model.degenerate = j.value("degenerate", false);
  if (j.contains("warnings") && j["warnings"].is_array()) {
    for (const auto& w : j["warnings"]) {
      if (w.is_string()) model.warnings.push_back(w.get<std::string>());
    }
  }
  if (j.contains("class_order")) {
    const auto& names = PreferenceLabel::class_names(*kind);
    const auto& order = j["class_order"];
    if (!order.is_array() || order.size() != names.size()) {
      return fail("model: class_order length mismatch");
    }
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (order[i].get<std::string>() != names[i]) {
        return fail("model: class_order does not match this build's fixed order");
      }
    }
  }
  if (j.contains("params") && j["params"].is_object()) {
    const auto& p = j["params"];
    model.params.n_trees = p.value("n_trees", 0);
    model.params.max_depth = p.value("max_depth", 0);
    model.params.min_leaf = p.value("min_leaf", 1);
    model.params.feature_subset_size = p.value("feature_subset_size", 0);
    model.params.bootstrap = p.value("bootstrap", true);
    model.params.rng_seed = p.value("rng_seed", std::uint64_t{0});
  }
  if (!j.contains("trees") || !j["trees"].is_array() || j["trees"].empty()) {
    return fail("model: missing trees");
  }
  for (const auto& tree_json : j["trees"]) {
    auto tree = DecisionTree::from_json(tree_json);
    if (!tree.ok()) return fail(tree.error);
    model.forest.push_back(std::move(*tree));
  }
  return Result<PersonalModel>::success(std::move(model));
}

DayPlan plan_day(const PersonalModel& thermal_model, const PersonalModel& noise_model,
                 std::span<const MicroSurveyResponse> history, std::int64_t local_date,
                 int start_hour, int end_hour) {
  DayPlan plan;
  plan.participant = thermal_model.participant;
  plan.local_date = local_date;

  std::vector<DayPlanEntry> candidates;
  auto evaluate = [&](const PersonalModel& model, LabelKind kind) {
    FeatureVector features;
    features.class_proportions = class_proportions(history, kind);
    for (int h = start_hour; h <= end_hour; ++h) {
      features.hour = h;
      const ClassVector proba = model.predict_proba(features);
      int best = 0;
      for (int c = 1; c < kClassesPerKind; ++c) {
        if (proba[std::size_t(c)] > proba[std::size_t(best)]) best = c;
      }
      if (best == kNoChangeIndex) continue;
      DayPlanEntry entry;
      entry.hour = h;
      entry.kind = kind;
      entry.target_label = *PreferenceLabel::from_index(kind, best);
      entry.probability = proba[std::size_t(best)];
      candidates.push_back(entry);
    }
  };
  evaluate(thermal_model, LabelKind::Thermal);
  evaluate(noise_model, LabelKind::Noise);

  std::sort(candidates.begin(), candidates.end(), [](const DayPlanEntry& a, const DayPlanEntry& b) {
    if (a.probability != b.probability) return a.probability > b.probability;
    if (a.hour != b.hour) return a.hour < b.hour;
    return a.kind < b.kind;  // thermal before noise
  });
  if (candidates.size() > 4) candidates.resize(4);
  plan.entries = std::move(candidates);
  return plan;
}

TriggerMechanism mode_of(int survey_count, bool models_trained, const PhaseConfig& config) {
  if (config.phase == Phase::Phase1) return TriggerMechanism::Threshold;
  if (survey_count >= config.personalization_switch_count && models_trained) {
    return TriggerMechanism::Personalized;
  }
  return TriggerMechanism::Threshold;
}

}  // namespace jitai
