#include "puma/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <unordered_map>

#include "puma/assignment.hpp"
#include "puma/error.hpp"

namespace puma {

DiceCounts dice_counts(const LabelMask& pred, const LabelMask& gt, const Taxonomy& taxonomy) {
  if (pred.width != gt.width || pred.height != gt.height)
    fail(errc::dimension_mismatch,
         "dice_counts: prediction is " + std::to_string(pred.width) + "x" +
             std::to_string(pred.height) + ", ground truth " + std::to_string(gt.width) + "x" +
             std::to_string(gt.height));

  const int num_classes = taxonomy.num_classes();
  DiceCounts out;
  out.per_class.assign(static_cast<std::size_t>(num_classes), ClassPixelCounts{});

  for (std::size_t i = 0; i < pred.data.size(); ++i) {
    const int p = pred.data[i];
    const int g = gt.data[i];
    if (p >= 1 && p <= num_classes) ++out.per_class[static_cast<std::size_t>(p) - 1].pred_pixels;
    if (g >= 1 && g <= num_classes) ++out.per_class[static_cast<std::size_t>(g) - 1].gt_pixels;
    if (p == g && p >= 1 && p <= num_classes)
      ++out.per_class[static_cast<std::size_t>(p) - 1].intersection;
  }
  return out;
}

double macro_average(const std::vector<std::optional<double>>& per_class) {
  double sum = 0.0;
  std::size_t present = 0;
  for (const auto& value : per_class) {
    if (!value.has_value()) continue;
    sum += *value;
    ++present;
  }
  return present == 0 ? 0.0 : sum / static_cast<double>(present);
}

DiceSummary aggregate_dice(const std::vector<DiceCounts>& counts, DiceAggregation mode,
                           AbsentPolicy absent) {
  if (counts.empty()) fail(errc::empty_input, "aggregate_dice: no cases");
  const std::size_t num_classes = counts.front().per_class.size();
  for (const DiceCounts& c : counts)
    if (c.per_class.size() != num_classes)
      fail(errc::taxonomy_mismatch, "aggregate_dice: inconsistent class counts across cases");

  DiceSummary out;
  out.per_class.assign(num_classes, std::nullopt);

  for (std::size_t c = 0; c < num_classes; ++c) {
    if (mode == DiceAggregation::pooled) {
      std::uint64_t inter = 0, pred = 0, gt = 0;
      for (const DiceCounts& case_counts : counts) {
        inter += case_counts.per_class[c].intersection;
        pred += case_counts.per_class[c].pred_pixels;
        gt += case_counts.per_class[c].gt_pixels;
      }
      if (pred + gt > 0) {
        out.per_class[c] = 2.0 * static_cast<double>(inter) / static_cast<double>(pred + gt);
      } else if (absent == AbsentPolicy::score_one) {
        out.per_class[c] = 1.0;
      }
    } else {
      double sum = 0.0;
      std::size_t considered = 0;
      for (const DiceCounts& case_counts : counts) {
        const ClassPixelCounts& k = case_counts.per_class[c];
        if (k.pred_pixels + k.gt_pixels > 0) {
          sum += 2.0 * static_cast<double>(k.intersection) /
                 static_cast<double>(k.pred_pixels + k.gt_pixels);
          ++considered;
        } else if (absent == AbsentPolicy::score_one) {
          sum += 1.0;
          ++considered;
        }
      }
      if (considered > 0) out.per_class[c] = sum / static_cast<double>(considered);
    }
  }

  out.macro = macro_average(out.per_class);
  return out;
}

namespace {

struct ClassPoints {
  std::vector<int> ordinals;  // position in the owning NucleiSet
  std::vector<Point> points;
};

struct Edge {
  double distance;
  int pred;  // local index into ClassPoints
  int gt;
};

// All (pred, gt) pairs with Euclidean distance <= radius, found via a uniform
// grid over the ground-truth points (cell size = radius, 3x3 neighborhood).
std::vector<Edge> admissible_edges(const ClassPoints& pred, const ClassPoints& gt,
                                   double radius) {
  std::vector<Edge> edges;
  if (pred.points.empty() || gt.points.empty()) return edges;

  auto cell_of = [radius](double v) {
    return static_cast<std::int64_t>(std::floor(v / radius));
  };
  auto key_of = [](std::int64_t cx, std::int64_t cy) {
    return (static_cast<std::uint64_t>(cx) << 32) ^ static_cast<std::uint32_t>(cy);
  };

  std::unordered_map<std::uint64_t, std::vector<int>> grid;
  for (int j = 0; j < static_cast<int>(gt.points.size()); ++j)
    grid[key_of(cell_of(gt.points[j].x), cell_of(gt.points[j].y))].push_back(j);

  const double radius_sq = radius * radius;
  for (int i = 0; i < static_cast<int>(pred.points.size()); ++i) {
    const Point& p = pred.points[i];
    const std::int64_t cx = cell_of(p.x);
    const std::int64_t cy = cell_of(p.y);
    std::vector<int> candidates;
    for (std::int64_t dy = -1; dy <= 1; ++dy) {
      for (std::int64_t dx = -1; dx <= 1; ++dx) {
        const auto it = grid.find(key_of(cx + dx, cy + dy));
        if (it == grid.end()) continue;
        candidates.insert(candidates.end(), it->second.begin(), it->second.end());
      }
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    for (int j : candidates) {
      const double dx = p.x - gt.points[static_cast<std::size_t>(j)].x;
      const double dy = p.y - gt.points[static_cast<std::size_t>(j)].y;
      const double dist_sq = dx * dx + dy * dy;
      if (dist_sq <= radius_sq) edges.push_back(Edge{std::sqrt(dist_sq), i, j});
    }
  }
  return edges;
}

void match_greedy(const std::vector<Edge>& edges, std::vector<int>& pred_to_gt,
                  std::vector<int>& gt_to_pred) {
  std::vector<Edge> sorted = edges;
  std::sort(sorted.begin(), sorted.end(), [](const Edge& a, const Edge& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    if (a.pred != b.pred) return a.pred < b.pred;
    return a.gt < b.gt;
  });
  for (const Edge& e : sorted) {
    if (pred_to_gt[static_cast<std::size_t>(e.pred)] >= 0 ||
        gt_to_pred[static_cast<std::size_t>(e.gt)] >= 0)
      continue;
    pred_to_gt[static_cast<std::size_t>(e.pred)] = e.gt;
    gt_to_pred[static_cast<std::size_t>(e.gt)] = e.pred;
  }
}

// Maximum-cardinality, then minimum-total-distance matching. Solved as a
// square assignment over [real preds + gt dummies] x [real gts + pred
// dummies]: leaving a point unmatched costs U, an inadmissible pair costs
// well above 2U so it is never taken. U exceeds any total real distance, so
// cardinality dominates. Exact distance ties are broken toward smaller
// (pred, gt) index pairs by a perturbation far below any distance scale.
void match_optimal(const std::vector<Edge>& edges, int pred_count, int gt_count,
                   std::vector<int>& pred_to_gt, std::vector<int>& gt_to_pred) {
  if (edges.empty()) return;

  // connected components of the admissibility graph keep the matrices small
  std::vector<int> parent(static_cast<std::size_t>(pred_count + gt_count));
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
  std::function<int(int)> find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  for (const Edge& e : edges) {
    const int a = find(e.pred);
    const int b = find(pred_count + e.gt);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }

  std::unordered_map<int, std::vector<const Edge*>> component_edges;
  for (const Edge& e : edges) component_edges[find(e.pred)].push_back(&e);

  // deterministic component order
  std::vector<int> roots;
  roots.reserve(component_edges.size());
  for (const auto& [root, _] : component_edges) roots.push_back(root);
  std::sort(roots.begin(), roots.end());

  for (const int root : roots) {
    const auto& comp = component_edges[root];

    std::vector<int> preds, gts;
    for (const Edge* e : comp) {
      preds.push_back(e->pred);
      gts.push_back(e->gt);
    }
    std::sort(preds.begin(), preds.end());
    preds.erase(std::unique(preds.begin(), preds.end()), preds.end());
    std::sort(gts.begin(), gts.end());
    gts.erase(std::unique(gts.begin(), gts.end()), gts.end());

    const int np = static_cast<int>(preds.size());
    const int ng = static_cast<int>(gts.size());
    const int n = np + ng;

    double max_distance = 0.0;
    for (const Edge* e : comp) max_distance = std::max(max_distance, e->distance);
    const double unmatched = max_distance > 0.0 ? (n + 1) * max_distance : 1.0;
    const double forbidden = 8.0 * unmatched;
    const double tie_eps = unmatched * 0x1.0p-45;

    std::vector<std::vector<double>> cost(
        static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int i = 0; i < np; ++i)
      for (int j = 0; j < ng; ++j) cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = forbidden;
    for (int i = 0; i < np; ++i)
      for (int j = ng; j < n; ++j) cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = unmatched;
    for (int i = np; i < n; ++i)
      for (int j = 0; j < ng; ++j) cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = unmatched;

    for (const Edge* e : comp) {
      const int i = static_cast<int>(std::lower_bound(preds.begin(), preds.end(), e->pred) -
                                     preds.begin());
      const int j =
          static_cast<int>(std::lower_bound(gts.begin(), gts.end(), e->gt) - gts.begin());
      cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          e->distance + tie_eps * (static_cast<double>(i) * ng + j + 1.0);
    }

    const std::vector<int> col_of_row = min_cost_assignment(cost);
    for (int i = 0; i < np; ++i) {
      const int j = col_of_row[static_cast<std::size_t>(i)];
      if (j < 0 || j >= ng) continue;  // matched to a dummy column
      const int pred_local = preds[static_cast<std::size_t>(i)];
      const int gt_local = gts[static_cast<std::size_t>(j)];
      pred_to_gt[static_cast<std::size_t>(pred_local)] = gt_local;
      gt_to_pred[static_cast<std::size_t>(gt_local)] = pred_local;
    }
  }
}

}  // namespace

const char* match_strategy_name(MatchStrategy strategy) {
  return strategy == MatchStrategy::optimal ? "optimal" : "greedy";
}

std::vector<MatchResult> match_nuclei(const NucleiSet& pred, const NucleiSet& gt,
                                      const Taxonomy& taxonomy, double radius,
                                      MatchStrategy strategy) {
  if (!(radius > 0.0))
    fail(errc::non_positive_radius, "matching radius must be > 0 (got " +
                                        std::to_string(radius) + ")");

  const int num_classes = taxonomy.num_classes();
  std::vector<ClassPoints> pred_by_class(static_cast<std::size_t>(num_classes));
  std::vector<ClassPoints> gt_by_class(static_cast<std::size_t>(num_classes));

  auto bucket = [&](const NucleiSet& set, std::vector<ClassPoints>& buckets, const char* side) {
    for (std::size_t i = 0; i < set.nuclei.size(); ++i) {
      const Nucleus& nucleus = set.nuclei[i];
      if (!taxonomy.valid_index(nucleus.class_index))
        fail(errc::index_out_of_range,
             std::string(side) + " nucleus " + std::to_string(i) + " has class " +
                 std::to_string(nucleus.class_index) + " outside taxonomy '" + taxonomy.name() +
                 "'");
      ClassPoints& b = buckets[static_cast<std::size_t>(nucleus.class_index) - 1];
      b.ordinals.push_back(static_cast<int>(i));
      b.points.push_back(nucleus.centroid);
    }
  };
  bucket(pred, pred_by_class, "pred");
  bucket(gt, gt_by_class, "gt");

  std::vector<MatchResult> results;
  results.reserve(static_cast<std::size_t>(num_classes));

  for (int c = 1; c <= num_classes; ++c) {
    const ClassPoints& cp = pred_by_class[static_cast<std::size_t>(c) - 1];
    const ClassPoints& cg = gt_by_class[static_cast<std::size_t>(c) - 1];

    MatchResult result;
    result.class_index = c;

    std::vector<int> pred_to_gt(cp.points.size(), -1);
    std::vector<int> gt_to_pred(cg.points.size(), -1);
    const std::vector<Edge> edges = admissible_edges(cp, cg, radius);

    if (strategy == MatchStrategy::greedy) {
      match_greedy(edges, pred_to_gt, gt_to_pred);
    } else {
      match_optimal(edges, static_cast<int>(cp.points.size()),
                    static_cast<int>(cg.points.size()), pred_to_gt, gt_to_pred);
    }

    for (std::size_t i = 0; i < pred_to_gt.size(); ++i) {
      const int j = pred_to_gt[i];
      if (j < 0) {
        result.unmatched_pred.push_back(cp.ordinals[i]);
        continue;
      }
      const double dx = cp.points[i].x - cg.points[static_cast<std::size_t>(j)].x;
      const double dy = cp.points[i].y - cg.points[static_cast<std::size_t>(j)].y;
      result.pairs.push_back(MatchedPair{cp.ordinals[i], cg.ordinals[static_cast<std::size_t>(j)],
                                         std::sqrt(dx * dx + dy * dy)});
    }
    for (std::size_t j = 0; j < gt_to_pred.size(); ++j)
      if (gt_to_pred[j] < 0) result.unmatched_gt.push_back(cg.ordinals[j]);

    std::sort(result.pairs.begin(), result.pairs.end(), [](const MatchedPair& a, const MatchedPair& b) {
      if (a.pred_ordinal != b.pred_ordinal) return a.pred_ordinal < b.pred_ordinal;
      return a.gt_ordinal < b.gt_ordinal;
    });
    results.push_back(std::move(result));
  }
  return results;
}

DetectionCounts pool_matches(const std::vector<MatchResult>& matches, const Taxonomy& taxonomy) {
  DetectionCounts out;
  out.per_class.assign(static_cast<std::size_t>(taxonomy.num_classes()), ClassDetectionCounts{});
  for (const MatchResult& m : matches) {
    if (!taxonomy.valid_index(m.class_index))
      fail(errc::taxonomy_mismatch, "match result for class " + std::to_string(m.class_index) +
                                        " outside taxonomy '" + taxonomy.name() + "'");
    ClassDetectionCounts& c = out.per_class[static_cast<std::size_t>(m.class_index) - 1];
    c.tp += m.pairs.size();
    c.fp += m.unmatched_pred.size();
    c.fn += m.unmatched_gt.size();
  }
  return out;
}

DetectionSummary detection_f1(const DetectionCounts& counts) {
  DetectionSummary out;
  out.per_class.reserve(counts.per_class.size());
  double f1_sum = 0.0;
  for (const ClassDetectionCounts& c : counts.per_class) {
    ClassDetectionScores scores;
    scores.counts = c;
    const double tp = static_cast<double>(c.tp);
    scores.precision = (c.tp + c.fp) > 0 ? tp / static_cast<double>(c.tp + c.fp) : 0.0;
    scores.recall = (c.tp + c.fn) > 0 ? tp / static_cast<double>(c.tp + c.fn) : 0.0;
    const std::uint64_t denom = 2 * c.tp + c.fp + c.fn;
    scores.f1 = denom > 0 ? 2.0 * tp / static_cast<double>(denom) : 0.0;
    f1_sum += scores.f1;
    out.per_class.push_back(scores);
  }
  out.macro_f1 =
      counts.per_class.empty() ? 0.0 : f1_sum / static_cast<double>(counts.per_class.size());
  return out;
}

DetectionSummary detection_f1(const std::vector<MatchResult>& matches, const Taxonomy& taxonomy) {
  return detection_f1(pool_matches(matches, taxonomy));
}

}  // namespace puma
