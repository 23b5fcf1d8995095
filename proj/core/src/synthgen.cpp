#include "puma/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "puma/error.hpp"
#include "puma/rng.hpp"

namespace puma {

namespace {

constexpr double kSquareHalf = 2.0;  // nuclei are 4x4-pixel squares

struct GridLayout {
  int cell = 0;
  int margin = 0;
  std::vector<Point> candidates;  // shuffled placement slots
};

// Candidate centers on a grid whose spacing keeps every pair of nuclei more
// than two radii apart and whose margin keeps jittered squares inside the
// canvas.
GridLayout nuclei_grid(const SynthSpec& spec, SplitMix64& rng) {
  GridLayout grid;
  grid.cell = std::max(2 * static_cast<int>(std::ceil(spec.matching_radius)) + 2, 8);
  grid.margin = static_cast<int>(std::ceil(0.9 * spec.matching_radius)) + 4;

  for (int y = grid.margin; y + grid.margin <= spec.height; y += grid.cell)
    for (int x = grid.margin; x + grid.margin <= spec.width; x += grid.cell)
      grid.candidates.push_back(Point{static_cast<double>(x), static_cast<double>(y)});
  fisher_yates_shuffle(grid.candidates, rng);
  return grid;
}

// Jitter magnitude cap that preserves the exact-matching construction:
// a jittered prediction stays within the radius of its own nucleus (with
// room for the half-pixel centroid quantization of squares), stays farther
// than the radius from every other nucleus, and jittered squares can never
// touch.
double jitter_cap(double radius, int cell) {
  return std::max(0.0, std::min({0.9 * radius, radius - 0.8, (cell - 5.0) / 2.0}));
}

Annotation square_annotation(Point center, int class_index) {
  Annotation annotation;
  annotation.layer = AnnotationLayer::nuclei;
  annotation.class_index = class_index;
  annotation.rings.push_back(Ring{Point{center.x - kSquareHalf, center.y - kSquareHalf},
                                  Point{center.x + kSquareHalf, center.y - kSquareHalf},
                                  Point{center.x + kSquareHalf, center.y + kSquareHalf},
                                  Point{center.x - kSquareHalf, center.y + kSquareHalf}});
  return annotation;
}

Annotation point_annotation(Point center, int class_index) {
  Annotation annotation;
  annotation.layer = AnnotationLayer::nuclei;
  annotation.class_index = class_index;
  annotation.point = center;
  return annotation;
}

Annotation rect_annotation(double x, double y, double w, double h, int class_index) {
  Annotation annotation;
  annotation.layer = AnnotationLayer::tissue;
  annotation.class_index = class_index;
  annotation.rings.push_back(
      Ring{Point{x, y}, Point{x + w, y}, Point{x + w, y + h}, Point{x, y + h}});
  return annotation;
}

}  // namespace

SynthCase generate_case(const SynthSpec& spec, const Taxonomy& nuclei_tax,
                        const Taxonomy& tissue_tax, const std::string& case_id) {
  if (spec.width <= 0 || spec.height <= 0)
    fail(errc::canvas_too_small, "canvas dimensions must be positive");
  if (!(spec.matching_radius > 0.0))
    fail(errc::non_positive_radius, "matching radius must be > 0");
  if (spec.perturb.drop_count < 0 || spec.perturb.spurious_count < 0 ||
      spec.perturb.jitter_sigma < 0.0 || spec.perturb.tissue_erosion < 0)
    fail(errc::invalid_config, "perturbation values must be non-negative");
  if (static_cast<int>(spec.nuclei_per_class.size()) > nuclei_tax.num_classes() ||
      static_cast<int>(spec.tissue_regions_per_class.size()) > tissue_tax.num_classes())
    fail(errc::taxonomy_mismatch, "per-class counts exceed the taxonomy size");

  SynthCase out;
  out.case_id = case_id;
  for (AnnotationSet* set : {&out.gt_nuclei, &out.gt_tissue, &out.pred_nuclei, &out.pred_tissue}) {
    set->case_id = case_id;
    set->width = spec.width;
    set->height = spec.height;
  }
  out.expected.radius = spec.matching_radius;
  out.expected.detection.per_class.assign(
      static_cast<std::size_t>(nuclei_tax.num_classes()), ClassDetectionCounts{});
  out.expected.dice.assign(static_cast<std::size_t>(tissue_tax.num_classes()), std::nullopt);

  SplitMix64 rng(spec.seed);

  // --- nuclei ---
  int total_nuclei = 0;
  for (int count : spec.nuclei_per_class) {
    if (count < 0) fail(errc::invalid_config, "nuclei counts must be non-negative");
    total_nuclei += count;
  }
  if (spec.perturb.drop_count > total_nuclei)
    fail(errc::invalid_config, "cannot drop more nuclei than exist");

  GridLayout grid = nuclei_grid(spec, rng);
  const int slots_needed = total_nuclei + spec.perturb.spurious_count;
  if (static_cast<int>(grid.candidates.size()) < slots_needed)
    fail(errc::canvas_too_small,
         "canvas " + std::to_string(spec.width) + "x" + std::to_string(spec.height) + " offers " +
             std::to_string(grid.candidates.size()) + " separated slots, need " +
             std::to_string(slots_needed));

  struct PlacedNucleus {
    Point center;
    int class_index;
  };
  std::vector<PlacedNucleus> gt;
  gt.reserve(static_cast<std::size_t>(total_nuclei));
  {
    std::size_t slot = 0;
    for (std::size_t c = 0; c < spec.nuclei_per_class.size(); ++c)
      for (int i = 0; i < spec.nuclei_per_class[c]; ++i)
        gt.push_back(PlacedNucleus{grid.candidates[slot++], static_cast<int>(c) + 1});
  }

  for (const PlacedNucleus& nucleus : gt)
    out.gt_nuclei.annotations.push_back(square_annotation(nucleus.center, nucleus.class_index));

  // choose dropped nuclei
  std::vector<int> order(gt.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  fisher_yates_shuffle(order, rng);
  std::vector<char> dropped(gt.size(), 0);
  for (int i = 0; i < spec.perturb.drop_count; ++i)
    dropped[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 1;

  const double cap = jitter_cap(spec.matching_radius, grid.cell);
  std::size_t pred_ordinal = 0;
  auto emit_pred = [&](Point center, int class_index) {
    // alternate square and point features so both geometries are exercised
    if (pred_ordinal % 2 == 0) {
      out.pred_nuclei.annotations.push_back(square_annotation(center, class_index));
    } else {
      out.pred_nuclei.annotations.push_back(point_annotation(center, class_index));
    }
    ++pred_ordinal;
  };

  for (std::size_t i = 0; i < gt.size(); ++i) {
    const std::size_t c = static_cast<std::size_t>(gt[i].class_index) - 1;
    if (dropped[i]) {
      ++out.expected.detection.per_class[c].fn;
      continue;
    }
    double dx = rng.gaussian() * spec.perturb.jitter_sigma;
    double dy = rng.gaussian() * spec.perturb.jitter_sigma;
    const double norm = std::sqrt(dx * dx + dy * dy);
    if (norm > cap && norm > 0.0) {
      dx *= cap / norm;
      dy *= cap / norm;
    }
    emit_pred(Point{gt[i].center.x + dx, gt[i].center.y + dy}, gt[i].class_index);
    ++out.expected.detection.per_class[c].tp;
  }

  for (int s = 0; s < spec.perturb.spurious_count; ++s) {
    const Point center = grid.candidates[static_cast<std::size_t>(total_nuclei + s)];
    const int class_index =
        1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(nuclei_tax.num_classes())));
    emit_pred(center, class_index);
    ++out.expected.detection.per_class[static_cast<std::size_t>(class_index) - 1].fp;
  }

  // --- tissue ---
  constexpr int kRectW = 48;
  constexpr int kRectH = 32;
  constexpr int kTissueMargin = 4;
  int total_regions = 0;
  for (int count : spec.tissue_regions_per_class) {
    if (count < 0) fail(errc::invalid_config, "tissue region counts must be non-negative");
    total_regions += count;
  }

  std::vector<Point> tissue_slots;
  for (int y = kTissueMargin; y + kRectH + kTissueMargin <= spec.height; y += kRectH + 8)
    for (int x = kTissueMargin; x + kRectW + kTissueMargin <= spec.width; x += kRectW + 8)
      tissue_slots.push_back(Point{static_cast<double>(x), static_cast<double>(y)});
  fisher_yates_shuffle(tissue_slots, rng);
  if (static_cast<int>(tissue_slots.size()) < total_regions)
    fail(errc::canvas_too_small, "canvas offers " + std::to_string(tissue_slots.size()) +
                                     " tissue slots, need " + std::to_string(total_regions));

  const int e = spec.perturb.tissue_erosion;
  std::size_t slot = 0;
  for (std::size_t c = 0; c < spec.tissue_regions_per_class.size(); ++c) {
    const int regions = spec.tissue_regions_per_class[c];
    if (regions == 0) continue;
    const int class_index = static_cast<int>(c) + 1;

    std::uint64_t gt_area = 0;
    std::uint64_t pred_area = 0;
    for (int r = 0; r < regions; ++r) {
      const Point& origin = tissue_slots[slot++];
      out.gt_tissue.annotations.push_back(
          rect_annotation(origin.x, origin.y, kRectW, kRectH, class_index));
      gt_area += static_cast<std::uint64_t>(kRectW) * kRectH;

      const int pw = kRectW - 2 * e;
      const int ph = kRectH - 2 * e;
      if (pw > 0 && ph > 0) {
        out.pred_tissue.annotations.push_back(
            rect_annotation(origin.x + e, origin.y + e, pw, ph, class_index));
        pred_area += static_cast<std::uint64_t>(pw) * ph;
      }
    }
    // predicted rectangles sit inside the originals, so intersection == pred
    out.expected.dice[c] = 2.0 * static_cast<double>(pred_area) /
                           static_cast<double>(gt_area + pred_area);
  }

  return out;
}

void write_case(const SynthCase& synth, const Taxonomy& nuclei_tax, const Taxonomy& tissue_tax,
                const std::filesystem::path& gt_dir, const std::filesystem::path& pred_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(gt_dir, ec);
  fs::create_directories(pred_dir, ec);

  auto write = [](const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(errc::io_error, "cannot open " + path.string() + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
  };

  write(gt_dir / (synth.case_id + ".nuclei.json"),
        write_annotation_file(synth.gt_nuclei, nuclei_tax));
  write(gt_dir / (synth.case_id + ".tissue.json"),
        write_annotation_file(synth.gt_tissue, tissue_tax));
  write(pred_dir / (synth.case_id + ".nuclei.json"),
        write_annotation_file(synth.pred_nuclei, nuclei_tax));
  write(pred_dir / (synth.case_id + ".tissue.json"),
        write_annotation_file(synth.pred_tissue, tissue_tax));
}

}  // namespace puma
