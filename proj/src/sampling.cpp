// Copyright 2026 The deskaid Authors.
// SPDX-License-Identifier: Apache-2.0

#include "deskaid/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "deskaid/common.hpp"

namespace deskaid {

namespace fs = std::filesystem;

namespace {

constexpr int kMaxTrialsPerPoint = 1000;
constexpr std::size_t kAcceptanceWindow = 100'000;
constexpr double kMinAcceptanceRate = 1e-4;

// Stream tags so independent draws never share an RNG sequence.
constexpr std::uint64_t kRandomStream = 0x52414E44ULL;
constexpr std::uint64_t kDeficitStream = 0x44454649ULL;
constexpr std::uint64_t kSubsetStream = 0x53554253ULL;
constexpr std::uint64_t kShuffleStream = 0x53485546ULL;
constexpr std::uint64_t kSplitStream = 0x53504C54ULL;

template <typename T>
void Shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[UniformIndex(rng, i)]);
  }
}

// First `count` elements of a seeded shuffle.
std::vector<SamplePoint> RandomSubset(std::vector<SamplePoint> pool, std::size_t count,
                                      Rng& rng) {
  for (std::size_t i = 0; i < count; ++i) {
    std::swap(pool[i], pool[i + UniformIndex(rng, pool.size() - i)]);
  }
  pool.resize(count);
  return pool;
}

void Recount(SampleSet& set) {
  set.strategy_mix.clear();
  for (const auto& p : set.points) ++set.strategy_mix[p.strategy];
}

struct LocalBox {
  double xmin, xmax, ymin, ymax;
};

LocalBox ProjectedBounds(const PolygonFeature& poly, const LocalFrame& frame) {
  LocalBox b{1e300, -1e300, 1e300, -1e300};
  for (const auto& p : poly.exterior) {
    const Eigen::Vector2d xy = frame.Project(p);
    b.xmin = std::min(b.xmin, xy.x());
    b.xmax = std::max(b.xmax, xy.x());
    b.ymin = std::min(b.ymin, xy.y());
    b.ymax = std::max(b.ymax, xy.y());
  }
  return b;
}

}  // namespace

std::string_view StrategyName(Strategy s) {
  switch (s) {
    case Strategy::kPositive: return "positive";
    case Strategy::kRandom: return "random";
    case Strategy::kHn50: return "hn50";
    case Strategy::kHn500: return "hn500";
    case Strategy::kHn5000: return "hn5000";
    case Strategy::kHnCustom: return "hn_custom";
    case Strategy::kGrid: return "grid";
  }
  return "?";
}

Strategy ParseStrategy(std::string_view name) {
  for (Strategy s : {Strategy::kPositive, Strategy::kRandom, Strategy::kHn50,
                     Strategy::kHn500, Strategy::kHn5000, Strategy::kHnCustom,
                     Strategy::kGrid}) {
    if (StrategyName(s) == name) return s;
  }
  throw Error(ErrorCode::kParse, "unknown strategy '" + std::string(name) + "'");
}

Strategy StrategyForBuffer(double buffer_m) {
  if (buffer_m == 50.0) return Strategy::kHn50;
  if (buffer_m == 500.0) return Strategy::kHn500;
  if (buffer_m == 5000.0) return Strategy::kHn5000;
  return Strategy::kHnCustom;
}

SampleId StrategyIdBase(Strategy s) {
  return static_cast<SampleId>(s) * 1'000'000'000LL;
}

std::size_t SampleSet::CountLabel(Label label) const {
  return static_cast<std::size_t>(std::count_if(
      points.begin(), points.end(), [&](const SamplePoint& p) { return p.label == label; }));
}

std::vector<SamplePoint> SamplePositives(const std::vector<PolygonFeature>& hazards,
                                         std::uint64_t seed, int per_polygon) {
  if (hazards.empty()) throw Error(ErrorCode::kEmptyLayer, "no hazard polygons");
  if (per_polygon < 1) {
    throw Error(ErrorCode::kInvalidArgument, "per_polygon must be at least 1");
  }
  const std::size_t per = static_cast<std::size_t>(per_polygon);
  std::vector<SamplePoint> out(hazards.size() * per);
  ParallelFor(hazards.size(), [&](std::size_t i) {
    const PolygonFeature& poly = hazards[i];
    const LocalFrame frame = FrameFor(poly);
    const LocalBox box = ProjectedBounds(poly, frame);
    Rng rng = MakeRng(seed, i);
    for (std::size_t j = 0; j < per; ++j) {
      std::optional<GeoPoint> hit;
      for (int t = 0; t < kMaxTrialsPerPoint && !hit; ++t) {
        const Eigen::Vector2d xy(UniformIn(rng, box.xmin, box.xmax),
                                 UniformIn(rng, box.ymin, box.ymax));
        const GeoPoint g = frame.Unproject(xy);
        if (PointInPolygon(g, poly)) hit = g;
      }
      if (!hit) {
        GeoPoint fallback = PolygonCentroid(poly);
        if (!PointInPolygon(fallback, poly)) fallback = poly.exterior.front();
        Log(LogLevel::kWarning, "hazard polygon " + std::to_string(i) +
                                    ": rejection sampling exhausted, using centroid fallback");
        hit = fallback;
      }
      SamplePoint& sp = out[i * per + j];
      sp.id = StrategyIdBase(Strategy::kPositive) + static_cast<SampleId>(i * per + j);
      sp.location = *hit;
      sp.label = Label::kHazard;
      sp.strategy = Strategy::kPositive;
      sp.source_polygon_id = static_cast<std::int64_t>(i);
    }
  });
  return out;
}

std::vector<SamplePoint> SampleRandomNegatives(const PolygonFeature& border,
                                               const std::vector<PolygonFeature>& hazards,
                                               std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "n must be at least 1");
  if (PlanarArea(border) < 1e-9) {
    throw Error(ErrorCode::kDegenerateGeometry, "border polygon has no area");
  }
  const PolygonSet hazard_set(hazards);
  const BoundingBox box = BoundsOf(border);
  constexpr double kRad = 3.14159265358979323846 / 180.0;
  // Uniform in sin(lat) gives area-uniform points on the sphere.
  const double z0 = std::sin(box.min_lat * kRad);
  const double z1 = std::sin(box.max_lat * kRad);
  Rng rng = MakeRng(seed, kRandomStream);

  std::vector<SamplePoint> out;
  out.reserve(n);
  std::size_t window_trials = 0, window_accepts = 0;
  while (out.size() < n) {
    const GeoPoint p{UniformIn(rng, box.min_lon, box.max_lon),
                     std::asin(UniformIn(rng, z0, z1)) / kRad};
    ++window_trials;
    if (PointInPolygon(p, border) && !hazard_set.ContainsAny(p)) {
      ++window_accepts;
      SamplePoint sp;
      sp.id = StrategyIdBase(Strategy::kRandom) + static_cast<SampleId>(out.size());
      sp.location = p;
      sp.label = Label::kClear;
      sp.strategy = Strategy::kRandom;
      out.push_back(sp);
    }
    if (window_trials == kAcceptanceWindow) {
      if (static_cast<double>(window_accepts) / window_trials < kMinAcceptanceRate) {
        throw Error(ErrorCode::kSamplingExhausted,
                    "random negatives: acceptance rate below 1e-4 (hazards cover the border)");
      }
      window_trials = window_accepts = 0;
    }
  }
  return out;
}

std::vector<SamplePoint> SampleHardNegatives(const std::vector<PolygonFeature>& hazards,
                                             double buffer_m, int per_polygon,
                                             std::uint64_t seed) {
  if (hazards.empty()) throw Error(ErrorCode::kEmptyLayer, "no hazard polygons");
  if (!(buffer_m > 0)) throw Error(ErrorCode::kInvalidArgument, "buffer must be positive");
  if (per_polygon < 1) {
    throw Error(ErrorCode::kInvalidArgument, "per_polygon must be at least 1");
  }
  const std::size_t per = static_cast<std::size_t>(per_polygon);
  const Strategy tag = StrategyForBuffer(buffer_m);
  const double spacing = std::max(buffer_m, 100.0);
  const PolygonSet hazard_set(hazards);

  std::vector<std::vector<GeoPoint>> chosen(hazards.size());
  std::vector<std::vector<GeoPoint>> leftover(hazards.size());
  ParallelFor(hazards.size(), [&](std::size_t i) {
    std::vector<GeoPoint> candidates;
    for (const GeoPoint& g : BufferChainagePoints(hazards[i], buffer_m, spacing)) {
      if (!hazard_set.ContainsAny(g)) candidates.push_back(g);
    }
    Rng rng = MakeRng(seed, i);
    Shuffle(candidates, rng);
    const std::size_t take = std::min(per, candidates.size());
    chosen[i].assign(candidates.begin(), candidates.begin() + take);
    leftover[i].assign(candidates.begin() + take, candidates.end());
  });

  std::vector<SamplePoint> out;
  out.reserve(hazards.size() * per);
  auto emit = [&](const GeoPoint& g, std::size_t polygon) {
    SamplePoint sp;
    sp.id = StrategyIdBase(tag) + static_cast<SampleId>(out.size());
    sp.location = g;
    sp.label = Label::kClear;
    sp.strategy = tag;
    sp.source_polygon_id = static_cast<std::int64_t>(polygon);
    out.push_back(sp);
  };
  std::size_t deficit = 0;
  for (std::size_t i = 0; i < hazards.size(); ++i) {
    for (const auto& g : chosen[i]) emit(g, i);
    deficit += per - chosen[i].size();
  }
  if (deficit > 0) {
    std::vector<std::pair<std::size_t, GeoPoint>> pool;
    for (std::size_t i = 0; i < hazards.size(); ++i) {
      for (const auto& g : leftover[i]) pool.emplace_back(i, g);
    }
    if (pool.size() < deficit) {
      throw Error(ErrorCode::kSamplingExhausted,
                  "hard negatives at " + FormatDouble(buffer_m) + " m: need " +
                      std::to_string(deficit) + " more candidates, pool has " +
                      std::to_string(pool.size()));
    }
    Rng rng = MakeRng(seed, kDeficitStream);
    for (std::size_t d = 0; d < deficit; ++d) {
      std::swap(pool[d], pool[d + UniformIndex(rng, pool.size() - d)]);
      emit(pool[d].second, pool[d].first);
    }
  }
  return out;
}

std::string_view MixName(Mix m) {
  switch (m) {
    case Mix::kRandom: return "random";
    case Mix::kHn50: return "hn50";
    case Mix::kHn500: return "hn500";
    case Mix::kHn5000: return "hn5000";
    case Mix::kHybrid: return "hybrid";
  }
  return "?";
}

Mix ParseMix(std::string_view name) {
  for (Mix m : {Mix::kRandom, Mix::kHn50, Mix::kHn500, Mix::kHn5000, Mix::kHybrid}) {
    if (MixName(m) == name) return m;
  }
  throw Error(ErrorCode::kConfig, "unknown sampling mix '" + std::string(name) + "'");
}

SampleSet AssembleTrainingSet(const std::vector<SamplePoint>& positives,
                              const NegativePools& negatives, Mix mix,
                              std::uint64_t seed, const HybridWeights& weights) {
  for (const auto& p : positives) {
    if (p.label != Label::kHazard) {
      throw Error(ErrorCode::kInvalidArgument, "positive list contains a clear point");
    }
  }
  const std::size_t n = positives.size();
  std::vector<std::pair<Strategy, std::size_t>> quota;
  switch (mix) {
    case Mix::kRandom: quota = {{Strategy::kRandom, n}}; break;
    case Mix::kHn50: quota = {{Strategy::kHn50, n}}; break;
    case Mix::kHn500: quota = {{Strategy::kHn500, n}}; break;
    case Mix::kHn5000: quota = {{Strategy::kHn5000, n}}; break;
    case Mix::kHybrid: {
      const std::array<Strategy, 4> order = {Strategy::kHn50, Strategy::kHn500,
                                             Strategy::kHn5000, Strategy::kRandom};
      double total = 0;
      for (double w : weights) {
        if (!(w >= 0)) throw Error(ErrorCode::kConfig, "hybrid weights must be non-negative");
        total += w;
      }
      if (!(total > 0)) throw Error(ErrorCode::kConfig, "hybrid weights sum to zero");
      // Largest remainder; ties go to the earlier strategy.
      std::array<std::size_t, 4> counts{};
      std::array<double, 4> remainders{};
      std::size_t assigned = 0;
      for (int k = 0; k < 4; ++k) {
        const double exact = static_cast<double>(n) * weights[k] / total;
        counts[k] = static_cast<std::size_t>(std::floor(exact));
        remainders[k] = exact - static_cast<double>(counts[k]);
        assigned += counts[k];
      }
      std::array<int, 4> rank = {0, 1, 2, 3};
      std::stable_sort(rank.begin(), rank.end(),
                       [&](int a, int b) { return remainders[a] > remainders[b]; });
      for (std::size_t r = 0; assigned < n; ++r, ++assigned) ++counts[rank[r % 4]];
      for (int k = 0; k < 4; ++k) quota.emplace_back(order[k], counts[k]);
      break;
    }
  }

  SampleSet set;
  set.seed = seed;
  set.points = positives;
  for (const auto& [strategy, count] : quota) {
    if (count == 0) continue;
    auto it = negatives.find(strategy);
    if (it == negatives.end() || it->second.size() < count) {
      throw Error(ErrorCode::kInsufficientNegatives,
                  std::string(StrategyName(strategy)) + ": need " + std::to_string(count) +
                      ", have " +
                      std::to_string(it == negatives.end() ? 0 : it->second.size()));
    }
    Rng rng = MakeRng(seed, kSubsetStream + static_cast<std::uint64_t>(strategy));
    for (auto& p : RandomSubset(it->second, count, rng)) set.points.push_back(std::move(p));
  }
  Rng rng = MakeRng(seed, kShuffleStream);
  Shuffle(set.points, rng);
  Recount(set);
  return set;
}

SampleSet AssembleEvaluationSet(const std::vector<SamplePoint>& positives,
                                const std::vector<SamplePoint>& pool,
                                const std::set<SampleId>& exclude, std::uint64_t seed) {
  std::vector<SamplePoint> available;
  for (const auto& p : pool) {
    if (!exclude.count(p.id)) available.push_back(p);
  }
  if (available.size() < positives.size()) {
    throw Error(ErrorCode::kInsufficientNegatives,
                std::string(pool.empty() ? "pool" : StrategyName(pool.front().strategy)) +
                    ": need " + std::to_string(positives.size()) + ", have " +
                    std::to_string(available.size()));
  }
  SampleSet set;
  set.seed = seed;
  set.points = positives;
  Rng rng = MakeRng(seed, kSubsetStream);
  for (auto& p : RandomSubset(std::move(available), positives.size(), rng)) {
    set.points.push_back(std::move(p));
  }
  Rng shuffle = MakeRng(seed, kShuffleStream);
  Shuffle(set.points, shuffle);
  Recount(set);
  return set;
}

std::pair<SampleSet, SampleSet> SplitTrainTest(const SampleSet& set, double test_fraction,
                                               std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "test_fraction must lie in (0, 1)");
  }
  std::vector<bool> is_test(set.points.size(), false);
  for (Label label : {Label::kClear, Label::kHazard}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < set.points.size(); ++i) {
      if (set.points[i].label == label) members.push_back(i);
    }
    // Order by id first so the partition depends on membership, not order.
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      return set.points[a].id < set.points[b].id;
    });
    Rng rng = MakeRng(seed, kSplitStream + static_cast<std::uint64_t>(label));
    Shuffle(members, rng);
    const auto n_test = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(members.size())));
    for (std::size_t k = 0; k < n_test; ++k) is_test[members[k]] = true;
  }
  SampleSet train, test;
  train.seed = test.seed = set.seed;
  for (std::size_t i = 0; i < set.points.size(); ++i) {
    (is_test[i] ? test : train).points.push_back(set.points[i]);
  }
  Recount(train);
  Recount(test);
  return {std::move(train), std::move(test)};
}

std::pair<SampleSet, SampleSet> SplitByRegion(const SampleSet& set,
                                              const PolygonFeature& region) {
  SampleSet outside, inside;
  outside.seed = inside.seed = set.seed;
  for (const auto& p : set.points) {
    (PointInPolygon(p.location, region) ? inside : outside).points.push_back(p);
  }
  Recount(outside);
  Recount(inside);
  return {std::move(outside), std::move(inside)};
}

std::vector<SamplePoint> SampleEvaluationGrid(const PolygonFeature& region,
                                              double spacing_m,
                                              const std::vector<PolygonFeature>& hazards) {
  if (!(spacing_m > 0)) throw Error(ErrorCode::kInvalidArgument, "grid spacing must be positive");
  if (PlanarArea(region) < 1e-9) {
    throw Error(ErrorCode::kDegenerateGeometry, "evaluation region has no area");
  }
  const PolygonSet hazard_set(hazards);
  const LocalFrame frame = FrameFor(region);
  const LocalBox box = ProjectedBounds(region, frame);
  std::vector<SamplePoint> out;
  for (double y = box.ymin + spacing_m / 2; y <= box.ymax; y += spacing_m) {
    for (double x = box.xmin + spacing_m / 2; x <= box.xmax; x += spacing_m) {
      const GeoPoint g = frame.Unproject({x, y});
      if (!PointInPolygon(g, region)) continue;
      SamplePoint sp;
      sp.id = StrategyIdBase(Strategy::kGrid) + static_cast<SampleId>(out.size());
      sp.location = g;
      const long hit = hazard_set.FirstContaining(g);
      if (hit >= 0) {
        sp.label = Label::kHazard;
        sp.strategy = Strategy::kPositive;
        sp.source_polygon_id = hit;
      } else {
        sp.label = Label::kClear;
        sp.strategy = Strategy::kGrid;
      }
      out.push_back(sp);
    }
  }
  return out;
}

void WriteSampleCsv(const fs::path& path, const SampleSet& set) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << "id,lon,lat,label,strategy,source_polygon_id\n";
  for (const auto& p : set.points) {
    out << p.id << ',' << FormatDouble(p.location.lon) << ','
        << FormatDouble(p.location.lat) << ',' << static_cast<int>(p.label) << ','
        << StrategyName(p.strategy) << ',';
    if (p.source_polygon_id) out << *p.source_polygon_id;
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

SampleSet ReadSampleCsv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  SampleSet set;
  if (!std::getline(in, line) || Trim(line) != "id,lon,lat,label,strategy,source_polygon_id") {
    throw ParseError(path.string() + ": unexpected sample CSV header", 1, 0);
  }
  ++line_no;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() == 5) cells.emplace_back();
    SamplePoint p;
    std::int64_t label = 0;
    if (cells.size() != 6 || !ParseInt64(cells[0], p.id) ||
        !ParseDouble(cells[1], p.location.lon) || !ParseDouble(cells[2], p.location.lat) ||
        !ParseInt64(cells[3], label) || (label != 0 && label != 1)) {
      throw ParseError(path.string() + ": bad sample row", line_no, 0);
    }
    p.label = static_cast<Label>(label);
    p.strategy = ParseStrategy(Trim(cells[4]));
    if (!Trim(cells[5]).empty()) {
      std::int64_t src = 0;
      if (!ParseInt64(cells[5], src)) {
        throw ParseError(path.string() + ": bad source_polygon_id", line_no, 0);
      }
      p.source_polygon_id = src;
    }
    set.points.push_back(p);
  }
  Recount(set);
  return set;
}

}  // namespace deskaid
