#include "pointnp/dataset.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>

#include "pointnp/geometry.hpp"
#include "pointnp/memory.hpp"
#include "pointnp/rng.hpp"

namespace pointnp {

void LabeledDataset::validate() const {
  if (clouds.size() != labels.size())
    throw std::invalid_argument("LabeledDataset: cloud/label count mismatch");
  for (const PointCloud& c : clouds) c.validate();
  for (std::uint32_t l : labels)
    if (l >= class_names.size())
      throw std::invalid_argument("LabeledDataset: label out of range");
}

const char* primitive_name(Primitive p) {
  switch (p) {
    case Primitive::Sphere: return "sphere";
    case Primitive::Cube: return "cube";
    case Primitive::Cylinder: return "cylinder";
    case Primitive::Cone: return "cone";
    case Primitive::Torus: return "torus";
    case Primitive::Plane: return "plane";
  }
  return "?";
}

Primitive primitive_from_name(const std::string& name) {
  for (Primitive p : {Primitive::Sphere, Primitive::Cube, Primitive::Cylinder, Primitive::Cone,
                      Primitive::Torus, Primitive::Plane})
    if (name == primitive_name(p)) return p;
  throw std::invalid_argument("unknown primitive class: " + name);
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Vec3 sample_surface(Primitive shape, Rng& rng) {
  switch (shape) {
    case Primitive::Sphere: {
      // direction by normalized Gaussian triple
      while (true) {
        const Vec3 v{rng.normal(), rng.normal(), rng.normal()};
        const double n = norm(v);
        if (n > 1e-12) return v * (1.0 / n);
      }
    }
    case Primitive::Cube: {
      // equal-area faces; fixed coordinate at +-1
      const std::size_t face = rng.uniform_int(6);
      const double u = rng.uniform(-1.0, 1.0);
      const double v = rng.uniform(-1.0, 1.0);
      const double s = face % 2 == 0 ? 1.0 : -1.0;
      switch (face / 2) {
        case 0: return {s, u, v};
        case 1: return {u, s, v};
        default: return {u, v, s};
      }
    }
    case Primitive::Cylinder: {
      const double r = 0.6, h = 1.0;  // half-height
      const double lateral = kTwoPi * r * 2.0 * h;
      const double caps = 2.0 * std::numbers::pi * r * r;
      if (rng.uniform() * (lateral + caps) < lateral) {
        const double theta = rng.uniform(0.0, kTwoPi);
        return {r * std::cos(theta), r * std::sin(theta), rng.uniform(-h, h)};
      }
      const double z = rng.uniform() < 0.5 ? h : -h;
      const double rr = r * std::sqrt(rng.uniform());
      const double theta = rng.uniform(0.0, kTwoPi);
      return {rr * std::cos(theta), rr * std::sin(theta), z};
    }
    case Primitive::Cone: {
      const double r = 0.8, apex = 1.0, base = -1.0;
      const double slant = std::sqrt(r * r + (apex - base) * (apex - base));
      const double lateral = std::numbers::pi * r * slant;
      const double disc = std::numbers::pi * r * r;
      const double theta = rng.uniform(0.0, kTwoPi);
      if (rng.uniform() * (lateral + disc) < lateral) {
        const double t = std::sqrt(rng.uniform());  // area-uniform along the slant
        const double rr = r * t;
        return {rr * std::cos(theta), rr * std::sin(theta), apex + t * (base - apex)};
      }
      const double rr = r * std::sqrt(rng.uniform());
      return {rr * std::cos(theta), rr * std::sin(theta), base};
    }
    case Primitive::Torus: {
      const double R = 0.85, r = 0.35;
      const double theta = rng.uniform(0.0, kTwoPi);
      // rejection on the tube angle for area-correct sampling
      double phi;
      do {
        phi = rng.uniform(0.0, kTwoPi);
      } while (rng.uniform() * (R + r) > R + r * std::cos(phi));
      const double w = R + r * std::cos(phi);
      return {w * std::cos(theta), w * std::sin(theta), r * std::sin(phi)};
    }
    case Primitive::Plane:
      return {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), 0.0};
  }
  return {0.0, 0.0, 0.0};
}

}  // namespace

LabeledDataset synth_primitives(std::span<const Primitive> classes, std::size_t per_class,
                                std::size_t points, double noise_sigma, std::uint64_t seed) {
  if (classes.empty()) throw std::invalid_argument("synth_primitives: empty class list");
  if (per_class == 0) throw std::invalid_argument("synth_primitives: per_class must be >= 1");
  if (points < 8) throw std::invalid_argument("synth_primitives: need at least 8 points");
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("synth_primitives: negative sigma");

  LabeledDataset ds;
  ds.split = "train";
  for (Primitive p : classes) ds.class_names.push_back(primitive_name(p));
  ds.clouds.resize(classes.size() * per_class);
  ds.labels.resize(classes.size() * per_class);

  const std::int64_t total = static_cast<std::int64_t>(ds.clouds.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t idx = 0; idx < total; ++idx) {
    const std::size_t cls = static_cast<std::size_t>(idx) / per_class;
    const std::size_t sample = static_cast<std::size_t>(idx) % per_class;
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(cls) * 0x10001ULL + sample));

    PointCloud cloud;
    cloud.points.resize(points);
    for (Vec3& pt : cloud.points) pt = sample_surface(classes[cls], rng);
    if (noise_sigma > 0.0)
      for (Vec3& pt : cloud.points)
        for (int a = 0; a < 3; ++a) pt[a] += noise_sigma * rng.normal();

    // random rotation about the up (z) axis
    const double angle = rng.uniform(0.0, kTwoPi);
    const double ca = std::cos(angle), sa = std::sin(angle);
    double max_norm = 0.0;
    for (Vec3& pt : cloud.points) {
      pt = {ca * pt[0] - sa * pt[1], sa * pt[0] + ca * pt[1], pt[2]};
      max_norm = std::max(max_norm, norm(pt));
    }
    if (max_norm > 0.0)
      for (Vec3& pt : cloud.points) pt = pt * (1.0 / max_norm);

    ds.clouds[idx] = std::move(cloud);
    ds.labels[idx] = static_cast<std::uint32_t>(cls);
  }
  return ds;
}

SegDataset synth_part_primitives(std::size_t per_category, std::size_t points,
                                 double noise_sigma, std::uint64_t seed) {
  if (per_category == 0) throw std::invalid_argument("synth_part_primitives: per_category >= 1");
  if (points < 8) throw std::invalid_argument("synth_part_primitives: need at least 8 points");
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("synth_part_primitives: negative sigma");

  SegDataset ds;
  ds.category_names = {"rod", "ball"};
  ds.part_names = {"rod/top", "rod/bottom", "ball/upper", "ball/lower"};

  for (std::size_t cat = 0; cat < 2; ++cat) {
    const Primitive shape = cat == 0 ? Primitive::Cylinder : Primitive::Sphere;
    for (std::size_t sample = 0; sample < per_category; ++sample) {
      Rng rng(derive_seed(seed, 0xA000000ULL + cat * 0x10001ULL + sample));
      PointCloud cloud;
      cloud.points.resize(points);
      std::vector<std::uint32_t> labels(points);
      for (std::size_t i = 0; i < points; ++i) {
        cloud.points[i] = sample_surface(shape, rng);
        // split at the equator before jitter moves anything
        labels[i] = static_cast<std::uint32_t>(2 * cat + (cloud.points[i][2] >= 0.0 ? 0 : 1));
      }
      if (noise_sigma > 0.0)
        for (Vec3& pt : cloud.points)
          for (int a = 0; a < 3; ++a) pt[a] += noise_sigma * rng.normal();
      const double angle = rng.uniform(0.0, kTwoPi);
      const double ca = std::cos(angle), sa = std::sin(angle);
      double max_norm = 0.0;
      for (Vec3& pt : cloud.points) {
        pt = {ca * pt[0] - sa * pt[1], sa * pt[0] + ca * pt[1], pt[2]};
        max_norm = std::max(max_norm, norm(pt));
      }
      if (max_norm > 0.0)
        for (Vec3& pt : cloud.points) pt = pt * (1.0 / max_norm);
      ds.clouds.push_back(std::move(cloud));
      ds.point_labels.push_back(std::move(labels));
      ds.categories.push_back(static_cast<std::uint32_t>(cat));
    }
  }
  return ds;
}

FewShotEpisode sample_episode(const LabeledDataset& dataset, std::size_t n_way,
                              std::size_t k_shot, std::size_t query_per_class,
                              std::uint64_t seed) {
  dataset.validate();
  const std::size_t num_classes = dataset.num_classes();
  if (n_way < 1 || n_way > num_classes)
    throw std::invalid_argument("sample_episode: n_way out of range");
  if (k_shot < 1) throw std::invalid_argument("sample_episode: k_shot must be >= 1");

  Rng rng(derive_seed(seed, 0xE915ULL));

  // class pool, shuffled; take the first n_way
  std::vector<std::uint32_t> class_pool(num_classes);
  std::iota(class_pool.begin(), class_pool.end(), 0u);
  rng.shuffle(class_pool);
  class_pool.resize(n_way);

  std::vector<std::vector<std::size_t>> by_class(num_classes);
  for (std::size_t i = 0; i < dataset.size(); ++i) by_class[dataset.labels[i]].push_back(i);

  FewShotEpisode ep;
  ep.n_way = n_way;
  ep.k_shot = k_shot;
  ep.seed = seed;
  ep.support.class_names = dataset.class_names;
  ep.support.split = "train";
  ep.query.class_names = dataset.class_names;
  ep.query.split = "test";

  for (std::uint32_t cls : class_pool) {
    std::vector<std::size_t>& pool = by_class[cls];
    if (pool.size() < k_shot + query_per_class)
      throw std::invalid_argument("sample_episode: class '" + dataset.class_names[cls] +
                                  "' has too few samples");
    rng.shuffle(pool);
    for (std::size_t j = 0; j < k_shot; ++j) {
      ep.support.clouds.push_back(dataset.clouds[pool[j]]);
      ep.support.labels.push_back(cls);
      ep.support_indices.push_back(pool[j]);
    }
    for (std::size_t j = 0; j < query_per_class; ++j) {
      ep.query.clouds.push_back(dataset.clouds[pool[k_shot + j]]);
      ep.query.labels.push_back(cls);
      ep.query_indices.push_back(pool[k_shot + j]);
    }
  }
  return ep;
}

double accuracy(std::span<const std::uint32_t> pred, std::span<const std::uint32_t> truth) {
  if (pred.size() != truth.size()) throw std::invalid_argument("accuracy: length mismatch");
  if (pred.empty()) throw std::invalid_argument("accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == truth[i];
  return 100.0 * static_cast<double>(hits) / static_cast<double>(pred.size());
}

Matrix encode_dataset(const LabeledDataset& dataset, const EncoderConfig& cfg) {
  dataset.validate();
  cfg.validate();
  Matrix feats(dataset.size(), cfg.global_dim());
  const std::int64_t n = static_cast<std::int64_t>(dataset.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) {
    const PointCloud normalized = normalize_cloud(dataset.clouds[static_cast<std::size_t>(i)]);
    const GlobalFeature g = encode_global(normalized, cfg);
    auto dst = feats.row(static_cast<std::size_t>(i));
    std::copy(g.values.begin(), g.values.end(), dst.begin());
  }
  return feats;
}

EvalReport evaluate_features(const Matrix& train_feats,
                             std::span<const std::uint32_t> train_labels,
                             const Matrix& test_feats, std::span<const std::uint32_t> test_labels,
                             std::size_t num_classes, double gamma,
                             std::vector<std::string> class_names) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  const MemoryBank bank =
      build_bank(train_feats, train_labels, num_classes, gamma, std::move(class_names));

  EvalReport report;
  report.n_train = train_feats.rows;
  report.n_test = test_feats.rows;
  report.predictions.resize(test_feats.rows);

  const std::int64_t n = static_cast<std::int64_t>(test_feats.rows);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i)
    report.predictions[i] = predict(test_feats.row(static_cast<std::size_t>(i)), bank).argmax();
  const auto t1 = clock::now();

  report.confusion.assign(num_classes, std::vector<std::size_t>(num_classes, 0));
  report.per_class_accuracy.assign(num_classes, 0.0);
  report.per_class_count.assign(num_classes, 0);
  for (std::size_t i = 0; i < test_feats.rows; ++i) {
    ++report.confusion[test_labels[i]][report.predictions[i]];
    ++report.per_class_count[test_labels[i]];
  }
  for (std::size_t c = 0; c < num_classes; ++c)
    if (report.per_class_count[c] > 0)
      report.per_class_accuracy[c] = 100.0 * static_cast<double>(report.confusion[c][c]) /
                                     static_cast<double>(report.per_class_count[c]);
  report.accuracy = accuracy(report.predictions, test_labels);
  report.classify_seconds = std::chrono::duration<double>(t1 - t0).count();
  return report;
}

EvalReport evaluate_classification(const LabeledDataset& train, const LabeledDataset& test,
                                   const EncoderConfig& cfg, double gamma) {
  train.validate();
  test.validate();
  if (train.class_names != test.class_names)
    throw std::invalid_argument("evaluate_classification: class name mismatch between splits");

  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  const Matrix train_feats = encode_dataset(train, cfg);
  const Matrix test_feats = encode_dataset(test, cfg);
  const auto t1 = clock::now();

  EvalReport report = evaluate_features(train_feats, train.labels, test_feats, test.labels,
                                        train.num_classes(), gamma, train.class_names);
  report.encode_seconds = std::chrono::duration<double>(t1 - t0).count();
  return report;
}

}  // namespace pointnp
