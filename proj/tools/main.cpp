// pointnp command line: synthetic data generation, memory bank construction,
// classification, evaluation, few-shot runs, part segmentation, logit fusion
// and mesh sampling. Exit codes: 0 success, 2 usage error, 1 runtime error.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pointnp/dataset.hpp"
#include "pointnp/geometry.hpp"
#include "pointnp/io.hpp"
#include "pointnp/memory.hpp"
#include "pointnp/rng.hpp"
#include "pointnp/segmentation.hpp"

using namespace pointnp;

namespace {

struct EncoderFlags {
  std::size_t stages = 4;
  std::size_t dim = 72;
  std::size_t k = 90;
  double alpha = 1000.0;
  double beta = 100.0;
  std::string pooling = "max+avg";
  std::string grouping = "knn";
  double radius = 0.2;
  std::string global_pooling = "max+avg";
  bool no_expand = false;

  EncoderConfig config() const {
    EncoderConfig cfg;
    cfg.stages = stages;
    cfg.init_dim = dim;
    cfg.neighbors = k;
    cfg.alpha = alpha;
    cfg.beta = beta;
    if (pooling == "max")
      cfg.stage_pooling = StagePooling::Max;
    else if (pooling == "avg")
      cfg.stage_pooling = StagePooling::Avg;
    else
      cfg.stage_pooling = StagePooling::MaxPlusAvg;
    cfg.grouping = grouping == "ball" ? Grouping::BallQuery : Grouping::kNN;
    cfg.ball_radius = radius;
    cfg.global_pooling =
        global_pooling == "concat" ? GlobalPooling::ConcatMaxAvg : GlobalPooling::MaxPlusAvg;
    cfg.feature_expansion = !no_expand;
    cfg.validate();
    return cfg;
  }
};

// Classification defaults; the segment/--part paths switch to the 5-stage
// segmentation setting unless flags override them.
void add_encoder_flags(CLI::App* cmd, EncoderFlags& flags, bool seg_defaults = false) {
  if (seg_defaults) {
    flags.stages = 5;
    flags.dim = 144;
    flags.k = 128;
  }
  cmd->add_option("--stages", flags.stages, "encoder stages")->capture_default_str();
  cmd->add_option("--dim", flags.dim, "initial feature dimension (multiple of 6)")
      ->capture_default_str();
  cmd->add_option("--k", flags.k, "neighbors per local region")->capture_default_str();
  cmd->add_option("--alpha", flags.alpha, "positional encoding magnitude")->capture_default_str();
  cmd->add_option("--beta", flags.beta, "positional encoding wavelength")->capture_default_str();
  cmd->add_option("--pooling", flags.pooling, "stage pooling: max, avg, max+avg")
      ->check(CLI::IsMember({"max", "avg", "max+avg"}))
      ->capture_default_str();
  cmd->add_option("--grouping", flags.grouping, "neighbor grouping: knn or ball")
      ->check(CLI::IsMember({"knn", "ball"}))
      ->capture_default_str();
  cmd->add_option("--radius", flags.radius, "ball query radius")->capture_default_str();
  cmd->add_option("--global-pooling", flags.global_pooling, "global pooling: max+avg or concat")
      ->check(CLI::IsMember({"max+avg", "concat"}))
      ->capture_default_str();
  cmd->add_flag("--no-expand", flags.no_expand, "disable center/neighbor feature expansion");
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  out << text;
}

std::string format_report(const EvalReport& report, const std::vector<std::string>& names) {
  std::ostringstream os;
  char buf[128];
  os << "== classification report ==\n";
  std::snprintf(buf, sizeof(buf), "overall accuracy: %.4f%% (%zu test / %zu train)\n",
                report.accuracy, report.n_test, report.n_train);
  os << buf;
  for (std::size_t c = 0; c < names.size(); ++c) {
    std::snprintf(buf, sizeof(buf), "  %-12s %8.3f%%  (n=%zu)\n", names[c].c_str(),
                  report.per_class_accuracy[c], report.per_class_count[c]);
    os << buf;
  }
  os << "\n";
  os << "accuracy=" << report.accuracy << "\n";
  os << "n_train=" << report.n_train << "\n";
  os << "n_test=" << report.n_test << "\n";
  for (std::size_t c = 0; c < names.size(); ++c)
    os << "per_class[" << names[c] << "]=" << report.per_class_accuracy[c] << "\n";
  for (std::size_t t = 0; t < report.confusion.size(); ++t)
    for (std::size_t p = 0; p < report.confusion[t].size(); ++p)
      if (report.confusion[t][p] > 0)
        os << "confusion[" << t << "][" << p << "]=" << report.confusion[t][p] << "\n";
  return os.str();
}

std::vector<Primitive> parse_class_list(const std::string& csv) {
  std::vector<Primitive> classes;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) classes.push_back(primitive_from_name(item));
  if (classes.empty()) throw std::runtime_error("empty class list");
  return classes;
}

Matrix subsample_rows(const Matrix& feats, std::vector<std::uint32_t>& labels, double ratio,
                      std::uint64_t seed) {
  const std::size_t keep = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(ratio * static_cast<double>(feats.rows))));
  std::vector<std::uint32_t> order(feats.rows);
  std::iota(order.begin(), order.end(), 0u);
  Rng rng(derive_seed(seed, 0xBA7Full));
  rng.shuffle(order);
  order.resize(keep);
  std::sort(order.begin(), order.end());

  Matrix out(keep, feats.cols);
  std::vector<std::uint32_t> new_labels(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    auto src = feats.row(order[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
    new_labels[i] = labels[order[i]];
  }
  labels = std::move(new_labels);
  return out;
}

int cmd_synth(const std::string& out_dir, const std::string& classes_csv, std::size_t per_class,
              std::size_t points, double sigma, std::uint64_t seed, bool parts) {
  if (parts) {
    const SegDataset ds = synth_part_primitives(per_class, points, sigma, seed);
    save_seg_dataset_dir(ds, out_dir);
    std::cerr << "wrote " << ds.clouds.size() << " segmented clouds to " << out_dir << "\n";
    return 0;
  }
  const std::vector<Primitive> classes = parse_class_list(classes_csv);
  const LabeledDataset ds = synth_primitives(classes, per_class, points, sigma, seed);
  save_dataset_dir(ds, out_dir);
  std::cerr << "wrote " << ds.size() << " clouds to " << out_dir << "\n";
  return 0;
}

int cmd_build_bank(const std::string& train_dir, const std::string& out_path,
                   const EncoderFlags& flags, double gamma, bool part) {
  const EncoderConfig cfg = flags.config();
  if (part) {
    const SegDataset ds = load_seg_dataset_dir(train_dir);
    std::vector<PointCloud> normalized;
    normalized.reserve(ds.clouds.size());
    for (const PointCloud& c : ds.clouds) normalized.push_back(normalize_cloud(c));
    const PartBank bank = build_part_bank(normalized, ds.point_labels, ds.part_names.size(), cfg,
                                          gamma, ds.part_names);
    save_bank(bank, out_path);
    std::cerr << "part bank: " << bank.rows() << " rows, dim " << bank.dim << " -> " << out_path
              << "\n";
    return 0;
  }
  const LabeledDataset ds = load_dataset_dir(train_dir);
  const Matrix feats = encode_dataset(ds, cfg);
  const MemoryBank bank = build_bank(feats, ds.labels, ds.num_classes(), gamma, ds.class_names);
  save_bank(bank, out_path);
  std::cerr << "bank: " << bank.size() << " samples, dim " << bank.dim << " -> " << out_path
            << "\n";
  return 0;
}

int cmd_classify(const std::string& bank_path, const std::string& input_path,
                 const EncoderFlags& flags, std::size_t topk, std::size_t knn_k) {
  const auto loaded = load_bank(bank_path);
  if (!std::holds_alternative<MemoryBank>(loaded))
    throw std::runtime_error("classify expects a classification bank (kind 0)");
  const MemoryBank& bank = std::get<MemoryBank>(loaded);

  const EncoderConfig cfg = flags.config();
  if (cfg.global_dim() != bank.dim)
    throw std::runtime_error("encoder flags produce dim " + std::to_string(cfg.global_dim()) +
                             " but the bank stores dim " + std::to_string(bank.dim) +
                             "; pass the flags used at build time");

  const PointCloud cloud = normalize_cloud(load_xyz(input_path));
  const GlobalFeature g = encode_global(cloud, cfg);

  if (knn_k > 0) {
    const std::uint32_t cls = knn_classify(g.values, bank, knn_k);
    std::cout << "mode=knn k=" << knn_k << "\n";
    std::cout << "predicted=" << bank.class_names[cls] << "\n";
    std::cout << "predicted_class=" << cls << "\n";
    return 0;
  }

  const Logits logits = topk > 0 ? predict_topk(g.values, bank, topk) : predict(g.values, bank);
  std::vector<std::uint32_t> order(logits.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (logits.scores[a] != logits.scores[b]) return logits.scores[a] > logits.scores[b];
    return a < b;
  });
  std::cout << "predicted=" << bank.class_names[order[0]] << "\n";
  std::cout << "predicted_class=" << order[0] << "\n";
  char buf[160];
  for (std::size_t r = 0; r < order.size(); ++r) {
    std::snprintf(buf, sizeof(buf), "rank=%zu class=%u name=%s score=%.17g\n", r + 1, order[r],
                  bank.class_names[order[r]].c_str(), logits.scores[order[r]]);
    std::cout << buf;
  }
  return 0;
}

int cmd_eval(const std::string& train_dir, const std::string& test_dir, const EncoderFlags& flags,
             double gamma, const std::string& sweep, double bank_ratio, std::uint64_t seed,
             const std::string& out_path) {
  const EncoderConfig cfg = flags.config();
  const LabeledDataset train = load_dataset_dir(train_dir);
  LabeledDataset test = load_dataset_dir(test_dir);
  test.split = "test";
  if (train.class_names != test.class_names)
    throw std::runtime_error("train and test class names differ");

  Matrix train_feats = encode_dataset(train, cfg);
  const Matrix test_feats = encode_dataset(test, cfg);
  std::vector<std::uint32_t> train_labels = train.labels;
  if (bank_ratio < 1.0) train_feats = subsample_rows(train_feats, train_labels, bank_ratio, seed);

  std::ostringstream os;
  if (!sweep.empty()) {
    double lo = 0, hi = 0;
    int steps = 0;
    if (std::sscanf(sweep.c_str(), "%lf:%lf:%d", &lo, &hi, &steps) != 3 || steps < 2)
      throw std::runtime_error("--sweep-gamma expects a:b:steps with steps >= 2");
    os << "== gamma sweep ==\n";
    for (int s = 0; s < steps; ++s) {
      const double g = lo + (hi - lo) * static_cast<double>(s) / static_cast<double>(steps - 1);
      const EvalReport r = evaluate_features(train_feats, train_labels, test_feats, test.labels,
                                             train.num_classes(), g, train.class_names);
      char buf[96];
      std::snprintf(buf, sizeof(buf), "  gamma %10.4f -> %.4f%%\n", g, r.accuracy);
      os << buf;
      os << "sweep_gamma[" << g << "]=" << r.accuracy << "\n";
    }
    emit(os.str(), out_path);
    return 0;
  }

  const EvalReport report = evaluate_features(train_feats, train_labels, test_feats, test.labels,
                                              train.num_classes(), gamma, train.class_names);
  std::ostringstream body;
  body << format_report(report, train.class_names);
  if (bank_ratio < 1.0) body << "bank_ratio=" << bank_ratio << "\n";
  emit(body.str(), out_path);
  std::cerr << "classify time: " << report.classify_seconds << "s\n";
  return 0;
}

int cmd_few_shot(const std::string& data_dir, std::size_t n_way, std::size_t k_shot,
                 std::size_t runs, std::size_t query, std::uint64_t seed,
                 const EncoderFlags& flags, double gamma, const std::string& out_path) {
  const EncoderConfig cfg = flags.config();
  const LabeledDataset data = load_dataset_dir(data_dir);
  const Matrix feats = encode_dataset(data, cfg);

  std::ostringstream os;
  double mean = 0.0;
  std::vector<double> accs;
  for (std::size_t run = 0; run < runs; ++run) {
    const FewShotEpisode ep = sample_episode(data, n_way, k_shot, query, seed + run);

    // remap selected classes to 0..n_way-1 for the episode bank
    std::vector<std::uint32_t> class_map(data.num_classes(), UINT32_MAX);
    std::vector<std::string> episode_names;
    std::uint32_t next = 0;
    for (std::uint32_t l : ep.support.labels)
      if (class_map[l] == UINT32_MAX) {
        class_map[l] = next++;
        episode_names.push_back(data.class_names[l]);
      }

    Matrix support(ep.support_indices.size(), feats.cols);
    std::vector<std::uint32_t> support_labels;
    for (std::size_t i = 0; i < ep.support_indices.size(); ++i) {
      auto src = feats.row(ep.support_indices[i]);
      std::copy(src.begin(), src.end(), support.row(i).begin());
      support_labels.push_back(class_map[ep.support.labels[i]]);
    }
    Matrix query_feats(ep.query_indices.size(), feats.cols);
    std::vector<std::uint32_t> query_labels;
    for (std::size_t i = 0; i < ep.query_indices.size(); ++i) {
      auto src = feats.row(ep.query_indices[i]);
      std::copy(src.begin(), src.end(), query_feats.row(i).begin());
      query_labels.push_back(class_map[ep.query.labels[i]]);
    }

    const EvalReport r = evaluate_features(support, support_labels, query_feats, query_labels,
                                           n_way, gamma, episode_names);
    accs.push_back(r.accuracy);
    mean += r.accuracy;
    os << "run[" << run << "]=" << r.accuracy << "\n";
  }
  mean /= static_cast<double>(runs);
  double var = 0.0;
  for (double a : accs) var += (a - mean) * (a - mean);
  os << "mean_accuracy=" << mean << "\n";
  os << "stddev=" << std::sqrt(var / static_cast<double>(runs)) << "\n";
  emit(os.str(), out_path);
  return 0;
}

int cmd_segment(const std::string& bank_path, const std::string& input_path,
                const std::string& category, const EncoderFlags& flags,
                const std::string& out_path) {
  const auto loaded = load_bank(bank_path);
  if (!std::holds_alternative<PartBank>(loaded))
    throw std::runtime_error("segment expects a part bank (kind 1)");
  const PartBank& bank = std::get<PartBank>(loaded);
  const EncoderConfig cfg = flags.config();

  const std::vector<std::uint32_t> range = part_range_for_category(bank, category);
  if (range.empty())
    std::cerr << "warning: unknown category '" << category << "', matching the full bank\n";

  const PointCloud cloud = normalize_cloud(load_xyz(input_path));
  std::vector<std::string> warnings;
  const std::vector<std::uint32_t> labels = segment(cloud, bank, cfg, range, &warnings);
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";

  std::string text;
  for (std::uint32_t l : labels) text += std::to_string(l) + "\n";
  emit(text, out_path);
  return 0;
}

int cmd_fuse(const std::string& a_path, const std::string& b_path, double lambda, bool use_softmax,
             const std::string& out_path) {
  Logits a{load_logits(a_path)};
  Logits b{load_logits(b_path)};
  if (use_softmax) {
    a = softmax(a);
    b = softmax(b);
  }
  const Logits fused = fuse_logits(a, b, lambda);
  emit(write_logits(fused.scores), out_path);
  return 0;
}

int cmd_sample_mesh(const std::string& in_path, std::size_t n, std::uint64_t seed,
                    const std::string& out_path) {
  const TriangleMesh mesh = load_off(in_path);
  const PointCloud cloud = sample_mesh_surface(mesh, n, seed);
  if (out_path.empty())
    std::cout << write_xyz(cloud);
  else
    save_xyz(cloud, out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"training-free point cloud analysis toolkit"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic primitive dataset");
  std::string synth_out, synth_classes = "sphere,cube,cylinder,cone,torus,plane";
  std::size_t synth_per = 20, synth_points = 512;
  double synth_sigma = 0.01;
  std::uint64_t synth_seed = 0;
  bool synth_parts = false;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--classes", synth_classes, "comma list of primitives")->capture_default_str();
  synth->add_option("--per-class", synth_per, "samples per class")->capture_default_str();
  synth->add_option("--points", synth_points, "points per cloud")->capture_default_str();
  synth->add_option("--sigma", synth_sigma, "surface jitter")->capture_default_str();
  synth->add_option("--seed", synth_seed, "random seed")->capture_default_str();
  synth->add_flag("--parts", synth_parts, "emit a part-segmentation dataset instead");

  // build-bank
  auto* build = app.add_subcommand("build-bank", "encode a training set into a memory bank");
  std::string build_train, build_out;
  double build_gamma = 100.0;
  bool build_part = false;
  EncoderFlags build_flags;
  build->add_option("--train", build_train, "training dataset directory")->required();
  build->add_option("--out", build_out, "output .pnnb path")->required();
  build->add_option("--gamma", build_gamma, "activation sharpness")->capture_default_str();
  build->add_flag("--part", build_part, "build a part-segmentation bank");
  add_encoder_flags(build, build_flags);

  // classify
  auto* classify = app.add_subcommand("classify", "classify one cloud against a bank");
  std::string cls_bank, cls_input;
  std::size_t cls_topk = 0, cls_knn = 0;
  EncoderFlags cls_flags;
  classify->add_option("--bank", cls_bank, "bank file")->required();
  classify->add_option("--input", cls_input, "input .xyz cloud")->required();
  auto* topk_opt = classify->add_option("--topk", cls_topk, "use only the top-k bank rows");
  classify->add_option("--knn", cls_knn, "hard k-NN vote instead of soft matching")
      ->excludes(topk_opt);
  add_encoder_flags(classify, cls_flags);

  // eval
  auto* eval = app.add_subcommand("eval", "train/test evaluation with a report");
  std::string eval_train, eval_test, eval_sweep, eval_out;
  double eval_gamma = 100.0, eval_ratio = 1.0;
  std::uint64_t eval_seed = 0;
  EncoderFlags eval_flags;
  eval->add_option("--train", eval_train, "training dataset directory")->required();
  eval->add_option("--test", eval_test, "test dataset directory")->required();
  eval->add_option("--gamma", eval_gamma, "activation sharpness")->capture_default_str();
  eval->add_option("--sweep-gamma", eval_sweep, "sweep a:b:steps instead of a single gamma");
  eval->add_option("--bank-ratio", eval_ratio, "random fraction of the bank to keep")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  eval->add_option("--seed", eval_seed, "seed for bank subsampling")->capture_default_str();
  eval->add_option("--out", eval_out, "write the report here instead of stdout");
  add_encoder_flags(eval, eval_flags);

  // few-shot
  auto* few = app.add_subcommand("few-shot", "episodic n-way k-shot evaluation");
  std::string few_data, few_out;
  std::size_t few_n = 5, few_k = 10, few_runs = 10, few_query = 20;
  std::uint64_t few_seed = 0;
  double few_gamma = 100.0;
  EncoderFlags few_flags;
  few->add_option("--data", few_data, "dataset directory")->required();
  few->add_option("--n-way", few_n, "classes per episode")->capture_default_str();
  few->add_option("--k-shot", few_k, "support samples per class")->capture_default_str();
  few->add_option("--runs", few_runs, "independent episodes")->capture_default_str();
  few->add_option("--query", few_query, "query samples per class")->capture_default_str();
  few->add_option("--seed", few_seed, "base seed; run r uses seed+r")->capture_default_str();
  few->add_option("--gamma", few_gamma, "activation sharpness")->capture_default_str();
  few->add_option("--out", few_out, "write results here instead of stdout");
  add_encoder_flags(few, few_flags);

  // segment
  auto* seg = app.add_subcommand("segment", "per-point part labels for one cloud");
  std::string seg_bank, seg_input, seg_category, seg_out;
  EncoderFlags seg_flags;
  seg->add_option("--bank", seg_bank, "part bank file")->required();
  seg->add_option("--input", seg_input, "input .xyz cloud")->required();
  seg->add_option("--category", seg_category, "object category name")->required();
  seg->add_option("--out", seg_out, "write labels here instead of stdout");
  add_encoder_flags(seg, seg_flags, /*seg_defaults=*/true);

  // fuse
  auto* fuse = app.add_subcommand("fuse", "linear interpolation of two logit files");
  std::string fuse_a, fuse_b, fuse_out;
  double fuse_lambda = 0.5;
  bool fuse_softmax = false;
  fuse->add_option("--a", fuse_a, "first logits file")->required();
  fuse->add_option("--b", fuse_b, "second logits file")->required();
  fuse->add_option("--lambda", fuse_lambda, "weight of file a")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  fuse->add_flag("--softmax", fuse_softmax, "softmax both inputs before fusing");
  fuse->add_option("--out", fuse_out, "write fused logits here instead of stdout");

  // sample-mesh
  auto* mesh = app.add_subcommand("sample-mesh", "sample a point cloud from an OFF mesh");
  std::string mesh_in, mesh_out;
  std::size_t mesh_n = 1024;
  std::uint64_t mesh_seed = 0;
  mesh->add_option("--in", mesh_in, "input .off mesh")->required();
  mesh->add_option("--n", mesh_n, "points to sample")->capture_default_str();
  mesh->add_option("--seed", mesh_seed, "random seed")->capture_default_str();
  mesh->add_option("--out", mesh_out, "output .xyz path (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (synth->parsed())
      return cmd_synth(synth_out, synth_classes, synth_per, synth_points, synth_sigma, synth_seed,
                       synth_parts);
    if (build->parsed())
      return cmd_build_bank(build_train, build_out, build_flags, build_gamma, build_part);
    if (classify->parsed()) return cmd_classify(cls_bank, cls_input, cls_flags, cls_topk, cls_knn);
    if (eval->parsed())
      return cmd_eval(eval_train, eval_test, eval_flags, eval_gamma, eval_sweep, eval_ratio,
                      eval_seed, eval_out);
    if (few->parsed())
      return cmd_few_shot(few_data, few_n, few_k, few_runs, few_query, few_seed, few_flags,
                          few_gamma, few_out);
    if (seg->parsed()) return cmd_segment(seg_bank, seg_input, seg_category, seg_flags, seg_out);
    if (fuse->parsed()) return cmd_fuse(fuse_a, fuse_b, fuse_lambda, fuse_softmax, fuse_out);
    if (mesh->parsed()) return cmd_sample_mesh(mesh_in, mesh_n, mesh_seed, mesh_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
