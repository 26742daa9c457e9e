// Command line front end: train, eval, oracle-check, dump-reprs.
// Exit codes: 0 success, 1 usage error, 2 data/IO error, 3 verification
// failure.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "slrbm/dataset_io.hpp"
#include "slrbm/evaluation.hpp"
#include "slrbm/exact_oracle.hpp"
#include "slrbm/rbm_model.hpp"
#include "slrbm/rng.hpp"
#include "slrbm/run_config.hpp"
#include "slrbm/signed_graph.hpp"
#include "slrbm/train_config.hpp"
#include "slrbm/trainer.hpp"
#include "slrbm/version.hpp"

namespace {

using namespace slrbm;

struct VerificationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainArgs {
  std::string model = "slrbm";
  std::string images;
  std::string labels;
  std::string out_dir = "out";
  std::string delta_source = "meanfield";
  TrainConfig config;
  int threshold = 127;
  Index per_class = 0;
};

TrainConfig resolve_config(TrainArgs& args) {
  args.config.graph = graph_mode_from_name(args.model);
  args.config.delta_source = args.delta_source == "sample" ? DeltaSource::Sample
                                                           : DeltaSource::MeanField;
  if (args.config.graph == GraphMode::None && args.config.lambda != 0.0) {
    std::cerr << "warning: --lambda has no effect with --model rbm; using 0\n";
    args.config.lambda = 0.0;
  }
  return args.config;
}

Dataset load_train_dataset(const TrainArgs& args) {
  Dataset data = load_dataset(args.images, args.labels, args.threshold);
  if (args.per_class > 0)
    data = subset_per_class(data, args.per_class, args.config.seed);
  return data;
}

void emit_manifest(const TrainArgs& args, const std::filesystem::path& out_dir) {
  const FileDigest image_digest = digest_file(args.images);
  const FileDigest label_digest = digest_file(args.labels);
  std::vector<std::string> comments = {
      std::string("slrbm ") + kVersion + " train manifest",
      "images: " + format_crc32(image_digest.crc32) + ", " +
          std::to_string(image_digest.bytes) + " bytes",
      "labels: " + format_crc32(label_digest.crc32) + ", " +
          std::to_string(label_digest.bytes) + " bytes",
      "artifacts: checkpoint.slrbm, train_report.csv",
      "replay: slrbm train --config " + (out_dir / "manifest.toml").string(),
  };
  std::vector<ManifestEntry> entries = {
      {"images", args.images, true},
      {"labels", args.labels, true},
      {"out-dir", args.out_dir, true},
      {"threshold", std::to_string(args.threshold), false},
      {"per-class", std::to_string(args.per_class), false},
  };
  for (const auto& [key, value] : to_key_values(args.config))
    entries.push_back({key, value, key == "model" || key == "delta-source"});
  write_manifest((out_dir / "manifest.toml").string(), comments, "train", entries);
}

int run_train(TrainArgs& args) {
  const TrainConfig config = resolve_config(args);
  const Dataset data = load_train_dataset(args);

  const std::filesystem::path out_dir(args.out_dir);
  std::filesystem::create_directories(out_dir);
  emit_manifest(args, out_dir);

  auto [params, report] = train(data, config);

  save_checkpoint(params, config, (out_dir / "checkpoint.slrbm").string());
  report.checkpoint_path = (out_dir / "checkpoint.slrbm").string();
  write_report_csv(report, (out_dir / "train_report.csv").string());

  std::cout << "trained " << model_name(config.graph) << " on " << data.size()
            << " examples";
  if (!report.epochs.empty())
    std::cout << "; final reconstruction error "
              << format_double(report.epochs.back().reconstruction_error);
  std::cout << "\nartifacts in " << out_dir.string() << "\n";
  return 0;
}

struct EvalArgs {
  std::string checkpoint;
  std::string train_images, train_labels;
  std::string test_images, test_labels;
  std::string out_dir = "out";
  std::string mode = "prob";
  int threshold = 127;
  int k = 1;
  Index per_class_train = 0;
  Index per_class_test = 0;
  std::uint64_t seed = 7;
};

int run_eval(const EvalArgs& args) {
  const Checkpoint checkpoint = load_checkpoint(args.checkpoint);
  Dataset train_data = load_dataset(args.train_images, args.train_labels, args.threshold);
  Dataset test_data = load_dataset(args.test_images, args.test_labels, args.threshold);
  if (args.per_class_train > 0)
    train_data = subset_per_class(train_data, args.per_class_train,
                                  derive_seed(args.seed, 1));
  if (args.per_class_test > 0)
    test_data = subset_per_class(test_data, args.per_class_test,
                                 derive_seed(args.seed, 2));

  const EncodeMode mode =
      args.mode == "sample" ? EncodeMode::Sample : EncodeMode::Probability;
  const Representations train_reprs =
      encode(checkpoint.params, train_data, mode, derive_seed(args.seed, 3));
  const Representations test_reprs =
      encode(checkpoint.params, test_data, mode, derive_seed(args.seed, 4));
  const KnnResult result = knn_classify(train_reprs, test_reprs, args.k);

  const std::filesystem::path out_dir(args.out_dir);
  std::filesystem::create_directories(out_dir);
  write_error_summary_csv((out_dir / "eval.csv").string(),
                          model_name(checkpoint.config.graph),
                          checkpoint.config.lambda, checkpoint.config.eta,
                          checkpoint.config.seed, result.error_rate);
  std::cout << "error_rate " << format_double(result.error_rate) << " ("
            << test_reprs.size() << " test examples)\n";
  return 0;
}

struct DumpArgs {
  std::string checkpoint;
  std::string images, labels;
  std::string out_dir = "out";
  std::string mode = "prob";
  std::vector<int> classes;
  int threshold = 127;
  Index per_class = 0;
  std::uint64_t seed = 7;
};

int run_dump(const DumpArgs& args) {
  const Checkpoint checkpoint = load_checkpoint(args.checkpoint);
  Dataset data = load_dataset(args.images, args.labels, args.threshold);
  if (args.per_class > 0)
    data = subset_per_class(data, args.per_class, derive_seed(args.seed, 1));

  const std::filesystem::path out_path =
      std::filesystem::path(args.out_dir) / "reprs.csv";
  if (!args.classes.empty()) {
    const std::set<int> keep(args.classes.begin(), args.classes.end());
    Dataset filtered;
    std::vector<Index> rows;
    for (Index i = 0; i < data.size(); ++i)
      if (keep.count(data.labels[static_cast<std::size_t>(i)]) > 0) rows.push_back(i);
    if (rows.empty()) {
      // Nothing selected: still emit the documented header.
      std::filesystem::create_directories(args.out_dir);
      Representations empty;
      empty.codes.resize(checkpoint.params.n_hidden(), 0);
      export_representations(empty, out_path.string());
      std::cout << "wrote 0 representations to " << out_path.string() << "\n";
      return 0;
    }
    filtered.images.resize(static_cast<Index>(rows.size()), data.dim());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      filtered.images.row(static_cast<Index>(i)) = data.images.row(rows[i]);
      filtered.labels.push_back(data.labels[static_cast<std::size_t>(rows[i])]);
    }
    filtered.image_source = data.image_source;
    filtered.label_source = data.label_source;
    filtered.threshold = data.threshold;
    filtered.subset_seed = data.subset_seed;
    data = std::move(filtered);
  }

  const EncodeMode mode =
      args.mode == "sample" ? EncodeMode::Sample : EncodeMode::Probability;
  const Representations reprs =
      encode(checkpoint.params, data, mode, derive_seed(args.seed, 3));

  std::filesystem::create_directories(args.out_dir);
  export_representations(reprs, out_path.string());
  std::cout << "wrote " << reprs.size() << " representations to " << out_path.string()
            << "\n";
  return 0;
}

// --- oracle-check ----------------------------------------------------------
//
// Cross-validates the closed-form conditionals and the CD machinery against
// the enumeration oracle on randomly drawn small instances.

struct OracleArgs {
  int trials = 1000;
  std::uint64_t seed = 1;
};

RbmParams random_params(Rng& rng, Index n_hidden, Index n_visible) {
  RbmParams params;
  params.weights.resize(n_hidden, n_visible);
  for (Index l = 0; l < n_hidden; ++l)
    for (Index r = 0; r < n_visible; ++r) params.weights(l, r) = rng.uniform(-1.0, 1.0);
  params.visible_bias.resize(n_visible);
  for (Index r = 0; r < n_visible; ++r) params.visible_bias(r) = rng.uniform(-1.0, 1.0);
  params.hidden_bias.resize(n_hidden);
  for (Index l = 0; l < n_hidden; ++l) params.hidden_bias(l) = rng.uniform(-1.0, 1.0);
  return params;
}

Matrix random_bits(Rng& rng, Index rows, Index cols) {
  Matrix out(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) out(i, j) = rng.bernoulli(0.5) ? 1.0 : 0.0;
  return out;
}

Matrix random_phi(Rng& rng, Index batch) {
  std::vector<int> labels(static_cast<std::size_t>(batch));
  for (auto& label : labels) label = static_cast<int>(rng.below(3));
  return build_signed_adjacency(labels).phi;
}

int check_conditionals(int trials, std::uint64_t seed) {
  constexpr double kLambdas[] = {0.0, 0.1, 1.0};
  Rng rng(derive_seed(seed, 0xC0));
  int passed = 0;
  for (int t = 0; t < trials; ++t) {
    const Index m = 1 + static_cast<Index>(rng.below(4));
    const Index n = 1 + static_cast<Index>(rng.below(4));
    const Index b = 1 + static_cast<Index>(rng.below(3));
    const double lambda = kLambdas[t % 3];
    const RbmParams params = random_params(rng, n, m);
    const Matrix v = random_bits(rng, b, m);
    const Matrix h = random_bits(rng, b, n);
    const Matrix phi = random_phi(rng, b);
    const Index i = static_cast<Index>(rng.below(static_cast<std::uint64_t>(b)));
    const Index l = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
    const Index r = static_cast<Index>(rng.below(static_cast<std::uint64_t>(m)));

    BatchState batch;
    batch.visible = v;
    batch.hidden_sample = h;
    batch.hidden_prob = h;
    batch.phi = phi;

    // Closed form.
    const Vector delta = delta_term(batch, lambda, i, DeltaSource::Sample);
    const Vector hp = hidden_conditional(params, v.row(i), delta);
    const Vector vp = visible_conditional(params, h.row(i));

    // Energy-ratio route.
    const double hidden_flip = flip_hidden_conditional(params, lambda, v, h, phi, i, l);
    const double visible_flip = flip_visible_conditional(params, lambda, v, h, phi, i, r);

    bool ok = std::abs(hp(l) - hidden_flip) <= 1e-12 &&
              std::abs(vp(r) - visible_flip) <= 1e-12;

    // Enumeration route when the table fits comfortably.
    if (ok && b * n <= 14) {
      const EnumeratedDistribution dist = enumerate_hidden(params, lambda, v, phi);
      ok = std::abs(hp(l) - exact_hidden_conditional(dist, i, l, h)) <= 1e-12;
    }
    if (ok) ++passed;
  }
  return passed;
}

int check_gradient(int trials, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x60));
  int passed = 0;
  for (int t = 0; t < trials; ++t) {
    const Index m = 2 + static_cast<Index>(rng.below(2));
    const Index n = 2;
    const Index b = 2;
    const double lambda = t % 2 == 0 ? 0.1 : 0.0;
    const RbmParams params = random_params(rng, n, m);
    const Matrix v = random_bits(rng, b, m);
    const Matrix phi = random_phi(rng, b);

    const Gradient grad = exact_gradient(params, lambda, v, phi);
    const double step = 1e-5;
    bool ok = true;
    auto fd_check = [&](double analytic, RbmParams plus, RbmParams minus) {
      const double fd = (exact_log_likelihood(plus, lambda, v, phi) -
                         exact_log_likelihood(minus, lambda, v, phi)) /
                        (2.0 * step);
      if (std::abs(fd - analytic) > 1e-6 * std::max(1.0, std::abs(analytic)))
        ok = false;
    };
    for (Index l = 0; l < n && ok; ++l)
      for (Index r = 0; r < m && ok; ++r) {
        RbmParams plus = params, minus = params;
        plus.weights(l, r) += step;
        minus.weights(l, r) -= step;
        fd_check(grad.d_weights(l, r), plus, minus);
      }
    for (Index r = 0; r < m && ok; ++r) {
      RbmParams plus = params, minus = params;
      plus.visible_bias(r) += step;
      minus.visible_bias(r) -= step;
      fd_check(grad.d_visible_bias(r), plus, minus);
    }
    for (Index l = 0; l < n && ok; ++l) {
      RbmParams plus = params, minus = params;
      plus.hidden_bias(l) += step;
      minus.hidden_bias(l) -= step;
      fd_check(grad.d_hidden_bias(l), plus, minus);
    }
    if (ok) ++passed;
  }
  return passed;
}

int check_trace(int trials, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x70));
  int passed = 0;
  for (int t = 0; t < trials; ++t) {
    const Index nodes = 2 + static_cast<Index>(rng.below(5));
    const Index dim = 1 + static_cast<Index>(rng.below(4));
    Matrix codes(dim, nodes);
    for (Index i = 0; i < dim; ++i)
      for (Index j = 0; j < nodes; ++j) codes(i, j) = rng.uniform(-1.0, 1.0);
    const Matrix phi = random_phi(rng, nodes);
    Adjacency adj;
    adj.phi = phi;
    const SignedGraph graph = build_laplacian(adj, DegreeConvention::Signed);
    const double direct = smoothness(codes, adj);
    const double via_trace = smoothness_via_trace(codes, graph);
    if (std::abs(direct - via_trace) <= 1e-9 * std::max(1.0, std::abs(direct)))
      ++passed;
  }
  return passed;
}

int check_patches(int trials, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0xA1));
  int passed = 0;
  for (int t = 0; t < trials; ++t) {
    const Index nodes = 2 + static_cast<Index>(rng.below(5));
    const Matrix phi = random_phi(rng, nodes);
    Adjacency adj;
    adj.phi = phi;
    const SignedGraph signed_graph = build_laplacian(adj, DegreeConvention::Signed);
    const SignedGraph absolute_graph = build_laplacian(adj, DegreeConvention::Absolute);
    const Matrix total = align_patches(signed_graph);
    const Matrix expected = signed_graph.laplacian + absolute_graph.laplacian;
    if (((total - expected).cwiseAbs().maxCoeff()) <= 1e-12) ++passed;
  }
  return passed;
}

int run_oracle_check(const OracleArgs& args) {
  if (args.trials == 0) {
    std::cout << "warning: 0 trials requested; vacuous pass\n";
    return 0;
  }
  if (args.trials < 0) throw CLI::ValidationError("--trials must be non-negative");

  const int grad_trials = std::max(4, args.trials / 25);
  struct Suite {
    const char* name;
    int passed;
    int total;
  };
  const Suite suites[] = {
      {"conditional identity", check_conditionals(args.trials, args.seed), args.trials},
      {"gradient check", check_gradient(grad_trials, args.seed), grad_trials},
      {"trace identity", check_trace(args.trials, args.seed), args.trials},
      {"patch alignment", check_patches(args.trials, args.seed), args.trials},
  };
  bool all_ok = true;
  for (const Suite& suite : suites) {
    std::cout << suite.name << ": " << suite.passed << "/" << suite.total << "\n";
    if (suite.passed != suite.total) all_ok = false;
  }
  if (!all_ok) throw VerificationError("oracle-check failed");
  std::cout << "oracle-check: all suites passed\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"binary RBM with a signed-graph smoothness regularizer"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  // Manifests replay through here; for subcommand flags the file uses a
  // [train] (etc.) section. Unknown keys are an error, not a silent skip.
  app.set_config("--config", "", "TOML config; sections name the subcommand");
  app.allow_config_extras(CLI::config_extras_mode::error);

  TrainArgs train_args;
  CLI::App* train_cmd = app.add_subcommand("train", "train a model and write artifacts");
  train_cmd->fallthrough(true);
  train_cmd->add_option("--images", train_args.images, "IDX image file (optionally .gz)")
      ->required();
  train_cmd->add_option("--labels", train_args.labels, "IDX label file (optionally .gz)")
      ->required();
  train_cmd->add_option("--model", train_args.model, "rbm | slrbm | graphrbm")
      ->check(CLI::IsMember({"rbm", "slrbm", "graphrbm"}))
      ->capture_default_str();
  train_cmd->add_option("--lambda", train_args.config.lambda, "coupling strength")
      ->capture_default_str();
  train_cmd->add_option("--eta", train_args.config.eta, "learning rate")
      ->capture_default_str();
  train_cmd->add_option("--batch-size", train_args.config.batch_size, "minibatch size")
      ->capture_default_str();
  train_cmd->add_option("--epochs", train_args.config.epochs, "training epochs")
      ->capture_default_str();
  train_cmd->add_option("--cd-k", train_args.config.cd_k, "Gibbs steps per update")
      ->capture_default_str();
  train_cmd
      ->add_option("--weight-decay", train_args.config.weight_decay,
                   "L2 decay on the weights")
      ->capture_default_str();
  train_cmd->add_option("--seed", train_args.config.seed, "root RNG seed")
      ->capture_default_str();
  train_cmd->add_option("--n-hidden", train_args.config.n_hidden, "hidden units")
      ->capture_default_str();
  train_cmd
      ->add_option("--delta-source", train_args.delta_source, "meanfield | sample")
      ->check(CLI::IsMember({"meanfield", "sample"}))
      ->capture_default_str();
  train_cmd
      ->add_option("--delta-negative", train_args.config.delta_in_negative_phase,
                   "apply coupling offsets in the negative phase")
      ->capture_default_str();
  train_cmd->add_option("--knn-p", train_args.config.knn_neighbors,
                        "neighbors per node (graphrbm)")
      ->capture_default_str();
  train_cmd
      ->add_option("--knn-rho", train_args.config.knn_kernel_width,
                   "heat kernel width (graphrbm); 0 = binary weights")
      ->capture_default_str();
  train_cmd->add_option("--threshold", train_args.threshold, "binarization threshold")
      ->capture_default_str();
  train_cmd->add_option("--per-class", train_args.per_class,
                        "stratified subset size per class; 0 = all")
      ->capture_default_str();
  train_cmd->add_option("--out-dir", train_args.out_dir, "artifact directory")
      ->capture_default_str();
  train_cmd->callback([&train_args] { run_train(train_args); });

  EvalArgs eval_args;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "1-NN accuracy of hidden codes from a checkpoint");
  eval_cmd->add_option("--checkpoint", eval_args.checkpoint, "trained model")->required();
  eval_cmd->add_option("--train-images", eval_args.train_images, "reference images")
      ->required();
  eval_cmd->add_option("--train-labels", eval_args.train_labels, "reference labels")
      ->required();
  eval_cmd->add_option("--test-images", eval_args.test_images, "query images")->required();
  eval_cmd->add_option("--test-labels", eval_args.test_labels, "query labels")->required();
  eval_cmd->add_option("--mode", eval_args.mode, "prob | sample")
      ->check(CLI::IsMember({"prob", "sample"}))
      ->capture_default_str();
  eval_cmd->add_option("--k", eval_args.k, "votes per query")->capture_default_str();
  eval_cmd->add_option("--threshold", eval_args.threshold, "binarization threshold")
      ->capture_default_str();
  eval_cmd->add_option("--per-class-train", eval_args.per_class_train,
                       "stratified reference subset; 0 = all")
      ->capture_default_str();
  eval_cmd->add_option("--per-class-test", eval_args.per_class_test,
                       "stratified query subset; 0 = all")
      ->capture_default_str();
  eval_cmd->add_option("--seed", eval_args.seed, "subset / sampling seed")
      ->capture_default_str();
  eval_cmd->add_option("--out-dir", eval_args.out_dir, "artifact directory")
      ->capture_default_str();
  eval_cmd->callback([&eval_args] { run_eval(eval_args); });

  DumpArgs dump_args;
  CLI::App* dump_cmd =
      app.add_subcommand("dump-reprs", "export hidden codes for inspection");
  dump_cmd->add_option("--checkpoint", dump_args.checkpoint, "trained model")->required();
  dump_cmd->add_option("--images", dump_args.images, "IDX image file")->required();
  dump_cmd->add_option("--labels", dump_args.labels, "IDX label file")->required();
  dump_cmd->add_option("--classes", dump_args.classes, "keep only these labels")
      ->delimiter(',');
  dump_cmd->add_option("--mode", dump_args.mode, "prob | sample")
      ->check(CLI::IsMember({"prob", "sample"}))
      ->capture_default_str();
  dump_cmd->add_option("--threshold", dump_args.threshold, "binarization threshold")
      ->capture_default_str();
  dump_cmd->add_option("--per-class", dump_args.per_class,
                       "stratified subset size per class; 0 = all")
      ->capture_default_str();
  dump_cmd->add_option("--seed", dump_args.seed, "subset / sampling seed")
      ->capture_default_str();
  dump_cmd->add_option("--out-dir", dump_args.out_dir, "artifact directory")
      ->capture_default_str();
  dump_cmd->callback([&dump_args] { run_dump(dump_args); });

  OracleArgs oracle_args;
  CLI::App* oracle_cmd = app.add_subcommand(
      "oracle-check", "cross-validate conditionals and gradients against enumeration");
  oracle_cmd->add_option("--trials", oracle_args.trials, "random instances per suite")
      ->capture_default_str();
  oracle_cmd->add_option("--seed", oracle_args.seed, "RNG seed")->capture_default_str();
  oracle_cmd->callback([&oracle_args] { run_oracle_check(oracle_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const VerificationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
