#include "lens/perception.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>

#include "json.hpp"
#include "lens/base64.hpp"
#include "lens/errors.hpp"
#include "lens/rng.hpp"

namespace lens {

namespace {

constexpr int kPoolGrid = 8;

std::string encode_doubles(const double* data, std::size_t n) {
  std::vector<std::uint8_t> bytes(n * sizeof(double));
  std::memcpy(bytes.data(), data, bytes.size());
  return base64::encode(bytes.data(), bytes.size());
}

std::vector<double> decode_doubles(const std::string& text, std::size_t expected) {
  const std::vector<std::uint8_t> bytes = base64::decode(text);
  if (bytes.size() != expected * sizeof(double)) {
    throw DataError("model checkpoint: blob size mismatch");
  }
  std::vector<double> out(expected);
  std::memcpy(out.data(), bytes.data(), bytes.size());
  return out;
}

std::string encode_matrix_rowmajor(const Eigen::MatrixXd& m) {
  std::vector<double> flat(static_cast<std::size_t>(m.rows()) * m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      flat[static_cast<std::size_t>(r) * m.cols() + c] = m(r, c);
  return encode_doubles(flat.data(), flat.size());
}

Eigen::MatrixXd decode_matrix_rowmajor(const std::string& text, Eigen::Index rows,
                                       Eigen::Index cols) {
  const std::vector<double> flat =
      decode_doubles(text, static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = flat[static_cast<std::size_t>(r) * cols + c];
  return m;
}

// Linear-interpolated percentile of a copy of `values`, q in [0, 100].
double percentile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double rank = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(rank);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = rank - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

Eigen::VectorXd logits_of(const ClassifierModel& model, const Eigen::VectorXd& f) {
  return model.weights * f + model.bias;
}

}  // namespace

FeatureVector extract_features(const CapturedImage& image) {
  if (image.height < kPoolGrid || image.width < kPoolGrid) {
    throw std::invalid_argument("extract_features: image smaller than pooling grid");
  }
  Eigen::VectorXd pooled(kPoolGrid * kPoolGrid);
  for (int by = 0; by < kPoolGrid; ++by) {
    const int y0 = by * image.height / kPoolGrid;
    const int y1 = (by + 1) * image.height / kPoolGrid;
    for (int bx = 0; bx < kPoolGrid; ++bx) {
      const int x0 = bx * image.width / kPoolGrid;
      const int x1 = (bx + 1) * image.width / kPoolGrid;
      double sum = 0.0;
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) sum += image.pixel_unit(y, x);
      pooled[by * kPoolGrid + bx] = sum / (static_cast<double>(y1 - y0) * (x1 - x0));
    }
  }
  FeatureVector f;
  if (pooled.maxCoeff() == pooled.minCoeff()) {
    // A flat image carries no pattern; map it to exact zeros rather than
    // rounding noise scaled up by the 1e-6 guard.
    f.values = Eigen::VectorXd::Zero(pooled.size());
    return f;
  }
  const double mean = pooled.mean();
  const double var = (pooled.array() - mean).square().mean();
  const double std = std::sqrt(var);
  f.values = (pooled.array() - mean) / (std + 1e-6);
  return f;
}

std::string scorer_to_string(ScorerId id) {
  switch (id) {
    case ScorerId::kConfidence: return "confidence";
    case ScorerId::kKnn: return "knn";
    case ScorerId::kReact: return "react";
    case ScorerId::kAsh: return "ash";
    case ScorerId::kVim: return "vim";
  }
  throw InternalError("unknown scorer id");
}

ScorerId scorer_from_string(const std::string& s) {
  for (ScorerId id : all_scorers())
    if (scorer_to_string(id) == s) return id;
  throw ConfigError("unknown scorer: " + s);
}

const std::vector<ScorerId>& all_scorers() {
  static const std::vector<ScorerId> ids = {ScorerId::kConfidence, ScorerId::kKnn, ScorerId::kReact,
                                            ScorerId::kAsh, ScorerId::kVim};
  return ids;
}

Eigen::VectorXd ClassifierModel::logits(const FeatureVector& f) const {
  return logits_of(*this, f.values);
}

int ClassifierModel::predict(const FeatureVector& f) const {
  const Eigen::VectorXd z = logits(f);
  int best = 0;
  for (int c = 1; c < z.size(); ++c)
    if (z[c] > z[best]) best = c;
  return best;
}

double logsumexp(const Eigen::VectorXd& values) {
  const double m = values.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((values.array() - m).exp().sum());
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const double m = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - m).exp();
  return e / e.sum();
}

double logreg_loss(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                   const Eigen::MatrixXd& features, const std::vector<int>& labels, double l2) {
  const Eigen::Index n = features.rows();
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd z = weights * features.row(i).transpose() + bias;
    total += logsumexp(z) - z[labels[static_cast<std::size_t>(i)]];
  }
  return total / static_cast<double>(n) + 0.5 * l2 * weights.squaredNorm();
}

void logreg_gradient(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                     const Eigen::MatrixXd& features, const std::vector<int>& labels, double l2,
                     Eigen::MatrixXd& grad_weights, Eigen::VectorXd& grad_bias) {
  const Eigen::Index n = features.rows();
  grad_weights = Eigen::MatrixXd::Zero(weights.rows(), weights.cols());
  grad_bias = Eigen::VectorXd::Zero(bias.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd z = weights * features.row(i).transpose() + bias;
    Eigen::VectorXd p = softmax(z);
    p[labels[static_cast<std::size_t>(i)]] -= 1.0;
    grad_weights += p * features.row(i);
    grad_bias += p;
  }
  grad_weights /= static_cast<double>(n);
  grad_bias /= static_cast<double>(n);
  grad_weights += l2 * weights;
}

ClassifierModel train_on_features(const Eigen::MatrixXd& features, const std::vector<int>& labels,
                                  int num_classes, const TrainHyper& hyper, std::uint64_t seed,
                                  std::vector<double>* loss_history) {
  const Eigen::Index n = features.rows();
  const Eigen::Index dim = features.cols();
  if (n == 0) throw std::invalid_argument("train: empty feature set");
  if (labels.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("train: label count mismatch");
  }
  std::vector<int> counts(static_cast<std::size_t>(num_classes), 0);
  for (int y : labels) {
    if (y < 0 || y >= num_classes) throw std::invalid_argument("train: label out of range");
    ++counts[static_cast<std::size_t>(y)];
  }
  for (int c = 0; c < num_classes; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0) {
      throw std::invalid_argument("train: class " + std::to_string(c) + " has no samples");
    }
  }

  ClassifierModel model;
  Rng init_rng(derive_seed(seed, {tag(SeedPurpose::kTrainInit)}));
  model.weights = Eigen::MatrixXd(num_classes, dim);
  for (Eigen::Index r = 0; r < model.weights.rows(); ++r)
    for (Eigen::Index c = 0; c < model.weights.cols(); ++c)
      model.weights(r, c) = 0.01 * init_rng.next_gaussian();
  model.bias = Eigen::VectorXd::Zero(num_classes);

  Eigen::MatrixXd gw;
  Eigen::VectorXd gb;
  for (int step = 0; step < hyper.steps; ++step) {
    if (loss_history != nullptr) {
      loss_history->push_back(logreg_loss(model.weights, model.bias, features, labels, hyper.l2));
    }
    logreg_gradient(model.weights, model.bias, features, labels, hyper.l2, gw, gb);
    model.weights -= hyper.learning_rate * gw;
    model.bias -= hyper.learning_rate * gb;
  }

  model.feature_bank = features;
  model.bank_labels = labels;
  // Tiny training sets cannot support the default neighbour count.
  model.knn_k = std::min(model.knn_k, static_cast<int>(n));

  std::vector<double> activations;
  activations.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(dim));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) activations.push_back(features(i, j));
  model.react_threshold = percentile(std::move(activations), 90.0);

  // Principal subspace of the uncentered second moment; top D/2 directions.
  const int vim_dim = static_cast<int>(dim) / 2;
  const Eigen::MatrixXd second_moment =
      features.transpose() * features / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(second_moment);
  model.vim_basis = Eigen::MatrixXd(dim, vim_dim);
  for (int j = 0; j < vim_dim; ++j) {
    // SelfAdjointEigenSolver sorts ascending; take the largest first.
    model.vim_basis.col(j) = eig.eigenvectors().col(dim - 1 - j);
  }

  double mean_max_logit = 0.0;
  double mean_residual = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd f = features.row(i).transpose();
    mean_max_logit += (model.weights * f + model.bias).maxCoeff();
    mean_residual += (f - model.vim_basis * (model.vim_basis.transpose() * f)).norm();
  }
  mean_max_logit /= static_cast<double>(n);
  mean_residual /= static_cast<double>(n);
  model.vim_alpha = mean_residual < 1e-12 ? 0.0 : mean_max_logit / mean_residual;
  return model;
}

ClassifierModel train(const std::vector<Scene>& scenes, const std::vector<LightCondition>& lights,
                      const ParamGrid& grid, const ExposureConstants& constants,
                      const TrainHyper& hyper, std::uint64_t seed,
                      std::vector<double>* loss_history) {
  if (scenes.empty() || lights.empty()) throw std::invalid_argument("train: empty inputs");
  int num_classes = 0;
  for (const Scene& s : scenes) num_classes = std::max(num_classes, s.class_id + 1);

  const Eigen::Index n =
      static_cast<Eigen::Index>(scenes.size()) * static_cast<Eigen::Index>(lights.size());
  Eigen::MatrixXd features(n, kPoolGrid * kPoolGrid);
  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(n));
  Eigen::Index row = 0;
  for (const Scene& scene : scenes) {
    for (const LightCondition& light : lights) {
      const SensorParams best = auto_expose(scene, light, grid, constants).front();
      const std::uint64_t noise_seed =
          derive_seed(seed, {tag(SeedPurpose::kTrainCapture), fnv1a64(scene.scene_id),
                             fnv1a64(light.id), static_cast<std::uint64_t>(grid.index_of(best))});
      const CapturedImage capture = render(scene, light, best, constants, noise_seed);
      features.row(row++) = extract_features(capture).values.transpose();
      labels.push_back(scene.class_id);
    }
  }
  return train_on_features(features, labels, num_classes, hyper, seed, loss_history);
}

QualityScore confidence(const ClassifierModel& model, const FeatureVector& f) {
  return {softmax(model.logits(f)).maxCoeff(), ScorerId::kConfidence};
}

QualityScore score_knn(const ClassifierModel& model, const FeatureVector& f, int k) {
  const Eigen::Index n = model.feature_bank.rows();
  if (n == 0) throw std::invalid_argument("score_knn: empty feature bank");
  if (k < 1 || k > n) throw std::invalid_argument("score_knn: k out of range");
  auto normalized = [](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    const double norm = v.norm();
    return norm < 1e-12 ? v : Eigen::VectorXd(v / norm);
  };
  const Eigen::VectorXd q = normalized(f.values);
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    dists.push_back((normalized(model.feature_bank.row(i).transpose()) - q).norm());
  }
  std::nth_element(dists.begin(), dists.begin() + (k - 1), dists.end());
  return {-dists[static_cast<std::size_t>(k - 1)], ScorerId::kKnn};
}

QualityScore score_react(const ClassifierModel& model, const FeatureVector& f) {
  const Eigen::VectorXd clipped = f.values.array().min(model.react_threshold);
  return {logsumexp(logits_of(model, clipped)), ScorerId::kReact};
}

QualityScore score_ash(const ClassifierModel& model, const FeatureVector& f,
                       double keep_fraction) {
  const Eigen::Index dim = f.values.size();
  const auto keep = static_cast<Eigen::Index>(
      std::ceil(keep_fraction * static_cast<double>(dim)));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(dim));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(f.values[a]) > std::abs(f.values[b]);
  });
  const double before = f.values.array().abs().sum();
  Eigen::VectorXd pruned = Eigen::VectorXd::Zero(dim);
  double after = 0.0;
  for (Eigen::Index i = 0; i < keep && i < dim; ++i) {
    pruned[order[static_cast<std::size_t>(i)]] = f.values[order[static_cast<std::size_t>(i)]];
    after += std::abs(f.values[order[static_cast<std::size_t>(i)]]);
  }
  if (after > 1e-12) pruned *= before / after;
  return {logsumexp(logits_of(model, pruned)), ScorerId::kAsh};
}

QualityScore score_vim(const ClassifierModel& model, const FeatureVector& f) {
  if (model.vim_basis.size() == 0) throw std::invalid_argument("score_vim: subspace not fitted");
  const Eigen::VectorXd proj = model.vim_basis * (model.vim_basis.transpose() * f.values);
  const double residual = (f.values - proj).norm();
  const double virtual_logit = model.vim_alpha * residual;
  const Eigen::VectorXd z = model.logits(f);
  Eigen::VectorXd extended(z.size() + 1);
  extended.head(z.size()) = z;
  extended[z.size()] = virtual_logit;
  // log(1 - p_virtual) == lse(logits) - lse(logits ++ virtual).
  return {logsumexp(z) - logsumexp(extended), ScorerId::kVim};
}

QualityScore score_with(ScorerId id, const ClassifierModel& model, const FeatureVector& f) {
  switch (id) {
    case ScorerId::kConfidence: return confidence(model, f);
    case ScorerId::kKnn: return score_knn(model, f, model.knn_k);
    case ScorerId::kReact: return score_react(model, f);
    case ScorerId::kAsh: return score_ash(model, f);
    case ScorerId::kVim: return score_vim(model, f);
  }
  throw InternalError("unknown scorer id");
}

void ClassifierModel::save(const std::string& path) const {
  nlohmann::ordered_json doc;
  doc["format"] = "lens-classifier";
  doc["version"] = 1;
  doc["classes"] = num_classes();
  doc["dim"] = dim();
  doc["knn_k"] = knn_k;
  doc["react_threshold"] = react_threshold;
  doc["vim_alpha"] = vim_alpha;
  doc["vim_dim"] = static_cast<int>(vim_basis.cols());
  doc["bank_rows"] = static_cast<int>(feature_bank.rows());
  doc["bank_labels"] = bank_labels;
  doc["blobs"]["weights"] = encode_matrix_rowmajor(weights);
  doc["blobs"]["bias"] = encode_doubles(bias.data(), static_cast<std::size_t>(bias.size()));
  doc["blobs"]["feature_bank"] = encode_matrix_rowmajor(feature_bank);
  doc["blobs"]["vim_basis"] = encode_matrix_rowmajor(vim_basis);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open model checkpoint for writing: " + path);
  out << doc.dump(2) << "\n";
  if (!out) throw DataError("failed writing model checkpoint: " + path);
}

ClassifierModel load_model_checkpoint(const nlohmann::json& doc) {
  if (doc.value("format", "") != std::string("lens-classifier")) {
    throw DataError("model checkpoint: unknown format tag");
  }
  if (doc.value("version", 0) != 1) throw DataError("model checkpoint: unsupported version");
  const auto classes = doc.at("classes").get<Eigen::Index>();
  const auto dim = doc.at("dim").get<Eigen::Index>();
  const auto vim_dim = doc.at("vim_dim").get<Eigen::Index>();
  const auto bank_rows = doc.at("bank_rows").get<Eigen::Index>();
  if (classes < 2 || dim < 1 || vim_dim < 0 || bank_rows < 0) {
    throw DataError("model checkpoint: invalid dimensions");
  }
  ClassifierModel model;
  model.knn_k = doc.at("knn_k").get<int>();
  model.react_threshold = doc.at("react_threshold").get<double>();
  model.vim_alpha = doc.at("vim_alpha").get<double>();
  model.bank_labels = doc.at("bank_labels").get<std::vector<int>>();
  if (model.bank_labels.size() != static_cast<std::size_t>(bank_rows)) {
    throw DataError("model checkpoint: bank label count mismatch");
  }
  const auto& blobs = doc.at("blobs");
  model.weights = decode_matrix_rowmajor(blobs.at("weights").get<std::string>(), classes, dim);
  const std::vector<double> bias =
      decode_doubles(blobs.at("bias").get<std::string>(), static_cast<std::size_t>(classes));
  model.bias = Eigen::Map<const Eigen::VectorXd>(bias.data(), classes);
  model.feature_bank =
      decode_matrix_rowmajor(blobs.at("feature_bank").get<std::string>(), bank_rows, dim);
  model.vim_basis = decode_matrix_rowmajor(blobs.at("vim_basis").get<std::string>(), dim, vim_dim);
  if (!model.weights.allFinite() || !model.bias.allFinite() || !model.feature_bank.allFinite() ||
      !model.vim_basis.allFinite()) {
    throw DataError("model checkpoint: non-finite parameters");
  }
  return model;
}

ClassifierModel ClassifierModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model checkpoint: " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("model checkpoint: ") + e.what());
  }
  try {
    return load_model_checkpoint(doc);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model checkpoint: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("model checkpoint: ") + e.what());
  }
}

}  // namespace lens
