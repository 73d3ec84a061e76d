#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "lens/param_space.hpp"
#include "lens/scene_sim.hpp"

namespace lens {

// 8x8 block-mean pooled, per-image standardized descriptor (D = 64 for the
// default 32x32 captures).
struct FeatureVector {
  Eigen::VectorXd values;
};

// Pools HxW into 8x8 block means, then standardizes to zero mean / unit
// variance with a 1e-6 guard; a constant image maps to the all-zero vector.
FeatureVector extract_features(const CapturedImage& image);

enum class ScorerId { kConfidence, kKnn, kReact, kAsh, kVim };

std::string scorer_to_string(ScorerId id);
ScorerId scorer_from_string(const std::string& s);
const std::vector<ScorerId>& all_scorers();

struct QualityScore {
  double value = 0.0;
  ScorerId scorer = ScorerId::kConfidence;
};

struct TrainHyper {
  int steps = 500;
  double learning_rate = 0.1;
  double l2 = 1e-4;
};

// Linear-softmax classifier plus the statistics the OOD scorers need: the
// training feature bank (KNN), an activation-clipping threshold (ReAct) and
// a principal subspace with scaling (ViM).
struct ClassifierModel {
  Eigen::MatrixXd weights;  // C x D
  Eigen::VectorXd bias;     // C
  Eigen::MatrixXd feature_bank;  // n x D, training features
  std::vector<int> bank_labels;
  double react_threshold = 0.0;  // 90th percentile of training activations
  Eigen::MatrixXd vim_basis;     // D x d orthonormal principal basis
  double vim_alpha = 0.0;
  int knn_k = 10;

  int num_classes() const { return static_cast<int>(weights.rows()); }
  int dim() const { return static_cast<int>(weights.cols()); }

  Eigen::VectorXd logits(const FeatureVector& f) const;
  // argmax logit; ties go to the lower class index.
  int predict(const FeatureVector& f) const;

  void save(const std::string& path) const;
  static ClassifierModel load(const std::string& path);
};

// Cross-entropy with 0.5 * l2 * ||W||^2; mean over the batch.
double logreg_loss(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                   const Eigen::MatrixXd& features, const std::vector<int>& labels, double l2);
void logreg_gradient(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                     const Eigen::MatrixXd& features, const std::vector<int>& labels, double l2,
                     Eigen::MatrixXd& grad_weights, Eigen::VectorXd& grad_bias);

// Full-batch gradient descent on pre-extracted features; fills in the bank,
// the ReAct threshold and the ViM subspace. Fails if any class in [0, C) has
// no samples.
ClassifierModel train_on_features(const Eigen::MatrixXd& features, const std::vector<int>& labels,
                                  int num_classes, const TrainHyper& hyper, std::uint64_t seed,
                                  std::vector<double>* loss_history = nullptr);

// Source-domain training session: renders the AE top-1 capture for every
// (scene, light) pair — with noise streams derived from `seed` — and fits
// the model on those captures.
ClassifierModel train(const std::vector<Scene>& scenes, const std::vector<LightCondition>& lights,
                      const ParamGrid& grid, const ExposureConstants& constants,
                      const TrainHyper& hyper, std::uint64_t seed,
                      std::vector<double>* loss_history = nullptr);

// Quality estimators. All are deterministic functions of (model, features).
QualityScore confidence(const ClassifierModel& model, const FeatureVector& f);
QualityScore score_knn(const ClassifierModel& model, const FeatureVector& f, int k = 10);
QualityScore score_react(const ClassifierModel& model, const FeatureVector& f);
QualityScore score_ash(const ClassifierModel& model, const FeatureVector& f,
                       double keep_fraction = 0.10);
QualityScore score_vim(const ClassifierModel& model, const FeatureVector& f);

QualityScore score_with(ScorerId id, const ClassifierModel& model, const FeatureVector& f);

Eigen::VectorXd softmax(const Eigen::VectorXd& logits);
double logsumexp(const Eigen::VectorXd& values);

}  // namespace lens
