#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dreb/types.hpp"

namespace dreb {

using Probs = std::span<const double>;

// All hyperparameters of the debiasing losses. Ranges follow the sweep
// grids: lambda in [-0.6, 0.6], beta in [0, 1].
struct DebiasConfig {
  double lambda = 0.2;
  double beta = 0.5;
  double focal_gamma = 2.0;
  double rdrop_weight = 1.0;
  double core_strength = 0.0;
  double epsilon = 1e-12;
  // Clamp bias-distribution entries to [0, 1] so the loss weight stays a
  // proper focal coefficient; disable for raw-formula ablations.
  bool clamp_bias = true;

  void validate() const;
};

// Checks a probability vector: entries >= 0, sum within 1e-6 of 1.
void check_distribution(Probs p);

std::vector<double> softmax(std::span<const double> logits);

double cross_entropy(Probs p, std::size_t j, double eps = 1e-12);

// ---------------------------------------------------------------------------
// Losses. Each has an analytic gradient with respect to every input entry;
// the gradients differentiate the exact expression evaluated, including the
// epsilon stabilizers and clamping.
// ---------------------------------------------------------------------------

double kl_divergence(Probs p, Probs q, double eps = 1e-12);

// Symmetrized data-augmentation consistency term:
// (D_KL(p||q) + D_KL(q||p)) / 2.
double rda_loss(Probs p, Probs q, double eps = 1e-12);

struct PairGrad {
  std::vector<double> first;
  std::vector<double> second;
};

PairGrad rda_grad(Probs p, Probs q, double eps = 1e-12);

// p - lambda * p_context, entrywise; clamped to [0, 1] unless disabled.
std::vector<double> bias_distribution(Probs p, Probs p_context, double lambda,
                                      bool clamp = true);

// -(1 - bias_j) * log p_j with bias from bias_distribution. Degenerates to
// the gamma=1 focal loss at lambda=0.
double cda_loss(Probs p, Probs p_context, double lambda, std::size_t j,
                double eps = 1e-12, bool clamp = true);

struct CdaGrad {
  std::vector<double> p;
  std::vector<double> context;
};

CdaGrad cda_grad(Probs p, Probs p_context, double lambda, std::size_t j,
                 double eps = 1e-12, bool clamp = true);

// cda + beta * rda(p, p_aug).
double mixdebias_loss(Probs p, Probs p_aug, Probs p_context, std::size_t j,
                      const DebiasConfig& cfg);

struct MixDebiasGrad {
  std::vector<double> p;
  std::vector<double> aug;
  std::vector<double> context;
};

MixDebiasGrad mixdebias_grad(Probs p, Probs p_aug, Probs p_context, std::size_t j,
                             const DebiasConfig& cfg);

// -(1 - p_j)^gamma * log p_j.
double focal_loss(Probs p, std::size_t j, double gamma, double eps = 1e-12);
std::vector<double> focal_grad(Probs p, std::size_t j, double gamma,
                               double eps = 1e-12);

// -(1 - b_j)^gamma * log p_j with b from a frozen bias-only model.
double dfl_loss(Probs p, Probs p_biasonly, std::size_t j, double gamma,
                double eps = 1e-12);
PairGrad dfl_grad(Probs p, Probs p_biasonly, std::size_t j, double gamma,
                  double eps = 1e-12);

// Cross-entropy of the renormalized expert product softmax(log p + log b).
double poe_loss(Probs p, Probs p_biasonly, std::size_t j, double eps = 1e-12);
PairGrad poe_grad(Probs p, Probs p_biasonly, std::size_t j, double eps = 1e-12);

// Mean cross-entropy of two stochastic passes plus weighted symmetric KL
// between them.
double rdrop_loss(Probs p1, Probs p2, std::size_t j, double weight,
                  double eps = 1e-12);
PairGrad rdrop_grad(Probs p1, Probs p2, std::size_t j, double weight,
                    double eps = 1e-12);

// Inference-time counterfactual adjustment:
// softmax(logits - strength * entity_only_logits).
std::vector<double> core_adjust(std::span<const double> logits,
                                std::span<const double> entity_only_logits,
                                double strength);

}  // namespace dreb
