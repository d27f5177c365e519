#include "dreb/losses.hpp"

#include <algorithm>
#include <cmath>

namespace dreb {

namespace {

void check_same_size(Probs a, Probs b, const char* what) {
  if (a.size() != b.size()) {
    throw ValidationError(std::string("distribution size mismatch in ") + what);
  }
}

void check_index(Probs p, std::size_t j) {
  if (j >= p.size()) {
    throw ValidationError("gold label index out of range");
  }
}

// pow with the small integer exponents on their exact fast paths, so the
// degeneration identities (gamma = 0 / 1 / 2) hold to machine precision.
double pow_weight(double x, double gamma) {
  if (gamma == 0.0) return 1.0;
  if (gamma == 1.0) return x;
  if (gamma == 2.0) return x * x;
  return std::pow(x, gamma);
}

// d/dx x^gamma, guarded for gamma = 0.
double pow_weight_deriv(double x, double gamma) {
  if (gamma == 0.0) return 0.0;
  if (gamma == 1.0) return 1.0;
  if (gamma == 2.0) return 2.0 * x;
  return gamma * std::pow(x, gamma - 1.0);
}

}  // namespace

void DebiasConfig::validate() const {
  if (lambda < -0.6 || lambda > 0.6) {
    throw ConfigError("lambda must lie in [-0.6, 0.6]");
  }
  if (beta < 0.0 || beta > 1.0) {
    throw ConfigError("beta must lie in [0, 1]");
  }
  if (focal_gamma < 0.0) {
    throw ConfigError("focal_gamma must be >= 0");
  }
  if (rdrop_weight < 0.0) {
    throw ConfigError("rdrop_weight must be >= 0");
  }
  if (epsilon <= 0.0) {
    throw ConfigError("epsilon must be positive");
  }
}

void check_distribution(Probs p) {
  double sum = 0.0;
  for (double v : p) {
    if (v < 0.0) {
      throw ValidationError("probability entry is negative");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw ValidationError("probabilities sum to " + std::to_string(sum));
  }
}

std::vector<double> softmax(std::span<const double> logits) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double z : logits) mx = std::max(mx, z);
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

double cross_entropy(Probs p, std::size_t j, double eps) {
  check_index(p, j);
  return -std::log(p[j] + eps);
}

double kl_divergence(Probs p, Probs q, double eps) {
  check_same_size(p, q, "kl_divergence");
  double out = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    out += p[i] * (std::log(p[i] + eps) - std::log(q[i] + eps));
  }
  return out;
}

double rda_loss(Probs p, Probs q, double eps) {
  check_same_size(p, q, "rda_loss");
  return 0.5 * (kl_divergence(p, q, eps) + kl_divergence(q, p, eps));
}

PairGrad rda_grad(Probs p, Probs q, double eps) {
  check_same_size(p, q, "rda_grad");
  PairGrad g{std::vector<double>(p.size()), std::vector<double>(q.size())};
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double lp = std::log(p[i] + eps);
    const double lq = std::log(q[i] + eps);
    g.first[i] = 0.5 * ((lp - lq) + p[i] / (p[i] + eps) - q[i] / (p[i] + eps));
    g.second[i] = 0.5 * ((lq - lp) + q[i] / (q[i] + eps) - p[i] / (q[i] + eps));
  }
  return g;
}

std::vector<double> bias_distribution(Probs p, Probs p_context, double lambda,
                                      bool clamp) {
  check_same_size(p, p_context, "bias_distribution");
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    double v = p[i] - lambda * p_context[i];
    if (clamp) v = std::clamp(v, 0.0, 1.0);
    out[i] = v;
  }
  return out;
}

double cda_loss(Probs p, Probs p_context, double lambda, std::size_t j, double eps,
                bool clamp) {
  check_same_size(p, p_context, "cda_loss");
  check_index(p, j);
  double bias_j = p[j] - lambda * p_context[j];
  if (clamp) bias_j = std::clamp(bias_j, 0.0, 1.0);
  return -(1.0 - bias_j) * std::log(p[j] + eps);
}

CdaGrad cda_grad(Probs p, Probs p_context, double lambda, std::size_t j, double eps,
                 bool clamp) {
  check_same_size(p, p_context, "cda_grad");
  check_index(p, j);
  CdaGrad g{std::vector<double>(p.size(), 0.0), std::vector<double>(p.size(), 0.0)};
  const double raw = p[j] - lambda * p_context[j];
  const bool active = !clamp || (raw > 0.0 && raw < 1.0);
  const double bias_j = clamp ? std::clamp(raw, 0.0, 1.0) : raw;
  const double log_pj = std::log(p[j] + eps);
  // d/dp_j of -(1 - b_j) log(p_j + eps); b_j depends on p_j unless clamped
  // flat.
  g.p[j] = (active ? log_pj : 0.0) - (1.0 - bias_j) / (p[j] + eps);
  g.context[j] = active ? -lambda * log_pj : 0.0;
  return g;
}

double mixdebias_loss(Probs p, Probs p_aug, Probs p_context, std::size_t j,
                      const DebiasConfig& cfg) {
  return cda_loss(p, p_context, cfg.lambda, j, cfg.epsilon, cfg.clamp_bias) +
         cfg.beta * rda_loss(p, p_aug, cfg.epsilon);
}

MixDebiasGrad mixdebias_grad(Probs p, Probs p_aug, Probs p_context, std::size_t j,
                             const DebiasConfig& cfg) {
  CdaGrad cda = cda_grad(p, p_context, cfg.lambda, j, cfg.epsilon, cfg.clamp_bias);
  PairGrad rda = rda_grad(p, p_aug, cfg.epsilon);
  MixDebiasGrad g;
  g.p = std::move(cda.p);
  for (std::size_t i = 0; i < g.p.size(); ++i) {
    g.p[i] += cfg.beta * rda.first[i];
  }
  g.aug = std::move(rda.second);
  for (double& v : g.aug) v *= cfg.beta;
  g.context = std::move(cda.context);
  return g;
}

double focal_loss(Probs p, std::size_t j, double gamma, double eps) {
  check_index(p, j);
  return -pow_weight(1.0 - p[j], gamma) * std::log(p[j] + eps);
}

std::vector<double> focal_grad(Probs p, std::size_t j, double gamma, double eps) {
  check_index(p, j);
  std::vector<double> g(p.size(), 0.0);
  const double log_pj = std::log(p[j] + eps);
  g[j] = pow_weight_deriv(1.0 - p[j], gamma) * log_pj -
         pow_weight(1.0 - p[j], gamma) / (p[j] + eps);
  return g;
}

double dfl_loss(Probs p, Probs p_biasonly, std::size_t j, double gamma, double eps) {
  check_same_size(p, p_biasonly, "dfl_loss");
  check_index(p, j);
  return -pow_weight(1.0 - p_biasonly[j], gamma) * std::log(p[j] + eps);
}

PairGrad dfl_grad(Probs p, Probs p_biasonly, std::size_t j, double gamma,
                  double eps) {
  check_same_size(p, p_biasonly, "dfl_grad");
  check_index(p, j);
  PairGrad g{std::vector<double>(p.size(), 0.0), std::vector<double>(p.size(), 0.0)};
  g.first[j] = -pow_weight(1.0 - p_biasonly[j], gamma) / (p[j] + eps);
  g.second[j] = pow_weight_deriv(1.0 - p_biasonly[j], gamma) * std::log(p[j] + eps);
  return g;
}

double poe_loss(Probs p, Probs p_biasonly, std::size_t j, double eps) {
  check_same_size(p, p_biasonly, "poe_loss");
  check_index(p, j);
  // -s_j + logsumexp(s) with s_i = log(p_i + eps) + log(b_i + eps).
  std::vector<double> s(p.size());
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.size(); ++i) {
    s[i] = std::log(p[i] + eps) + std::log(p_biasonly[i] + eps);
    mx = std::max(mx, s[i]);
  }
  double lse = 0.0;
  for (double v : s) lse += std::exp(v - mx);
  lse = mx + std::log(lse);
  return lse - s[j];
}

PairGrad poe_grad(Probs p, Probs p_biasonly, std::size_t j, double eps) {
  check_same_size(p, p_biasonly, "poe_grad");
  check_index(p, j);
  std::vector<double> s(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    s[i] = std::log(p[i] + eps) + std::log(p_biasonly[i] + eps);
  }
  std::vector<double> q = softmax(s);
  PairGrad g{std::vector<double>(p.size()), std::vector<double>(p.size())};
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = q[i] - (i == j ? 1.0 : 0.0);
    g.first[i] = d / (p[i] + eps);
    g.second[i] = d / (p_biasonly[i] + eps);
  }
  return g;
}

double rdrop_loss(Probs p1, Probs p2, std::size_t j, double weight, double eps) {
  check_same_size(p1, p2, "rdrop_loss");
  check_index(p1, j);
  const double ce = 0.5 * (cross_entropy(p1, j, eps) + cross_entropy(p2, j, eps));
  if (weight == 0.0) return ce;
  return ce + weight * rda_loss(p1, p2, eps);
}

PairGrad rdrop_grad(Probs p1, Probs p2, std::size_t j, double weight, double eps) {
  check_same_size(p1, p2, "rdrop_grad");
  check_index(p1, j);
  PairGrad g{std::vector<double>(p1.size(), 0.0), std::vector<double>(p2.size(), 0.0)};
  g.first[j] = -0.5 / (p1[j] + eps);
  g.second[j] = -0.5 / (p2[j] + eps);
  if (weight != 0.0) {
    PairGrad kl = rda_grad(p1, p2, eps);
    for (std::size_t i = 0; i < p1.size(); ++i) {
      g.first[i] += weight * kl.first[i];
      g.second[i] += weight * kl.second[i];
    }
  }
  return g;
}

std::vector<double> core_adjust(std::span<const double> logits,
                                std::span<const double> entity_only_logits,
                                double strength) {
  if (logits.size() != entity_only_logits.size()) {
    throw ValidationError("logit size mismatch in core_adjust");
  }
  std::vector<double> adjusted(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    adjusted[i] = logits[i] - strength * entity_only_logits[i];
  }
  return softmax(adjusted);
}

}  // namespace dreb
