#include "dreb/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "dreb/losses.hpp"

namespace dreb {

using nlohmann::json;

namespace {
constexpr const char* kUnk = "<unk>";
}

void RelationClassifier::Grads::accumulate_zero(const RelationClassifier& m) {
  token_emb.assign(m.token_emb_.size(), 0.0);
  type_emb.assign(m.type_emb_.size(), 0.0);
  w1.assign(m.w1_.size(), 0.0);
  b1.assign(m.b1_.size(), 0.0);
  w2.assign(m.w2_.size(), 0.0);
  b2.assign(m.b2_.size(), 0.0);
}

RelationClassifier RelationClassifier::init(const Dataset& train,
                                            const ClassifierConfig& cfg) {
  train.validate();
  RelationClassifier m;
  m.cfg_ = cfg;
  m.schema_ = train.schema;

  m.vocab_ = {kUnk};
  m.type_vocab_ = {kUnk};
  auto add_token = [&](const std::string& t) {
    if (m.vocab_index_.emplace(t, m.vocab_.size()).second) m.vocab_.push_back(t);
  };
  auto add_type = [&](const std::string& t) {
    if (m.type_index_.emplace(t, m.type_vocab_.size()).second) m.type_vocab_.push_back(t);
  };
  m.vocab_index_[kUnk] = 0;
  m.type_index_[kUnk] = 0;

  std::set<std::string> types;
  for (const auto& s : train.samples) {
    for (const auto& t : s.tokens) add_token(t);
    types.insert(s.subj_type);
    types.insert(s.obj_type);
  }
  // Tokens the context-only and entity-only views can introduce.
  for (const auto& t : types) {
    add_type(t);
    add_token(t);
    add_token(context_placeholder(t));
  }

  const std::size_t e = cfg.embed_dim;
  const std::size_t h = cfg.hidden_dim;
  const std::size_t L = m.schema_.labels.size();
  Rng rng(cfg.init_seed);
  auto init_vec = [&](std::vector<double>& v, std::size_t n, double scale) {
    v.resize(n);
    for (double& x : v) x = scale * rng.normal();
  };
  init_vec(m.token_emb_, m.vocab_.size() * e, 0.1);
  init_vec(m.type_emb_, m.type_vocab_.size() * e, 0.1);
  init_vec(m.w1_, h * 5 * e, std::sqrt(1.0 / static_cast<double>(5 * e)));
  m.b1_.assign(h, 0.0);
  init_vec(m.w2_, L * h, std::sqrt(1.0 / static_cast<double>(h)));
  m.b2_.assign(L, 0.0);
  return m;
}

std::size_t RelationClassifier::token_id(const std::string& tok) const {
  auto it = vocab_index_.find(tok);
  return it == vocab_index_.end() ? 0 : it->second;
}

std::size_t RelationClassifier::type_id(const std::string& type) const {
  auto it = type_index_.find(type);
  return it == type_index_.end() ? 0 : it->second;
}

RelationClassifier::Forward RelationClassifier::forward(const ViewEncoding& enc,
                                                        bool stochastic,
                                                        Rng* rng) const {
  const std::size_t e = cfg_.embed_dim;
  const std::size_t h = cfg_.hidden_dim;
  const std::size_t L = schema_.labels.size();

  Forward f;
  f.token_ids.reserve(enc.tokens.size());
  for (const auto& t : enc.tokens) f.token_ids.push_back(token_id(t));
  for (std::size_t i = enc.subj.start; i < enc.subj.end; ++i) {
    f.subj_ids.push_back(f.token_ids[i]);
  }
  for (std::size_t i = enc.obj.start; i < enc.obj.end; ++i) {
    f.obj_ids.push_back(f.token_ids[i]);
  }
  f.subj_type_id = type_id(enc.subj_type);
  f.obj_type_id = type_id(enc.obj_type);

  f.features.assign(5 * e, 0.0);
  auto mean_into = [&](const std::vector<std::size_t>& ids, std::size_t offset) {
    if (ids.empty()) return;
    const double inv = 1.0 / static_cast<double>(ids.size());
    for (std::size_t id : ids) {
      const double* row = &token_emb_[id * e];
      for (std::size_t k = 0; k < e; ++k) f.features[offset + k] += row[k] * inv;
    }
  };
  mean_into(f.token_ids, 0);
  mean_into(f.subj_ids, e);
  mean_into(f.obj_ids, 2 * e);
  for (std::size_t k = 0; k < e; ++k) {
    f.features[3 * e + k] = type_emb_[f.subj_type_id * e + k];
    f.features[4 * e + k] = type_emb_[f.obj_type_id * e + k];
  }

  f.hidden.resize(h);
  const std::size_t feat_dim = 5 * e;
  for (std::size_t i = 0; i < h; ++i) {
    double z = b1_[i];
    const double* w = &w1_[i * feat_dim];
    for (std::size_t k = 0; k < feat_dim; ++k) z += w[k] * f.features[k];
    f.hidden[i] = std::tanh(z);
  }

  if (stochastic && cfg_.dropout > 0.0) {
    if (rng == nullptr) {
      throw ConfigError("stochastic forward pass needs a generator");
    }
    const double keep = 1.0 - cfg_.dropout;
    f.dropout_mask.resize(h);
    for (std::size_t i = 0; i < h; ++i) {
      f.dropout_mask[i] = rng->uniform() < keep ? 1.0 / keep : 0.0;
      f.hidden[i] *= f.dropout_mask[i];
    }
  }

  f.logits.resize(L);
  for (std::size_t l = 0; l < L; ++l) {
    double z = b2_[l];
    const double* w = &w2_[l * h];
    for (std::size_t i = 0; i < h; ++i) z += w[i] * f.hidden[i];
    f.logits[l] = z;
  }
  f.probs = softmax(f.logits);
  return f;
}

void RelationClassifier::backward(const Forward& fwd,
                                  std::span<const double> dloss_dlogits,
                                  Grads& grads) const {
  const std::size_t e = cfg_.embed_dim;
  const std::size_t h = cfg_.hidden_dim;
  const std::size_t L = schema_.labels.size();
  const std::size_t feat_dim = 5 * e;

  std::vector<double> dhidden(h, 0.0);
  for (std::size_t l = 0; l < L; ++l) {
    const double dz = dloss_dlogits[l];
    grads.b2[l] += dz;
    const double* w = &w2_[l * h];
    double* gw = &grads.w2[l * h];
    for (std::size_t i = 0; i < h; ++i) {
      gw[i] += dz * fwd.hidden[i];
      dhidden[i] += dz * w[i];
    }
  }

  std::vector<double> dfeat(feat_dim, 0.0);
  for (std::size_t i = 0; i < h; ++i) {
    double dh = dhidden[i];
    double a = fwd.hidden[i];
    if (!fwd.dropout_mask.empty()) {
      dh *= fwd.dropout_mask[i];
      // hidden was stored post-dropout; recover the tanh output.
      a = fwd.dropout_mask[i] > 0.0 ? fwd.hidden[i] / fwd.dropout_mask[i] : 0.0;
    }
    const double dz = dh * (1.0 - a * a);
    grads.b1[i] += dz;
    const double* w = &w1_[i * feat_dim];
    double* gw = &grads.w1[i * feat_dim];
    for (std::size_t k = 0; k < feat_dim; ++k) {
      gw[k] += dz * fwd.features[k];
      dfeat[k] += dz * w[k];
    }
  }

  auto scatter_mean = [&](const std::vector<std::size_t>& ids, std::size_t offset) {
    if (ids.empty()) return;
    const double inv = 1.0 / static_cast<double>(ids.size());
    for (std::size_t id : ids) {
      double* g = &grads.token_emb[id * e];
      for (std::size_t k = 0; k < e; ++k) g[k] += dfeat[offset + k] * inv;
    }
  };
  scatter_mean(fwd.token_ids, 0);
  scatter_mean(fwd.subj_ids, e);
  scatter_mean(fwd.obj_ids, 2 * e);
  for (std::size_t k = 0; k < e; ++k) {
    grads.type_emb[fwd.subj_type_id * e + k] += dfeat[3 * e + k];
    grads.type_emb[fwd.obj_type_id * e + k] += dfeat[4 * e + k];
  }
}

void RelationClassifier::apply_sgd(const Grads& grads, double lr,
                                   std::size_t batch_size) {
  const double scale = lr / static_cast<double>(batch_size);
  auto apply = [scale](std::vector<double>& w, const std::vector<double>& g) {
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= scale * g[i];
  };
  apply(token_emb_, grads.token_emb);
  apply(type_emb_, grads.type_emb);
  apply(w1_, grads.w1);
  apply(b1_, grads.b1);
  apply(w2_, grads.w2);
  apply(b2_, grads.b2);
}

RelationClassifier::Forward RelationClassifier::forward_view(const Sample& s,
                                                             InputView view) const {
  return forward(render_encoding(s, view));
}

std::vector<double> RelationClassifier::predict_probs(const Sample& s,
                                                      InputView view) const {
  return forward_view(s, view).probs;
}

std::size_t RelationClassifier::predict_index(const Sample& s) const {
  const std::vector<double> p = predict_probs(s, InputView::Full);
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

std::string RelationClassifier::predict_label(const Sample& s) const {
  return schema_.labels[predict_index(s)];
}

std::vector<double> RelationClassifier::embed_tokens(const TokenList& tokens) const {
  const std::size_t e = cfg_.embed_dim;
  std::vector<double> out(e, 0.0);
  if (tokens.empty()) return out;
  const double inv = 1.0 / static_cast<double>(tokens.size());
  for (const auto& t : tokens) {
    const double* row = &token_emb_[token_id(t) * e];
    for (std::size_t k = 0; k < e; ++k) out[k] += row[k] * inv;
  }
  return out;
}

void RelationClassifier::save(const std::filesystem::path& path) const {
  json doc;
  doc["format"] = "dreb-relation-classifier";
  doc["version"] = 1;
  doc["embed_dim"] = cfg_.embed_dim;
  doc["hidden_dim"] = cfg_.hidden_dim;
  doc["dropout"] = cfg_.dropout;
  doc["init_seed"] = cfg_.init_seed;
  doc["labels"] = schema_.labels;
  doc["negative_label"] = schema_.negative_label;
  doc["vocab"] = vocab_;
  doc["type_vocab"] = type_vocab_;
  doc["token_emb"] = token_emb_;
  doc["type_emb"] = type_emb_;
  doc["w1"] = w1_;
  doc["b1"] = b1_;
  doc["w2"] = w2_;
  doc["b2"] = b2_;
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot open '" + path.string() + "' for writing");
  }
  out << doc.dump() << "\n";
}

RelationClassifier RelationClassifier::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open '" + path.string() + "' for reading");
  }
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || doc.value("format", "") != "dreb-relation-classifier") {
    throw ParseError("'" + path.string() + "' is not a relation classifier file");
  }
  RelationClassifier m;
  m.cfg_.embed_dim = doc.at("embed_dim").get<std::size_t>();
  m.cfg_.hidden_dim = doc.at("hidden_dim").get<std::size_t>();
  m.cfg_.dropout = doc.at("dropout").get<double>();
  m.cfg_.init_seed = doc.at("init_seed").get<std::uint64_t>();
  m.schema_.labels = doc.at("labels").get<std::vector<std::string>>();
  m.schema_.negative_label = doc.at("negative_label").get<std::string>();
  m.vocab_ = doc.at("vocab").get<std::vector<std::string>>();
  m.type_vocab_ = doc.at("type_vocab").get<std::vector<std::string>>();
  m.token_emb_ = doc.at("token_emb").get<std::vector<double>>();
  m.type_emb_ = doc.at("type_emb").get<std::vector<double>>();
  m.w1_ = doc.at("w1").get<std::vector<double>>();
  m.b1_ = doc.at("b1").get<std::vector<double>>();
  m.w2_ = doc.at("w2").get<std::vector<double>>();
  m.b2_ = doc.at("b2").get<std::vector<double>>();
  for (std::size_t i = 0; i < m.vocab_.size(); ++i) m.vocab_index_[m.vocab_[i]] = i;
  for (std::size_t i = 0; i < m.type_vocab_.size(); ++i) m.type_index_[m.type_vocab_[i]] = i;
  return m;
}

}  // namespace dreb
