#include "dreb/bias_eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "dreb/losses.hpp"
#include "dreb/rng.hpp"

namespace dreb {

using nlohmann::json;

Dataset build_entity_bias_dataset(const Dataset& train) {
  Dataset out;
  out.schema = train.schema;
  out.split_name = train.split_name + "-entity-bias";
  out.samples.reserve(train.size());
  for (const auto& s : train.samples) {
    ViewEncoding enc = render_encoding(s, InputView::EntityOnly);
    Sample e;
    e.id = s.id;
    e.tokens = std::move(enc.tokens);
    e.subj_span = enc.subj;
    e.obj_span = enc.obj;
    e.subj_type = s.subj_type;
    e.obj_type = s.obj_type;
    e.relation = s.relation;
    out.samples.push_back(std::move(e));
  }
  return out;
}

namespace {

constexpr const char* kUnk = "<unk>";

struct VocabBuilder {
  std::vector<std::string> items{kUnk};
  std::unordered_map<std::string, std::size_t> index{{kUnk, 0}};

  void add(const std::string& s) {
    if (index.emplace(s, items.size()).second) {
      items.push_back(s);
    }
  }
};

}  // namespace

class BiasEvaluatorTrainer {
 public:
  static BiasEvaluator run(const Dataset& d_bias, const BiasEvalConfig& cfg) {
    d_bias.validate();
    std::set<std::string> present;
    for (const auto& s : d_bias.samples) present.insert(s.relation);
    if (present.size() < 2) {
      throw ValidationError(
          "bias evaluator needs at least two distinct labels, got " +
          std::to_string(present.size()));
    }

    BiasEvaluator ev;
    ev.schema_ = d_bias.schema;
    ev.embed_dim_ = cfg.embed_dim;

    VocabBuilder tokens;
    VocabBuilder types;
    for (const auto& s : d_bias.samples) {
      for (const auto& t : s.subj_surface()) tokens.add(t);
      for (const auto& t : s.obj_surface()) tokens.add(t);
      types.add(s.subj_type);
      types.add(s.obj_type);
    }
    ev.vocab_ = tokens.items;
    ev.type_vocab_ = types.items;
    ev.rebuild_index();

    const std::size_t e = cfg.embed_dim;
    const std::size_t n_labels = ev.schema_.labels.size();
    Rng rng(cfg.seed);
    auto init = [&](std::vector<double>& v, std::size_t n, double scale) {
      v.resize(n);
      for (double& x : v) x = scale * rng.normal();
    };
    init(ev.token_emb_, ev.vocab_.size() * e, 0.1);
    init(ev.type_emb_, ev.type_vocab_.size() * e, 0.1);
    ev.weight_.assign(n_labels * 3 * e, 0.0);
    ev.bias_.assign(n_labels, 0.0);

    // Fixed 90/10 split for the recorded held-out accuracy.
    std::vector<std::size_t> order(d_bias.size());
    std::iota(order.begin(), order.end(), 0);
    Rng split_rng(cfg.seed ^ 0x5eedULL);
    split_rng.shuffle(order);
    std::size_t heldout_n = static_cast<std::size_t>(
        std::floor(cfg.heldout_fraction * static_cast<double>(order.size())));
    heldout_n = std::min(heldout_n, order.size() > 1 ? order.size() - 1 : 0);
    std::vector<std::size_t> train_idx(order.begin(),
                                       order.end() - static_cast<std::ptrdiff_t>(heldout_n));
    std::vector<std::size_t> held_idx(order.end() - static_cast<std::ptrdiff_t>(heldout_n),
                                      order.end());

    std::vector<std::size_t> golds(d_bias.size());
    for (std::size_t i = 0; i < d_bias.size(); ++i) {
      golds[i] = ev.schema_.label_index(d_bias.samples[i].relation);
    }

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
      rng.shuffle(train_idx);
      for (std::size_t start = 0; start < train_idx.size(); start += cfg.batch_size) {
        const std::size_t stop = std::min(start + cfg.batch_size, train_idx.size());
        step(ev, d_bias, train_idx, start, stop, golds, cfg.lr);
      }
    }

    std::size_t correct = 0;
    for (std::size_t i : held_idx) {
      const std::vector<double> p = ev.label_probs(d_bias.samples[i]);
      const std::size_t pred =
          static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
      if (pred == golds[i]) ++correct;
    }
    ev.heldout_accuracy_ = held_idx.empty()
                               ? 0.0
                               : static_cast<double>(correct) /
                                     static_cast<double>(held_idx.size());
    return ev;
  }

 private:
  static void step(BiasEvaluator& ev, const Dataset& d,
                   const std::vector<std::size_t>& idx, std::size_t start,
                   std::size_t stop, const std::vector<std::size_t>& golds,
                   double lr) {
    const std::size_t e = ev.embed_dim_;
    const std::size_t n_labels = ev.schema_.labels.size();
    const std::size_t feat_dim = 3 * e;
    const double scale = lr / static_cast<double>(stop - start);

    std::vector<double> grad_w(ev.weight_.size(), 0.0);
    std::vector<double> grad_b(ev.bias_.size(), 0.0);
    std::vector<double> grad_tok(ev.token_emb_.size(), 0.0);
    std::vector<double> grad_type(ev.type_emb_.size(), 0.0);

    for (std::size_t pos = start; pos < stop; ++pos) {
      const Sample& s = d.samples[idx[pos]];
      const std::size_t gold = golds[idx[pos]];

      std::vector<std::size_t> surf_ids;
      for (const auto& t : s.subj_surface()) surf_ids.push_back(ev.token_id(t));
      for (const auto& t : s.obj_surface()) surf_ids.push_back(ev.token_id(t));
      const std::size_t ts = ev.type_id(s.subj_type);
      const std::size_t to = ev.type_id(s.obj_type);

      const std::vector<double> x = ev.features(s);
      std::vector<double> logits(n_labels);
      for (std::size_t l = 0; l < n_labels; ++l) {
        double z = ev.bias_[l];
        const double* w = &ev.weight_[l * feat_dim];
        for (std::size_t f = 0; f < feat_dim; ++f) z += w[f] * x[f];
        logits[l] = z;
      }
      const std::vector<double> p = softmax(logits);

      // dCE/dz = p - onehot; backprop into weights and both embedding tables.
      std::vector<double> dx(feat_dim, 0.0);
      for (std::size_t l = 0; l < n_labels; ++l) {
        const double dz = p[l] - (l == gold ? 1.0 : 0.0);
        grad_b[l] += dz;
        const double* w = &ev.weight_[l * feat_dim];
        double* gw = &grad_w[l * feat_dim];
        for (std::size_t f = 0; f < feat_dim; ++f) {
          gw[f] += dz * x[f];
          dx[f] += dz * w[f];
        }
      }
      const double inv_n = 1.0 / static_cast<double>(surf_ids.size());
      for (std::size_t id : surf_ids) {
        for (std::size_t f = 0; f < e; ++f) {
          grad_tok[id * e + f] += dx[f] * inv_n;
        }
      }
      for (std::size_t f = 0; f < e; ++f) {
        grad_type[ts * e + f] += dx[e + f];
        grad_type[to * e + f] += dx[2 * e + f];
      }
    }

    for (std::size_t i = 0; i < ev.weight_.size(); ++i) ev.weight_[i] -= scale * grad_w[i];
    for (std::size_t i = 0; i < ev.bias_.size(); ++i) ev.bias_[i] -= scale * grad_b[i];
    for (std::size_t i = 0; i < ev.token_emb_.size(); ++i) ev.token_emb_[i] -= scale * grad_tok[i];
    for (std::size_t i = 0; i < ev.type_emb_.size(); ++i) ev.type_emb_[i] -= scale * grad_type[i];
  }
};

BiasEvaluator BiasEvaluator::train(const Dataset& d_bias, const BiasEvalConfig& cfg) {
  return BiasEvaluatorTrainer::run(d_bias, cfg);
}

void BiasEvaluator::rebuild_index() {
  vocab_index_.clear();
  for (std::size_t i = 0; i < vocab_.size(); ++i) vocab_index_[vocab_[i]] = i;
  type_index_.clear();
  for (std::size_t i = 0; i < type_vocab_.size(); ++i) type_index_[type_vocab_[i]] = i;
}

std::size_t BiasEvaluator::token_id(const std::string& tok) const {
  auto it = vocab_index_.find(tok);
  return it == vocab_index_.end() ? 0 : it->second;
}

std::size_t BiasEvaluator::type_id(const std::string& type) const {
  auto it = type_index_.find(type);
  return it == type_index_.end() ? 0 : it->second;
}

std::vector<double> BiasEvaluator::features(const Sample& s) const {
  const std::size_t e = embed_dim_;
  std::vector<double> x(3 * e, 0.0);
  std::vector<std::size_t> surf_ids;
  for (const auto& t : s.subj_surface()) surf_ids.push_back(token_id(t));
  for (const auto& t : s.obj_surface()) surf_ids.push_back(token_id(t));
  const double inv_n = 1.0 / static_cast<double>(surf_ids.size());
  for (std::size_t id : surf_ids) {
    for (std::size_t f = 0; f < e; ++f) {
      x[f] += token_emb_[id * e + f] * inv_n;
    }
  }
  const std::size_t ts = type_id(s.subj_type);
  const std::size_t to = type_id(s.obj_type);
  for (std::size_t f = 0; f < e; ++f) {
    x[e + f] = type_emb_[ts * e + f];
    x[2 * e + f] = type_emb_[to * e + f];
  }
  return x;
}

std::vector<double> BiasEvaluator::label_probs(const Sample& s) const {
  const std::size_t feat_dim = 3 * embed_dim_;
  const std::vector<double> x = features(s);
  std::vector<double> logits(schema_.labels.size());
  for (std::size_t l = 0; l < schema_.labels.size(); ++l) {
    double z = bias_[l];
    const double* w = &weight_[l * feat_dim];
    for (std::size_t f = 0; f < feat_dim; ++f) z += w[f] * x[f];
    logits[l] = z;
  }
  return softmax(logits);
}

double BiasEvaluator::score(const Sample& s) const {
  return label_probs(s)[schema_.label_index(s.relation)];
}

double bias_score(const BiasEvaluator& ev, const Candidate& c) {
  return ev.score(c.sample);
}

void BiasEvaluator::save(const std::filesystem::path& path) const {
  json doc;
  doc["format"] = "dreb-bias-evaluator";
  doc["version"] = 1;
  doc["labels"] = schema_.labels;
  doc["negative_label"] = schema_.negative_label;
  doc["vocab"] = vocab_;
  doc["type_vocab"] = type_vocab_;
  doc["embed_dim"] = embed_dim_;
  doc["token_emb"] = token_emb_;
  doc["type_emb"] = type_emb_;
  doc["weight"] = weight_;
  doc["bias"] = bias_;
  doc["heldout_accuracy"] = heldout_accuracy_;
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot open '" + path.string() + "' for writing");
  }
  out << doc.dump(2) << "\n";
}

BiasEvaluator BiasEvaluator::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open '" + path.string() + "' for reading");
  }
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || doc.value("format", "") != "dreb-bias-evaluator") {
    throw ParseError("'" + path.string() + "' is not a bias evaluator file");
  }
  BiasEvaluator ev;
  ev.schema_.labels = doc.at("labels").get<std::vector<std::string>>();
  ev.schema_.negative_label = doc.at("negative_label").get<std::string>();
  ev.vocab_ = doc.at("vocab").get<std::vector<std::string>>();
  ev.type_vocab_ = doc.at("type_vocab").get<std::vector<std::string>>();
  ev.embed_dim_ = doc.at("embed_dim").get<std::size_t>();
  ev.token_emb_ = doc.at("token_emb").get<std::vector<double>>();
  ev.type_emb_ = doc.at("type_emb").get<std::vector<double>>();
  ev.weight_ = doc.at("weight").get<std::vector<double>>();
  ev.bias_ = doc.at("bias").get<std::vector<double>>();
  ev.heldout_accuracy_ = doc.at("heldout_accuracy").get<double>();
  ev.rebuild_index();
  return ev;
}

}  // namespace dreb
