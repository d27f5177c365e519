#include "dreb/lm.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

namespace dreb {

using nlohmann::json;

std::vector<double> LanguageModel::sequence_logprobs(const TokenList& tokens) const {
  std::vector<double> out;
  out.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    out.push_back(log_prob(std::span<const std::string>(tokens.data(), i), tokens[i]));
  }
  return out;
}

double log_ppl(const LanguageModel& lm, const TokenList& tokens) {
  if (tokens.empty()) {
    throw ValidationError("log_ppl of an empty sequence");
  }
  const std::vector<double> lps = lm.sequence_logprobs(tokens);
  double sum = 0.0;
  for (double lp : lps) sum += lp;
  return -sum / static_cast<double>(tokens.size());
}

std::size_t select_min_ppl(const LanguageModel& lm,
                           std::vector<Candidate>& candidates) {
  if (candidates.empty()) {
    throw ValidationError("select_min_ppl on an empty candidate list");
  }
  std::size_t best = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double v = log_ppl(lm, candidates[i].sample.tokens);
    candidates[i].log_ppl = v;
    if (v < *candidates[best].log_ppl) {
      best = i;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// NgramLm
// ---------------------------------------------------------------------------

NgramLm::NgramLm(std::size_t order) : order_(order) {
  if (order_ == 0) {
    throw ConfigError("n-gram order must be >= 1");
  }
  counts_.resize(order_);
}

void NgramLm::fit(const std::vector<TokenList>& corpus) {
  for (const auto& sentence : corpus) {
    for (const auto& tok : sentence) {
      vocab_[tok] = true;
    }
  }
  vocab_[kUnk] = true;

  for (const auto& sentence : corpus) {
    // Pad on the left so position 0 conditions on sentence start.
    TokenList padded(order_ - 1, kBos);
    padded.insert(padded.end(), sentence.begin(), sentence.end());
    for (std::size_t i = order_ - 1; i < padded.size(); ++i) {
      const std::string& w = padded[i];
      for (std::size_t ctx_len = 0; ctx_len < order_; ++ctx_len) {
        Context ctx(padded.begin() + static_cast<std::ptrdiff_t>(i - ctx_len),
                    padded.begin() + static_cast<std::ptrdiff_t>(i));
        ContextCounts& cc = counts_[ctx_len][ctx];
        ++cc.tokens[w];
        ++cc.total;
      }
    }
  }
  fitted_ = true;
}

NgramLm::Context NgramLm::context_for(std::span<const std::string> prefix,
                                      std::size_t len) const {
  Context ctx;
  ctx.reserve(len);
  // Left-pad with <s>, map unseen words to <unk>.
  for (std::size_t i = 0; i < len; ++i) {
    std::size_t back = len - i;
    if (back > prefix.size()) {
      ctx.push_back(kBos);
    } else {
      const std::string& tok = prefix[prefix.size() - back];
      ctx.push_back(vocab_.count(tok) ? tok : kUnk);
    }
  }
  return ctx;
}

const NgramLm::ContextCounts* NgramLm::find_context(std::size_t order,
                                                    const Context& ctx) const {
  const auto& table = counts_[order];
  auto it = table.find(ctx);
  return it == table.end() ? nullptr : &it->second;
}

double NgramLm::prob(const Context& ctx_full, const std::string& token) const {
  const std::string& w = vocab_.count(token) ? token : kUnk;
  const double v = static_cast<double>(vocab_.size());
  // Back off while the context itself is unseen; add-one smooth within the
  // chosen level.
  for (std::size_t len = ctx_full.size();; --len) {
    Context ctx(ctx_full.end() - static_cast<std::ptrdiff_t>(len), ctx_full.end());
    const ContextCounts* cc = find_context(len, ctx);
    if (cc != nullptr) {
      std::size_t c = 0;
      auto it = cc->tokens.find(w);
      if (it != cc->tokens.end()) c = it->second;
      return (static_cast<double>(c) + 1.0) / (static_cast<double>(cc->total) + v);
    }
    if (len == 0) {
      // No unigram table at all: uniform over the vocabulary.
      return 1.0 / v;
    }
  }
}

double NgramLm::log_prob(std::span<const std::string> prefix,
                         const std::string& token) const {
  if (!fitted_) {
    throw Error("n-gram model queried before fit/load");
  }
  return std::log(prob(context_for(prefix, order_ - 1), token));
}

std::map<std::string, double> NgramLm::next_token_logprobs(
    std::span<const std::string> prefix) const {
  if (!fitted_) {
    throw Error("n-gram model queried before fit/load");
  }
  const Context ctx = context_for(prefix, order_ - 1);
  std::map<std::string, double> out;
  for (const auto& [tok, _] : vocab_) {
    out[tok] = std::log(prob(ctx, tok));
  }
  return out;
}

void NgramLm::save_counts(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot open '" + path.string() + "' for writing");
  }
  for (std::size_t len = 0; len < counts_.size(); ++len) {
    for (const auto& [ctx, cc] : counts_[len]) {
      for (const auto& [tok, count] : cc.tokens) {
        json rec;
        rec["context"] = ctx;
        rec["token"] = tok;
        rec["count"] = count;
        out << rec.dump() << "\n";
      }
    }
  }
}

NgramLm NgramLm::load_counts(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open '" + path.string() + "' for reading");
  }
  struct Row {
    Context ctx;
    std::string token;
    std::size_t count;
  };
  std::vector<Row> rows;
  std::size_t max_ctx = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object()) {
      std::ostringstream os;
      os << path.filename().string() << ":" << line_no << ": invalid counts record";
      throw ParseError(os.str());
    }
    Row row;
    for (const auto& c : rec.at("context")) {
      row.ctx.push_back(c.get<std::string>());
    }
    row.token = rec.at("token").get<std::string>();
    row.count = rec.at("count").get<std::size_t>();
    max_ctx = std::max(max_ctx, row.ctx.size());
    rows.push_back(std::move(row));
  }

  NgramLm lm(max_ctx + 1);
  for (const auto& row : rows) {
    ContextCounts& cc = lm.counts_[row.ctx.size()][row.ctx];
    cc.tokens[row.token] += row.count;
    cc.total += row.count;
    if (row.token != kBos) {
      lm.vocab_[row.token] = true;
    }
  }
  lm.vocab_[kUnk] = true;
  lm.fitted_ = true;
  return lm;
}

// ---------------------------------------------------------------------------
// RemoteLm
// ---------------------------------------------------------------------------

RemoteLm::RemoteLm(std::string base_url) {
  // Accept "host:port" or "http://host:port".
  std::string url = std::move(base_url);
  const std::string scheme = "http://";
  if (url.rfind(scheme, 0) == 0) {
    url = url.substr(scheme.size());
  }
  auto colon = url.rfind(':');
  if (colon == std::string::npos) {
    host_ = url;
  } else {
    host_ = url.substr(0, colon);
    port_ = std::stoi(url.substr(colon + 1));
  }
}

namespace {

json remote_post(const std::string& host, int port, const std::string& path,
                 const json& body) {
  // One client per call keeps the adapter reentrant for parallel scoring.
  httplib::Client cli(host, port);
  cli.set_read_timeout(30, 0);
  auto res = cli.Post(path, body.dump(), "application/json");
  if (!res) {
    throw Error("language model endpoint " + host + ":" + std::to_string(port) +
                " unreachable");
  }
  if (res->status != 200) {
    throw Error("language model endpoint returned status " +
                std::to_string(res->status));
  }
  json out = json::parse(res->body, nullptr, false);
  if (out.is_discarded()) {
    throw ParseError("language model endpoint returned invalid json");
  }
  return out;
}

}  // namespace

std::vector<double> RemoteLm::sequence_logprobs(const TokenList& tokens) const {
  json body;
  body["tokens"] = tokens;
  json res = remote_post(host_, port_, "/v1/sequence_logprobs", body);
  std::vector<double> out;
  for (const auto& v : res.at("logprobs")) {
    out.push_back(v.get<double>());
  }
  if (out.size() != tokens.size()) {
    throw ParseError("language model endpoint returned " +
                     std::to_string(out.size()) + " logprobs for " +
                     std::to_string(tokens.size()) + " tokens");
  }
  return out;
}

double RemoteLm::log_prob(std::span<const std::string> prefix,
                          const std::string& token) const {
  TokenList tokens(prefix.begin(), prefix.end());
  tokens.push_back(token);
  return sequence_logprobs(tokens).back();
}

std::map<std::string, double> RemoteLm::next_token_logprobs(
    std::span<const std::string> prefix) const {
  json body;
  body["prefix"] = std::vector<std::string>(prefix.begin(), prefix.end());
  json res = remote_post(host_, port_, "/v1/next_token_logprobs", body);
  std::map<std::string, double> out;
  for (auto it = res.at("logprobs").begin(); it != res.at("logprobs").end(); ++it) {
    out[it.key()] = it.value().get<double>();
  }
  return out;
}

}  // namespace dreb
