#include "dreb/synthetic.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dreb/rng.hpp"

namespace dreb {

using nlohmann::json;

namespace {

constexpr const char* kSubjSlot = "{SUBJ}";
constexpr const char* kObjSlot = "{OBJ}";
constexpr const char* kSubjType = "PERSON";
constexpr const char* kObjType = "ORG";

struct LabelTemplates {
  const char* label;
  // Content words are disjoint across labels so a context-only reader can
  // always recover the label; slot order varies to exercise re-indexing.
  std::vector<const char*> templates;
};

const std::vector<LabelTemplates>& label_bank() {
  static const std::vector<LabelTemplates> bank = {
      {"no_relation",
       {"{SUBJ} appeared near {OBJ} yesterday without comment .",
        "reporters mentioned {SUBJ} and {OBJ} in separate stories .",
        "{SUBJ} stood beside {OBJ} during the parade ."}},
      {"founded",
       {"{SUBJ} founded {OBJ} decades ago .",
        "{SUBJ} established {OBJ} from scratch .",
        "the firm {OBJ} was created by {SUBJ} ."}},
      {"works_at",
       {"{SUBJ} works at {OBJ} as an engineer .",
        "{OBJ} employs {SUBJ} on the payroll .",
        "{SUBJ} joined the staff of {OBJ} recently ."}},
      {"leads",
       {"{SUBJ} leads {OBJ} as chief executive .",
        "{SUBJ} runs {OBJ} with a steady hand .",
        "the board of {OBJ} promoted {SUBJ} to president ."}},
      {"left",
       {"{SUBJ} resigned from {OBJ} last spring .",
        "{SUBJ} quit {OBJ} after tense negotiations .",
        "{OBJ} announced the departure of {SUBJ} quietly ."}},
      {"sued",
       {"{SUBJ} sued {OBJ} over broken contracts .",
        "{SUBJ} filed a lawsuit against {OBJ} .",
        "lawyers for {SUBJ} took {OBJ} to court ."}},
      {"invested_in",
       {"{SUBJ} invested heavily in {OBJ} .",
        "{SUBJ} bought shares of {OBJ} early .",
        "the stake {SUBJ} holds in {OBJ} grew ."}},
      {"advised",
       {"{SUBJ} advised {OBJ} on strategy .",
        "{SUBJ} consulted for {OBJ} during the merger .",
        "{OBJ} retained {SUBJ} as an adviser ."}},
      {"criticized",
       {"{SUBJ} criticized {OBJ} in a speech .",
        "{SUBJ} denounced {OBJ} publicly .",
        "the column by {SUBJ} blasted {OBJ} ."}},
      {"visited",
       {"{SUBJ} visited {OBJ} last week .",
        "{SUBJ} toured {OBJ} facilities .",
        "{SUBJ} dropped by {OBJ} headquarters ."}},
      {"owns",
       {"{SUBJ} owns {OBJ} outright .",
        "{SUBJ} controls {OBJ} through holding companies .",
        "ownership of {OBJ} rests with {SUBJ} ."}},
      {"donated_to",
       {"{SUBJ} donated millions to {OBJ} .",
        "{SUBJ} gave a grant to {OBJ} .",
        "the gift from {SUBJ} funded {OBJ} ."}},
  };
  return bank;
}

const std::vector<const char*>& person_bank() {
  static const std::vector<const char*> bank = {
      "Mara Voss",      "Dario Quinn",    "Lena Hart",       "Tobias Reiner",
      "Ingrid Solberg", "Omar Haddad",    "Petra Lindqvist", "Caleb Strand",
      "Yusuf Demir",    "Alba Moreno",    "Nikolai Berg",    "Saoirse Whelan",
      "Anders Lund",    "Chiara Bellini", "Ravi Menon",      "Greta Holm",
      "Felix Arnaud",   "Noor Rahimi",    "Stellan Krog",    "Maeve Doran",
      "Henrik Dahl",    "Paloma Ruiz",    "Viktor Malen",    "Ines Castell",
      "Bram Janssen",   "Sofia Leander",  "Matteo Ricci",    "Freya Nylund",
      "Oskar Thorne",   "Leila Fares",    "Casper Holt",     "Nadia Petrov",
      "Zidane",         "Bjork",          "Teller",          "Rooney",
  };
  return bank;
}

const std::vector<const char*>& org_bank() {
  static const std::vector<const char*> bank = {
      "Helix Labs",        "Vantor Group",      "Bluepeak Systems",
      "Orchid Capital",    "Nimbus Works",      "Ferrostahl",
      "Quanta Mills",      "Solvik Energy",     "Aralia Foods",
      "Brightline Media",  "Kestrel Avionics",  "Monarch Textiles",
      "Zephyr Logistics",  "Tidewater Shipping", "Novaterra",
      "Pinewood Clinics",  "Argent Bank",       "Corvus Analytics",
      "Lumen Forge",       "Halcyon Motors",    "Sable Mining",
      "Verdant Farms",     "Polaris Telecom",   "Ivory Press",
      "Cobalt Robotics",   "Meridian Air",      "Sparrow Games",
      "Atlas Grain",       "Onyx Partners",     "Crescent Hotels",
      "Fjord Marine",      "Galena Pharma",     "Rubicon Steel",
      "Willow Software",   "Ember Studios",     "Drift Apparel",
  };
  return bank;
}

TokenList split_words(const std::string& text) {
  TokenList out;
  std::istringstream in(text);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

std::vector<TokenList> pick_entities(const std::vector<const char*>& bank,
                                     std::size_t n, const char* synth_prefix,
                                     Rng& rng) {
  std::vector<std::size_t> order(bank.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  std::vector<TokenList> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i < bank.size()) {
      out.push_back(split_words(bank[order[i]]));
    } else {
      out.push_back({std::string(synth_prefix) + std::to_string(i)});
    }
  }
  return out;
}

Sample instantiate(const TokenList& pattern, const TokenList& subj,
                   const TokenList& obj, std::string id, std::string relation) {
  Sample s;
  s.id = std::move(id);
  s.subj_type = kSubjType;
  s.obj_type = kObjType;
  s.relation = std::move(relation);
  for (const auto& tok : pattern) {
    if (tok == kSubjSlot) {
      s.subj_span = {s.tokens.size(), s.tokens.size() + subj.size()};
      s.tokens.insert(s.tokens.end(), subj.begin(), subj.end());
    } else if (tok == kObjSlot) {
      s.obj_span = {s.tokens.size(), s.tokens.size() + obj.size()};
      s.tokens.insert(s.tokens.end(), obj.begin(), obj.end());
    } else {
      s.tokens.push_back(tok);
    }
  }
  return s;
}

}  // namespace

void GeneratorSpec::validate() const {
  const std::size_t max_labels = label_bank().size();
  if (n_labels < 2 || n_labels > max_labels) {
    throw ConfigError("n_labels must lie in [2, " + std::to_string(max_labels) + "]");
  }
  if (templates_per_label < 2 || templates_per_label > 3) {
    throw ConfigError("templates_per_label must be 2 or 3");
  }
  if (bias_rate < 0.0 || bias_rate > 1.0) {
    throw ConfigError("bias_rate must lie in [0, 1]");
  }
  if (n_entities_per_type < n_labels) {
    throw ConfigError("n_entities_per_type must be >= n_labels");
  }
  if (train_size == 0) {
    throw ConfigError("train_size must be positive");
  }
}

GeneratorSpec GeneratorSpec::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open '" + path.string() + "' for reading");
  }
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw ParseError(path.string() + ": generator spec must be a json object");
  }
  GeneratorSpec spec;
  spec.n_labels = doc.value("n_labels", spec.n_labels);
  spec.n_entities_per_type = doc.value("n_entities_per_type", spec.n_entities_per_type);
  spec.templates_per_label = doc.value("templates_per_label", spec.templates_per_label);
  spec.bias_rate = doc.value("bias_rate", spec.bias_rate);
  spec.train_size = doc.value("train_size", spec.train_size);
  spec.dev_size = doc.value("dev_size", spec.dev_size);
  spec.test_size = doc.value("test_size", spec.test_size);
  spec.seed = doc.value("seed", spec.seed);
  spec.validate();
  return spec;
}

GeneratedCorpus generate(const GeneratorSpec& spec) {
  spec.validate();

  const auto& bank = label_bank();
  std::vector<std::string> labels;
  std::vector<std::vector<TokenList>> templates(spec.n_labels);
  for (std::size_t l = 0; l < spec.n_labels; ++l) {
    labels.emplace_back(bank[l].label);
    for (std::size_t t = 0; t < spec.templates_per_label; ++t) {
      templates[l].push_back(split_words(bank[l].templates[t]));
    }
  }

  Rng setup_rng(stream_seed(spec.seed, 0x5e7fULL));
  const std::vector<TokenList> subjects =
      pick_entities(person_bank(), spec.n_entities_per_type, "Person", setup_rng);
  const std::vector<TokenList> objects =
      pick_entities(org_bank(), spec.n_entities_per_type, "Org", setup_rng);

  // Round-robin assignment plants each subject on one label.
  std::vector<std::size_t> assignment(subjects.size());
  std::vector<std::vector<std::size_t>> subjects_of_label(spec.n_labels);
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    assignment[i] = i % spec.n_labels;
    subjects_of_label[assignment[i]].push_back(i);
  }

  GeneratedCorpus corpus;
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    corpus.subject_assignment[join_tokens(subjects[i])] = labels[assignment[i]];
  }

  RelationSchema schema;
  schema.labels = labels;
  if (schema.has_label("no_relation")) schema.negative_label = "no_relation";

  auto make_split = [&](const std::string& name, std::size_t size, bool biased,
                        std::uint64_t stream) {
    Dataset d;
    d.schema = schema;
    d.split_name = name;
    Rng rng(stream_seed(spec.seed, stream));
    for (std::size_t i = 0; i < size; ++i) {
      const std::size_t label = rng.uniform_index(spec.n_labels);
      const TokenList& pattern =
          templates[label][rng.uniform_index(templates[label].size())];

      std::size_t subj_idx;
      if (biased && rng.uniform() < spec.bias_rate) {
        const auto& aligned = subjects_of_label[label];
        subj_idx = aligned[rng.uniform_index(aligned.size())];
      } else if (biased) {
        // Uniform over subjects planted on some other label.
        do {
          subj_idx = rng.uniform_index(subjects.size());
        } while (assignment[subj_idx] == label);
      } else {
        subj_idx = rng.uniform_index(subjects.size());
      }
      const std::size_t obj_idx = rng.uniform_index(objects.size());

      std::ostringstream id;
      id << name << "-" << i;
      d.samples.push_back(instantiate(pattern, subjects[subj_idx], objects[obj_idx],
                                      id.str(), labels[label]));
    }
    d.validate();
    return d;
  };

  corpus.train = make_split("train", spec.train_size, true, 1);
  corpus.dev = make_split("dev", spec.dev_size, true, 2);
  corpus.test_biased = make_split("test_biased", spec.test_size, true, 3);
  corpus.test_debiased = make_split("test_debiased", spec.test_size, false, 4);

  for (const auto& s : subjects) {
    corpus.pool.push_back({s, kSubjType, "synthetic"});
  }
  for (const auto& o : objects) {
    corpus.pool.push_back({o, kObjType, "synthetic"});
  }
  return corpus;
}

}  // namespace dreb
