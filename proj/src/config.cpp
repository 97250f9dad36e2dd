#include "pec/config.hpp"

#include <fstream>

namespace pec {

namespace {

using nlohmann::json;

void collect_unknown(const json& doc, const json& reference, const std::string& prefix,
                     std::vector<std::string>& unknown) {
  for (const auto& [key, value] : doc.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!reference.contains(key)) {
      unknown.push_back(path);
      continue;
    }
    if (value.is_object() && reference.at(key).is_object()) collect_unknown(value, reference.at(key), path, unknown);
  }
}

template <typename T>
void read(const json& j, const char* key, T& field, const std::string& path) {
  if (!j.contains(key)) return;
  try {
    j.at(key).get_to(field);
  } catch (const json::exception&) {
    throw ConfigError("config key '" + path + key + "' has the wrong type");
  }
}

}  // namespace

void RunConfig::validate() const {
  if (trace.empty()) synthetic.validate();
  tsas.validate();
  if (!(test_span_s > 0.0)) throw ConfigError("test_span_s must be positive");
  if (min_active_count < 1) throw ConfigError("min_active_count must be >= 1");
  if (ngram_n < 2) throw ConfigError("ngram_n must be >= 2");
  if (topn < 1) throw ConfigError("topn must be >= 1");
  if (!(default_sigma_s >= 0.0)) throw ConfigError("default_sigma_s must be non-negative");
  if (!(watch_caps.tv > 0 && watch_caps.movie > 0 && watch_caps.show > 0 && watch_caps.other > 0))
    throw ConfigError("watch caps must be positive");
  sim_config().validate();
}

SimConfig RunConfig::sim_config() const {
  SimConfig s;
  s.policy = parse_policy(policy);
  s.capacity = capacity;
  s.alpha = alpha;
  s.beta = beta;
  s.gamma = gamma;
  s.K = K;
  s.update_period = update_period_s;
  s.transmission_time = transmission_time_s;
  s.periodic_period = periodic_period_s;
  s.snapshot_period = snapshot_period_s;
  s.snapshot_list_size = snapshot_list_size;
  return s;
}

nlohmann::json config_to_json(const RunConfig& c) {
  json synthetic;
  to_json(synthetic, c.synthetic);
  return json{{"trace", c.trace},
              {"synthetic", synthetic},
              {"test_span_s", c.test_span_s},
              {"min_active_count", c.min_active_count},
              {"ngram_n", c.ngram_n},
              {"topn", c.topn},
              {"tsas",
               {{"seq_len", c.tsas.seq_len},
                {"d", c.tsas.d},
                {"n_blocks", c.tsas.n_blocks},
                {"batch", c.tsas.batch},
                {"lr", c.tsas.lr},
                {"drop_rate", c.tsas.drop_rate},
                {"k_cap_minutes", c.tsas.k_cap},
                {"epochs", c.tsas.epochs},
                {"init_std", c.tsas.init_std}}},
              {"watch_caps",
               {{"tv", c.watch_caps.tv}, {"movie", c.watch_caps.movie}, {"show", c.watch_caps.show},
                {"other", c.watch_caps.other}}},
              {"default_sigma_s", c.default_sigma_s},
              {"policy", c.policy},
              {"capacity", c.capacity},
              {"alpha", c.alpha},
              {"beta", c.beta},
              {"gamma", c.gamma},
              {"K", c.K},
              {"update_period_s", c.update_period_s},
              {"transmission_time_s", c.transmission_time_s},
              {"periodic_period_s", c.periodic_period_s},
              {"snapshot_period_s", c.snapshot_period_s},
              {"snapshot_list_size", c.snapshot_list_size},
              {"seed", c.seed},
              {"checkpoint_dir", c.checkpoint_dir},
              {"output_dir", c.output_dir}};
}

RunConfig config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  const json reference = config_to_json(c);
  std::vector<std::string> unknown;
  collect_unknown(doc, reference, "", unknown);
  if (!unknown.empty()) {
    std::string list;
    for (const auto& k : unknown) list += (list.empty() ? "" : ", ") + k;
    throw ConfigError("unknown config keys: " + list);
  }

  read(doc, "trace", c.trace, "");
  if (doc.contains("synthetic")) {
    try {
      from_json(doc.at("synthetic"), c.synthetic);
    } catch (const json::exception&) {
      throw ConfigError("config section 'synthetic' has a value of the wrong type");
    }
  }
  read(doc, "test_span_s", c.test_span_s, "");
  read(doc, "min_active_count", c.min_active_count, "");
  read(doc, "ngram_n", c.ngram_n, "");
  read(doc, "topn", c.topn, "");
  if (doc.contains("tsas")) {
    const auto& t = doc.at("tsas");
    read(t, "seq_len", c.tsas.seq_len, "tsas.");
    read(t, "d", c.tsas.d, "tsas.");
    read(t, "n_blocks", c.tsas.n_blocks, "tsas.");
    read(t, "batch", c.tsas.batch, "tsas.");
    read(t, "lr", c.tsas.lr, "tsas.");
    read(t, "drop_rate", c.tsas.drop_rate, "tsas.");
    read(t, "k_cap_minutes", c.tsas.k_cap, "tsas.");
    read(t, "epochs", c.tsas.epochs, "tsas.");
    read(t, "init_std", c.tsas.init_std, "tsas.");
  }
  if (doc.contains("watch_caps")) {
    const auto& w = doc.at("watch_caps");
    read(w, "tv", c.watch_caps.tv, "watch_caps.");
    read(w, "movie", c.watch_caps.movie, "watch_caps.");
    read(w, "show", c.watch_caps.show, "watch_caps.");
    read(w, "other", c.watch_caps.other, "watch_caps.");
  }
  read(doc, "default_sigma_s", c.default_sigma_s, "");
  read(doc, "policy", c.policy, "");
  read(doc, "capacity", c.capacity, "");
  read(doc, "alpha", c.alpha, "");
  read(doc, "beta", c.beta, "");
  read(doc, "gamma", c.gamma, "");
  read(doc, "K", c.K, "");
  read(doc, "update_period_s", c.update_period_s, "");
  read(doc, "transmission_time_s", c.transmission_time_s, "");
  read(doc, "periodic_period_s", c.periodic_period_s, "");
  read(doc, "snapshot_period_s", c.snapshot_period_s, "");
  read(doc, "snapshot_list_size", c.snapshot_list_size, "");
  read(doc, "seed", c.seed, "");
  read(doc, "checkpoint_dir", c.checkpoint_dir, "");
  read(doc, "output_dir", c.output_dir, "");
  c.tsas.seed = c.seed;
  c.validate();
  return c;
}

void apply_override(nlohmann::json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key=value: " + assignment);
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("empty key segment in override: " + assignment);
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    if (!node->contains(part) || !(*node)[part].is_object()) (*node)[part] = json::object();
    node = &(*node)[part];
    start = dot + 1;
  }
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  json doc = json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw ConfigError("config " + path.string() + " is not valid JSON");
  }
  for (const auto& o : overrides) apply_override(doc, o);
  return config_from_json(doc);
}

}  // namespace pec
