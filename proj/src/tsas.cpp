#include "pec/tsas.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

namespace pec {

namespace {

constexpr double kLayerNormEps = 1e-8;

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }
double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

Mat truncated_normal(Eigen::Index rows, Eigen::Index cols, double std, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    double v = normal(rng);
    while (std::abs(v) > 2.0) v = normal(rng);
    m.data()[i] = v * std;
  }
  return m;
}

Eigen::RowVectorXd column_sums(const Mat& m) { return m.colwise().sum(); }

}  // namespace

void TsasConfig::validate() const {
  if (d < 1 || n_blocks < 1 || seq_len < 1 || k_cap < 1 || batch < 1 || epochs < 0)
    throw ConfigError("tsas: d, n_blocks, seq_len, k_cap and batch must be positive");
  if (drop_rate < 0.0 || drop_rate >= 1.0) throw ConfigError("tsas: drop_rate must be in [0,1)");
  if (!(lr > 0.0)) throw ConfigError("tsas: lr must be positive");
  if (!(interval_unit_s > 0.0)) throw ConfigError("tsas: interval unit must be positive");
}

int quantize_interval(Seconds delta_t, int k_cap, Seconds unit) {
  if (!(delta_t >= 0.0)) throw ContractViolation("time interval must be non-negative");
  double buckets = std::floor(delta_t / unit);
  if (buckets >= static_cast<double>(k_cap)) return k_cap;
  return static_cast<int>(buckets);
}

std::vector<Mat*> TsasWeights::tensors() {
  std::vector<Mat*> out{&content_emb, &interval_key, &interval_value};
  for (auto& b : blocks)
    for (Mat* m : {&b.wq, &b.wk, &b.wv, &b.w1, &b.b1, &b.w2, &b.b2, &b.ln_gain, &b.ln_bias}) out.push_back(m);
  return out;
}

std::vector<const Mat*> TsasWeights::tensors() const {
  auto mutable_ptrs = const_cast<TsasWeights*>(this)->tensors();
  return {mutable_ptrs.begin(), mutable_ptrs.end()};
}

TsasWeights TsasWeights::zeros_like() const {
  TsasWeights z = *this;
  for (Mat* m : z.tensors()) m->setZero();
  return z;
}

TsasModel::TsasModel(TsasConfig cfg, std::vector<ContentId> vocab) : cfg_(cfg), vocab_(std::move(vocab)) {
  cfg_.validate();
  for (std::size_t i = 0; i < vocab_.size(); ++i) index_.emplace(vocab_[i].value, static_cast<int>(i + 1));

  std::mt19937_64 rng(cfg_.seed);
  const int d = cfg_.d;
  w_.content_emb = truncated_normal(static_cast<Eigen::Index>(vocab_.size()) + 1, d, cfg_.init_std, rng);
  w_.content_emb.row(0).setZero();
  w_.interval_key = truncated_normal(cfg_.k_cap + 1, d, cfg_.init_std, rng);
  w_.interval_value = truncated_normal(cfg_.k_cap + 1, d, cfg_.init_std, rng);
  for (int b = 0; b < cfg_.n_blocks; ++b) {
    TsasWeights::Block blk;
    blk.wq = truncated_normal(d, d, cfg_.init_std, rng);
    blk.wk = truncated_normal(d, d, cfg_.init_std, rng);
    blk.wv = truncated_normal(d, d, cfg_.init_std, rng);
    blk.w1 = truncated_normal(d, d, cfg_.init_std, rng);
    blk.b1 = Mat::Zero(1, d);
    blk.w2 = truncated_normal(d, d, cfg_.init_std, rng);
    blk.b2 = Mat::Zero(1, d);
    blk.ln_gain = Mat::Ones(1, d);
    blk.ln_bias = Mat::Zero(1, d);
    w_.blocks.push_back(std::move(blk));
  }
}

int TsasModel::index_of(ContentId c) const {
  auto it = index_.find(c.value);
  return it == index_.end() ? 0 : it->second;
}

ForwardPass TsasModel::forward(const TsasSequence& seq, std::mt19937_64* rng) const {
  if (seq.items.size() != seq.times.size()) throw ContractViolation("sequence items and times differ in length");
  const int d = cfg_.d;
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  const std::size_t rows = seq.items.size() + 1;

  ForwardPass pass;
  pass.items.assign(rows, 0);
  std::vector<Seconds> times(rows, seq.times.empty() ? 0.0 : seq.times.front());
  for (std::size_t r = 1; r < rows; ++r) {
    pass.items[r] = seq.items[r - 1];
    times[r] = seq.times[r - 1];
    if (pass.items[r] < 0 || pass.items[r] > vocab_size()) throw ContractViolation("content index out of range");
  }
  pass.valid.assign(rows, 0);
  for (std::size_t r = 1; r < rows; ++r) pass.valid[r] = pass.items[r] != 0 ? 1 : 0;

  pass.buckets.assign(rows * rows, 0);
  for (std::size_t r = 1; r < rows; ++r) {
    if (!pass.valid[r]) continue;
    for (std::size_t j = 1; j <= r; ++j)
      if (pass.valid[j])
        pass.buckets[r * rows + j] = quantize_interval(times[r] - times[j], cfg_.k_cap, cfg_.interval_unit_s);
  }

  Mat x(static_cast<Eigen::Index>(rows), d);
  for (std::size_t r = 0; r < rows; ++r) x.row(static_cast<Eigen::Index>(r)) = w_.content_emb.row(pass.items[r]);

  std::bernoulli_distribution keep(1.0 - cfg_.drop_rate);
  const double keep_scale = 1.0 / (1.0 - cfg_.drop_rate);

  std::vector<double> logits;
  for (const auto& blk : w_.blocks) {
    ForwardPass::BlockState st;
    st.input = x;
    st.q = x * blk.wq;
    st.k = x * blk.wk;
    st.v = x * blk.wv;
    st.attention = Mat::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(rows));
    st.z = Mat::Zero(static_cast<Eigen::Index>(rows), d);

    for (std::size_t r = 1; r < rows; ++r) {
      if (!pass.valid[r]) continue;
      const auto ri = static_cast<Eigen::Index>(r);
      logits.clear();
      double max_logit = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 1; j <= r; ++j) {
        if (!pass.valid[j]) {
          logits.push_back(0.0);
          continue;
        }
        const int b = pass.buckets[r * rows + j];
        const double m =
            st.q.row(ri).dot(st.k.row(static_cast<Eigen::Index>(j)) + w_.interval_key.row(b)) * inv_sqrt_d;
        logits.push_back(m);
        max_logit = std::max(max_logit, m);
      }
      double denom = 0.0;
      for (std::size_t j = 1; j <= r; ++j)
        if (pass.valid[j]) denom += std::exp(logits[j - 1] - max_logit);
      for (std::size_t j = 1; j <= r; ++j) {
        if (!pass.valid[j]) continue;
        const double alpha = std::exp(logits[j - 1] - max_logit) / denom;
        const int b = pass.buckets[r * rows + j];
        st.attention(ri, static_cast<Eigen::Index>(j)) = alpha;
        st.z.row(ri) += alpha * (st.v.row(static_cast<Eigen::Index>(j)) + w_.interval_value.row(b));
      }
    }

    st.u = st.z * blk.w1;
    st.u.rowwise() += blk.b1.row(0);
    st.a = st.u.cwiseMax(0.0);
    st.f = st.a * blk.w2;
    st.f.rowwise() += blk.b2.row(0);
    st.mask = Mat::Ones(st.f.rows(), st.f.cols());
    if (rng && cfg_.drop_rate > 0.0)
      for (Eigen::Index i = 0; i < st.mask.size(); ++i) st.mask.data()[i] = keep(*rng) ? keep_scale : 0.0;
    st.s = st.z + st.f.cwiseProduct(st.mask);

    // Post-norm: layer normalisation after the feed-forward residual.
    st.xhat.resize(st.s.rows(), d);
    st.inv_sigma.resize(st.s.rows());
    for (Eigen::Index r = 0; r < st.s.rows(); ++r) {
      const double mu = st.s.row(r).mean();
      const double var = (st.s.row(r).array() - mu).square().mean();
      st.inv_sigma(r) = 1.0 / std::sqrt(var + kLayerNormEps);
      st.xhat.row(r) = (st.s.row(r).array() - mu) * st.inv_sigma(r);
    }
    st.output = st.xhat.array().rowwise() * blk.ln_gain.row(0).array();
    st.output.rowwise() += blk.ln_bias.row(0);
    x = st.output;
    pass.blocks.push_back(std::move(st));
  }
  return pass;
}

void TsasModel::backward(const ForwardPass& pass, const Mat& d_output, TsasWeights& grads) const {
  const int d = cfg_.d;
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  const std::size_t rows = pass.rows();
  Mat dx = d_output;

  for (int bi = cfg_.n_blocks - 1; bi >= 0; --bi) {
    const auto& st = pass.blocks[static_cast<std::size_t>(bi)];
    const auto& blk = w_.blocks[static_cast<std::size_t>(bi)];
    auto& g = grads.blocks[static_cast<std::size_t>(bi)];

    g.ln_gain.row(0) += column_sums(dx.cwiseProduct(st.xhat));
    g.ln_bias.row(0) += column_sums(dx);
    Mat dxhat = dx.array().rowwise() * blk.ln_gain.row(0).array();
    Mat ds(dxhat.rows(), d);
    for (Eigen::Index r = 0; r < dxhat.rows(); ++r) {
      const double mean_dxhat = dxhat.row(r).mean();
      const double mean_dxhat_xhat = dxhat.row(r).dot(st.xhat.row(r)) / d;
      ds.row(r) = st.inv_sigma(r) *
                  (dxhat.row(r).array() - mean_dxhat - st.xhat.row(r).array() * mean_dxhat_xhat).matrix();
    }

    Mat df = ds.cwiseProduct(st.mask);
    g.w2 += st.a.transpose() * df;
    g.b2.row(0) += column_sums(df);
    Mat du = (df * blk.w2.transpose()).cwiseProduct((st.u.array() > 0.0).cast<double>().matrix());
    g.w1 += st.z.transpose() * du;
    g.b1.row(0) += column_sums(du);
    Mat dz = ds + du * blk.w1.transpose();

    Mat dq = Mat::Zero(static_cast<Eigen::Index>(rows), d);
    Mat dk = Mat::Zero(static_cast<Eigen::Index>(rows), d);
    Mat dv = Mat::Zero(static_cast<Eigen::Index>(rows), d);
    std::vector<double> dalpha(rows, 0.0);
    for (std::size_t r = 1; r < rows; ++r) {
      if (!pass.valid[r]) continue;
      const auto ri = static_cast<Eigen::Index>(r);
      double weighted = 0.0;
      for (std::size_t j = 1; j <= r; ++j) {
        if (!pass.valid[j]) continue;
        const auto ji = static_cast<Eigen::Index>(j);
        const int b = pass.buckets[r * rows + j];
        const double alpha = st.attention(ri, ji);
        dalpha[j] = dz.row(ri).dot(st.v.row(ji) + w_.interval_value.row(b));
        weighted += alpha * dalpha[j];
        dv.row(ji) += alpha * dz.row(ri);
        grads.interval_value.row(b) += alpha * dz.row(ri);
      }
      for (std::size_t j = 1; j <= r; ++j) {
        if (!pass.valid[j]) continue;
        const auto ji = static_cast<Eigen::Index>(j);
        const int b = pass.buckets[r * rows + j];
        const double dm = st.attention(ri, ji) * (dalpha[j] - weighted) * inv_sqrt_d;
        dq.row(ri) += dm * (st.k.row(ji) + w_.interval_key.row(b));
        dk.row(ji) += dm * st.q.row(ri);
        grads.interval_key.row(b) += dm * st.q.row(ri);
      }
    }
    g.wq += st.input.transpose() * dq;
    g.wk += st.input.transpose() * dk;
    g.wv += st.input.transpose() * dv;
    dx = dq * blk.wq.transpose() + dk * blk.wk.transpose() + dv * blk.wv.transpose();
  }

  for (std::size_t r = 1; r < rows; ++r)
    if (pass.valid[r]) grads.content_emb.row(pass.items[r]) += dx.row(static_cast<Eigen::Index>(r));
}

std::vector<double> TsasModel::forward_scores(const TsasSequence& seq, int position, std::span<const int> candidates,
                                              std::mt19937_64* rng) const {
  if (position < 1 || position > static_cast<int>(seq.items.size()) + 1)
    throw ContractViolation("position out of range");
  for (int c : candidates)
    if (c < 1 || c > vocab_size()) throw ContractViolation("candidate index out of range");
  auto pass = forward(seq, rng);
  const auto rep = pass.output().row(position - 1);
  std::vector<double> scores;
  scores.reserve(candidates.size());
  for (int c : candidates) scores.push_back(rep.dot(w_.content_emb.row(c)));
  return scores;
}

std::vector<double> TsasModel::attention_weights(const ForwardPass& pass, int block, int position) const {
  const auto& att = pass.blocks.at(static_cast<std::size_t>(block)).attention;
  const std::size_t n = pass.rows() - 1;
  std::vector<double> out(n, 0.0);
  const auto row = static_cast<Eigen::Index>(position - 1);
  for (std::size_t j = 1; j <= n; ++j) out[j - 1] = att(row, static_cast<Eigen::Index>(j));
  return out;
}

TsasSequence TsasModel::window_from_history(std::span<const ContentId> contents, std::span<const Seconds> times,
                                            Seconds origin) const {
  const auto len = static_cast<std::size_t>(cfg_.seq_len);
  TsasSequence seq{std::vector<int>(len, 0), std::vector<Seconds>(len, origin)};
  std::size_t slot = len;
  for (std::size_t i = contents.size(); i-- > 0 && slot > 0;) {
    const int idx = index_of(contents[i]);
    if (idx == 0) continue;
    --slot;
    seq.items[slot] = idx;
    seq.times[slot] = times[i];
  }
  return seq;
}

std::vector<ScoredContent> TsasModel::topn(const TsasSequence& seq, int n_out) const {
  std::vector<ScoredContent> out;
  if (vocab_.empty() || n_out < 1) return out;
  auto pass = forward(seq, nullptr);
  const Eigen::RowVectorXd rep = pass.output().row(pass.output().rows() - 1);
  const Eigen::VectorXd scores = w_.content_emb.bottomRows(vocab_size()) * rep.transpose();

  std::vector<int> order(static_cast<std::size_t>(vocab_size()));
  std::iota(order.begin(), order.end(), 0);
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(n_out), order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), [&](int a, int b) {
    return scores(a) != scores(b) ? scores(a) > scores(b) : a < b;
  });
  for (std::size_t i = 0; i < k; ++i) out.push_back({vocab_[static_cast<std::size_t>(order[i])], scores(order[i])});
  return out;
}

NegativeSampler uniform_negative_sampler(int vocab_size) {
  return [vocab_size](int target, std::mt19937_64& rng) {
    if (vocab_size < 2) return target;
    std::uniform_int_distribution<int> pick(1, vocab_size - 1);
    int c = pick(rng);
    return c >= target ? c + 1 : c;
  };
}

LossResult training_loss(const TsasModel& model, std::span<const TsasSequence> batch, const NegativeSampler& sampler,
                         std::uint64_t rng_seed, bool train_mode) {
  if (batch.empty()) throw ContractViolation("batch must be non-empty");
  LossResult result;
  result.grads = model.weights().zeros_like();
  for (const auto& seq : batch)
    for (int item : seq.items) result.targets += item != 0 ? 1 : 0;
  if (result.targets == 0) return result;

  std::mt19937_64 rng(rng_seed);
  const auto& emb = model.weights().content_emb;
  const double inv_n = 1.0 / static_cast<double>(result.targets);
  double total = 0.0;
  for (const auto& seq : batch) {
    auto pass = model.forward(seq, train_mode ? &rng : nullptr);
    const Mat& out = pass.output();
    Mat d_out = Mat::Zero(out.rows(), out.cols());
    for (std::size_t i = 1; i <= seq.items.size(); ++i) {
      const int pos = seq.items[i - 1];
      if (pos == 0) continue;
      const int neg = sampler(pos, rng);
      const auto r = static_cast<Eigen::Index>(i - 1);
      const double sp = out.row(r).dot(emb.row(pos));
      const double sn = out.row(r).dot(emb.row(neg));
      total += softplus(-sp) + softplus(sn);
      const double dsp = (sigmoid(sp) - 1.0) * inv_n;
      const double dsn = sigmoid(sn) * inv_n;
      d_out.row(r) += dsp * emb.row(pos) + dsn * emb.row(neg);
      result.grads.content_emb.row(pos) += dsp * out.row(r);
      result.grads.content_emb.row(neg) += dsn * out.row(r);
    }
    model.backward(pass, d_out, result.grads);
  }
  result.loss = total * inv_n;
  return result;
}

std::vector<ContentId> active_vocabulary(const ActiveSets& active) {
  std::vector<ContentId> vocab;
  for (std::uint32_t i = 0; i < active.contents.size(); ++i)
    if (active.contents[i]) vocab.push_back(ContentId{i});
  return vocab;
}

std::vector<TsasSequence> make_training_sequences(const Trace& trace, const ActiveSets& active, const TsasModel& model) {
  const auto len = static_cast<std::size_t>(model.config().seq_len);
  const Seconds origin = 0.0;
  std::vector<TsasSequence> out;
  for (const auto& seq : user_sequences(trace, &active)) {
    std::size_t end = seq.size();
    while (end > 0) {
      const std::size_t start = end > len ? end - len : 0;
      TsasSequence s{std::vector<int>(len, 0), std::vector<Seconds>(len, origin)};
      const std::size_t offset = len - (end - start);
      for (std::size_t i = start; i < end; ++i) {
        s.items[offset + (i - start)] = model.index_of(seq[i].content);
        s.times[offset + (i - start)] = seq[i].timestamp;
      }
      out.push_back(std::move(s));
      end = start;
    }
  }
  return out;
}

void train_tsas(TsasModel& model, std::span<const TsasSequence> data, int epochs, const EpochCallback& on_epoch) {
  if (data.empty() || model.vocab_size() == 0) return;
  const auto& cfg = model.config();
  constexpr double beta1 = 0.9;
  constexpr double beta2 = 0.999;
  constexpr double eps = 1e-8;

  auto params = model.weights().tensors();
  TsasWeights m1 = model.weights().zeros_like();
  TsasWeights m2 = model.weights().zeros_like();
  auto m1s = m1.tensors();
  auto m2s = m2.tensors();
  auto sampler = uniform_negative_sampler(model.vocab_size());

  std::mt19937_64 rng(cfg.seed ^ 0x7472616eULL);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  long step = 0;

  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    std::size_t epoch_targets = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch));
      std::vector<TsasSequence> batch;
      for (std::size_t i = start; i < end; ++i) batch.push_back(data[order[i]]);
      auto res = training_loss(model, batch, sampler, rng(), true);
      if (!std::isfinite(res.loss))
        throw TrainingDiverged("non-finite loss at epoch " + std::to_string(epoch + 1) + ", batch starting " +
                               std::to_string(start));
      if (res.targets == 0) continue;
      epoch_loss += res.loss * static_cast<double>(res.targets);
      epoch_targets += res.targets;

      ++step;
      const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      auto grads = res.grads.tensors();
      for (std::size_t t = 0; t < params.size(); ++t) {
        auto& p = *params[t];
        const auto& g = *grads[t];
        auto& a = *m1s[t];
        auto& b = *m2s[t];
        a = beta1 * a + (1.0 - beta1) * g;
        b = beta2 * b + (1.0 - beta2) * g.cwiseProduct(g);
        p.array() -= cfg.lr * (a.array() / bc1) / ((b.array() / bc2).sqrt() + eps);
      }
    }
    const double mean = epoch_targets ? epoch_loss / static_cast<double>(epoch_targets) : 0.0;
    model.epoch_loss().push_back(mean);
    if (on_epoch) on_epoch(epoch + 1, mean);
  }
}

void save_tsas(const TsasModel& model, const Trace& names, const std::filesystem::path& stem) {
  auto bin_path = stem;
  bin_path += ".bin";
  auto json_path = stem;
  json_path += ".json";

  std::ofstream bin(bin_path, std::ios::binary);
  if (!bin) throw std::runtime_error("cannot write " + bin_path.string());
  nlohmann::json shapes = nlohmann::json::array();
  for (const Mat* m : model.weights().tensors()) {
    bin.write(reinterpret_cast<const char*>(m->data()), static_cast<std::streamsize>(m->size() * sizeof(double)));
    shapes.push_back({m->rows(), m->cols()});
  }

  const auto& c = model.config();
  nlohmann::json manifest;
  manifest["format"] = "pec-tsas-v1";
  manifest["dtype"] = "float64-le";
  manifest["hyper_parameters"] = {{"d", c.d},           {"n_blocks", c.n_blocks},
                                  {"seq_len", c.seq_len}, {"k_cap", c.k_cap},
                                  {"interval_unit_s", c.interval_unit_s}, {"drop_rate", c.drop_rate},
                                  {"lr", c.lr},         {"batch", c.batch},
                                  {"epochs", c.epochs}, {"init_std", c.init_std}};
  manifest["seed"] = c.seed;
  manifest["initializer"] = "truncated normal (2 std), std = init_std; not taken from the reference setup";
  manifest["shapes"] = shapes;
  manifest["epoch_loss"] = model.epoch_loss();
  nlohmann::json vocab = nlohmann::json::array();
  for (ContentId v : model.vocab()) vocab.push_back(names.name(v));
  manifest["vocab"] = vocab;
  std::ofstream js(json_path);
  js << manifest.dump(2) << '\n';
}

TsasModel load_tsas(const std::filesystem::path& stem, const Trace& names) {
  auto bin_path = stem;
  bin_path += ".bin";
  auto json_path = stem;
  json_path += ".json";
  std::ifstream js(json_path);
  if (!js) throw ParseError("missing TSAS manifest " + json_path.string());
  nlohmann::json manifest = nlohmann::json::parse(js);

  TsasConfig c;
  const auto& h = manifest.at("hyper_parameters");
  h.at("d").get_to(c.d);
  h.at("n_blocks").get_to(c.n_blocks);
  h.at("seq_len").get_to(c.seq_len);
  h.at("k_cap").get_to(c.k_cap);
  h.at("interval_unit_s").get_to(c.interval_unit_s);
  h.at("drop_rate").get_to(c.drop_rate);
  h.at("lr").get_to(c.lr);
  h.at("batch").get_to(c.batch);
  h.at("epochs").get_to(c.epochs);
  h.at("init_std").get_to(c.init_std);
  manifest.at("seed").get_to(c.seed);

  std::vector<ContentId> vocab;
  for (const auto& n : manifest.at("vocab")) {
    auto id = names.find_content(n.get<std::string>());
    if (!id) throw ParseError("TSAS vocabulary content '" + n.get<std::string>() + "' is not in the trace");
    vocab.push_back(*id);
  }
  TsasModel model(c, vocab);
  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw ParseError("missing TSAS tensors " + bin_path.string());
  const auto& shapes = manifest.at("shapes");
  auto tensors = model.weights().tensors();
  if (shapes.size() != tensors.size()) throw ParseError("TSAS manifest tensor count mismatch");
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    if (shapes[i][0].get<Eigen::Index>() != tensors[i]->rows() || shapes[i][1].get<Eigen::Index>() != tensors[i]->cols())
      throw ParseError("TSAS manifest shape mismatch at tensor " + std::to_string(i));
    bin.read(reinterpret_cast<char*>(tensors[i]->data()), static_cast<std::streamsize>(tensors[i]->size() * sizeof(double)));
    if (!bin) throw ParseError("TSAS tensor file is truncated");
  }
  model.epoch_loss() = manifest.at("epoch_loss").get<std::vector<double>>();
  return model;
}

}  // namespace pec
