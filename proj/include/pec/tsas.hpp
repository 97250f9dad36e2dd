#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "pec/trace.hpp"

namespace pec {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct TsasConfig {
  int d = 50;
  int n_blocks = 2;
  int seq_len = 50;
  /// Largest interval bucket; intervals are counted in `interval_unit_s`.
  int k_cap = 300;
  Seconds interval_unit_s = 60.0;
  double drop_rate = 0.2;
  double lr = 0.001;
  int batch = 128;
  int epochs = 5;
  double init_std = 0.02;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Maps an elapsed time to an interval bucket in [0, k_cap].
int quantize_interval(Seconds delta_t, int k_cap = 300, Seconds unit = 60.0);

/// Every trainable tensor of the model. Bias and gain vectors are 1 x d.
struct TsasWeights {
  struct Block {
    Mat wq, wk, wv;
    Mat w1, b1, w2, b2;
    Mat ln_gain, ln_bias;
  };

  Mat content_emb;     // (V + 1) x d, row 0 is padding
  Mat interval_key;    // (k_cap + 1) x d
  Mat interval_value;  // (k_cap + 1) x d
  std::vector<Block> blocks;

  std::vector<Mat*> tensors();
  std::vector<const Mat*> tensors() const;
  /// Same shapes, all zero.
  TsasWeights zeros_like() const;
};

/// A left-padded request window. Index 0 is the padding item; padding
/// entries form a contiguous prefix and carry the trace-origin timestamp.
struct TsasSequence {
  std::vector<int> items;
  std::vector<Seconds> times;
};

/// Intermediate values of one forward pass, kept for backprop and inspection.
///
/// Rows are positions of the sequence with one extra leading padding row, so
/// row r holds the state after request r (1-based) and row 0 is the empty
/// context. The representation used to predict request i is row i-1.
struct ForwardPass {
  struct BlockState {
    Mat input, q, k, v;
    Mat attention;  // rows x rows, zero outside the causal non-padding set
    Mat z, u, a, f, mask, s, xhat;
    Eigen::VectorXd inv_sigma;
    Mat output;
  };
  std::vector<int> items;
  std::vector<int> buckets;  // rows x rows, row-major
  std::vector<char> valid;
  std::vector<BlockState> blocks;

  std::size_t rows() const { return items.size(); }
  const Mat& output() const { return blocks.back().output; }
};

class TsasModel {
 public:
  TsasModel() = default;
  /// Random initialisation: truncated normal (2 std) with `init_std`, layer
  /// norm gains 1, biases 0. `vocab` holds the contents of indices 1..V.
  TsasModel(TsasConfig cfg, std::vector<ContentId> vocab);

  const TsasConfig& config() const { return cfg_; }
  TsasWeights& weights() { return w_; }
  const TsasWeights& weights() const { return w_; }
  const std::vector<ContentId>& vocab() const { return vocab_; }
  int vocab_size() const { return static_cast<int>(vocab_.size()); }
  /// 0 when the content is not in the vocabulary.
  int index_of(ContentId c) const;
  ContentId content_at(int index) const { return vocab_.at(static_cast<std::size_t>(index - 1)); }

  std::vector<double>& epoch_loss() { return epoch_loss_; }
  const std::vector<double>& epoch_loss() const { return epoch_loss_; }

  /// Runs every block. Dropout is applied only when `rng` is non-null.
  ForwardPass forward(const TsasSequence& seq, std::mt19937_64* rng = nullptr) const;

  /// Scores `candidates` (vocabulary indices) for request `position`
  /// (1-based; seq_len + 1 means the request after the window).
  std::vector<double> forward_scores(const TsasSequence& seq, int position, std::span<const int> candidates,
                                     std::mt19937_64* rng = nullptr) const;

  /// Softmax weights of `block` used for request `position`, indexed by
  /// request (1-based position p at index p-1).
  std::vector<double> attention_weights(const ForwardPass& pass, int block, int position) const;

  /// Builds the inference window from a chronological history of
  /// (content, timestamp); unknown contents are skipped.
  TsasSequence window_from_history(std::span<const ContentId> contents, std::span<const Seconds> times,
                                   Seconds origin = 0.0) const;

  /// Scores every vocabulary content for the request after `seq` and returns
  /// the top `n_out`, ties by content id.
  std::vector<ScoredContent> topn(const TsasSequence& seq, int n_out) const;

  void backward(const ForwardPass& pass, const Mat& d_output, TsasWeights& grads) const;

 private:
  TsasConfig cfg_;
  std::vector<ContentId> vocab_;
  std::unordered_map<std::uint32_t, int> index_;
  TsasWeights w_;
  std::vector<double> epoch_loss_;
};

/// Negative sampler: picks a vocabulary index different from `target`.
using NegativeSampler = std::function<int(int target, std::mt19937_64& rng)>;

NegativeSampler uniform_negative_sampler(int vocab_size);

struct LossResult {
  double loss = 0.0;
  std::size_t targets = 0;
  TsasWeights grads;
};

/// Sampled binary cross-entropy over every non-padding position, one
/// negative per position, averaged over positions; gradients for every
/// tensor. Dropout and negatives are drawn from `rng_seed`.
LossResult training_loss(const TsasModel& model, std::span<const TsasSequence> batch, const NegativeSampler& sampler,
                         std::uint64_t rng_seed, bool train_mode = true);

/// Raised when training produces a non-finite loss.
class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Splits each active user's training history into seq_len windows ending at
/// the user's last request.
std::vector<TsasSequence> make_training_sequences(const Trace& trace, const ActiveSets& active, const TsasModel& model);

/// Vocabulary of active contents in id order.
std::vector<ContentId> active_vocabulary(const ActiveSets& active);

using EpochCallback = std::function<void(int epoch, double loss)>;

/// Adam training; appends the mean per-position loss of every epoch.
void train_tsas(TsasModel& model, std::span<const TsasSequence> data, int epochs, const EpochCallback& on_epoch = {});

/// Writes `<stem>.bin` (raw tensors) and `<stem>.json` (manifest).
void save_tsas(const TsasModel& model, const Trace& names, const std::filesystem::path& stem);
TsasModel load_tsas(const std::filesystem::path& stem, const Trace& names);

}  // namespace pec
