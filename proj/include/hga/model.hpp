#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hga/baseline_heads.hpp"
#include "hga/decode.hpp"
#include "hga/document.hpp"
#include "hga/encoder.hpp"
#include "hga/hga_head.hpp"
#include "hga/loss.hpp"
#include "hga/params.hpp"
#include "hga/vocab.hpp"

namespace hga {

enum class HeadKind { kHga, kLinear, kMlp };

const char* to_string(HeadKind kind);
HeadKind parse_head_kind(const std::string& s);

// Everything needed to rebuild a model and re-run its training.
struct TrainConfig {
  HeadKind head_kind = HeadKind::kHga;
  PositionMode position_mode = PositionMode::kSpan;
  double balance_b = 0.0;
  double lr = 1e-3;
  std::size_t batch_size = 4;
  std::size_t grad_accum = 1;
  long max_steps = 2000;
  long warmup_steps = 0;
  // When set, the learning rate falls linearly to zero at max_steps after warmup.
  bool linear_decay = false;
  std::uint64_t seed = 0;
  long eval_every = 100;
  std::size_t max_seq_len = 512;
  int min_count = 1;

  // Head and decoding.
  std::size_t head_hidden = 64;
  double rope_base = 10000.0;
  double mask_value = -1e12;
  double threshold = 0.0;
  // When non-empty (hga head only), each dev evaluation decodes at every value
  // and the best one, first in grid order on ties, becomes `threshold`.
  std::vector<double> threshold_grid;
  double mlp_dropout = 0.1;
  // Training-time probability of replacing a real token with <unk>.
  double word_dropout = 0.0;
  Activation mlp_activation = Activation::kGelu;

  EncoderConfig encoder;
};

void validate(const TrainConfig& cfg);
nlohmann::ordered_json to_json(const TrainConfig& cfg);
// Missing keys keep their defaults; unknown keys are rejected.
TrainConfig train_config_from_json(const nlohmann::json& j);
TrainConfig load_train_config(const std::filesystem::path& path);

// A document prepared for the model: padding trimmed, gold spans attached.
struct Example {
  std::string doc_id;
  TokenSequence seq;
  std::vector<std::optional<Box>> boxes;
  PageSize page = kDefaultPage;
  EntitySet gold;
};

class Model {
 public:
  Model(TrainConfig cfg, Vocabulary vocab, LabelSet labels, ParamStore params);

  // Fresh parameters drawn from the seed.
  static Model create(const TrainConfig& cfg, Vocabulary vocab, LabelSet labels);

  const TrainConfig& config() const { return cfg_; }
  const Vocabulary& vocab() const { return vocab_; }
  const LabelSet& labels() const { return labels_; }
  ParamStore& params() { return params_; }
  void set_threshold(double t) { cfg_.threshold = t; }
  const ParamStore& params() const { return params_; }

  HeadConfig head_config() const;
  Example prepare(const Document& doc) const;

  // Scalar training loss of one document. Dropout (MLP head) draws from
  // `dropout_rng` when non-null.
  Var loss(Tape& tape, const Example& ex, std::mt19937_64* dropout_rng = nullptr) const;
  EntitySet predict(const Example& ex) const;
  // Hyperedge scores; only valid for the hga head.
  ScoreTensor scores(const Example& ex) const;

 private:
  TrainConfig cfg_;
  Vocabulary vocab_;
  LabelSet labels_;
  ParamStore params_;
};

// Checkpoint directory: params.bin, model.json (config + labels), vocab.tsv.
void save_model(const std::filesystem::path& dir, const Model& model);
Model load_model(const std::filesystem::path& dir);

}  // namespace hga
