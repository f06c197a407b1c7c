#include "hga/model.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "hga/checkpoint.hpp"
#include "hga/error.hpp"
#include "hga/synth.hpp"
#include "hga/tokenizer.hpp"

namespace hga {

const char* to_string(HeadKind kind) {
  switch (kind) {
    case HeadKind::kHga:
      return "hga";
    case HeadKind::kLinear:
      return "linear";
    case HeadKind::kMlp:
      return "mlp";
  }
  return "?";
}

HeadKind parse_head_kind(const std::string& s) {
  if (s == "hga") return HeadKind::kHga;
  if (s == "linear") return HeadKind::kLinear;
  if (s == "mlp") return HeadKind::kMlp;
  throw InvalidArgument("unknown head kind '" + s + "' (expected hga, linear or mlp)");
}

void validate(const TrainConfig& cfg) {
  if (!(cfg.lr > 0.0)) throw InvalidArgument("lr must be positive");
  if (cfg.batch_size < 1) throw InvalidArgument("batch_size must be at least 1");
  if (cfg.grad_accum < 1) throw InvalidArgument("grad_accum must be at least 1");
  if (cfg.max_steps < 0) throw InvalidArgument("max_steps must be non-negative");
  if (cfg.warmup_steps < 0) throw InvalidArgument("warmup_steps must be non-negative");
  if (cfg.eval_every < 0) throw InvalidArgument("eval_every must be non-negative");
  if (cfg.max_seq_len < 1) throw InvalidArgument("max_seq_len must be at least 1");
  if (!(cfg.word_dropout >= 0.0 && cfg.word_dropout < 1.0)) throw InvalidArgument("word_dropout must lie in [0, 1)");
  validate(BalanceConfig{cfg.balance_b});
  for (double t : cfg.threshold_grid)
    if (!std::isfinite(t)) throw InvalidArgument("threshold_grid values must be finite");
  if (cfg.head_kind == HeadKind::kHga) {
    HeadConfig hc;
    hc.head_hidden = cfg.head_hidden;
    hc.rope_base = cfg.rope_base;
    validate(hc);
  }
  EncoderConfig enc = cfg.encoder;
  enc.max_seq_len = cfg.max_seq_len;
  validate(enc);
}

nlohmann::ordered_json to_json(const TrainConfig& cfg) {
  nlohmann::ordered_json enc = {{"hidden", cfg.encoder.hidden},
                                {"layers", cfg.encoder.layers},
                                {"attn_heads", cfg.encoder.attn_heads},
                                {"ffn_size", cfg.encoder.ffn_size},
                                {"use_layout", cfg.encoder.use_layout},
                                {"layout_buckets", cfg.encoder.layout_buckets},
                                {"dropout", cfg.encoder.dropout}};
  return {{"head_kind", to_string(cfg.head_kind)},
          {"position_mode", to_string(cfg.position_mode)},
          {"balance_b", cfg.balance_b},
          {"lr", cfg.lr},
          {"batch_size", cfg.batch_size},
          {"grad_accum", cfg.grad_accum},
          {"max_steps", cfg.max_steps},
          {"warmup_steps", cfg.warmup_steps},
          {"linear_decay", cfg.linear_decay},
          {"seed", cfg.seed},
          {"eval_every", cfg.eval_every},
          {"max_seq_len", cfg.max_seq_len},
          {"min_count", cfg.min_count},
          {"head_hidden", cfg.head_hidden},
          {"rope_base", cfg.rope_base},
          {"mask_value", cfg.mask_value},
          {"threshold", cfg.threshold},
          {"threshold_grid", cfg.threshold_grid},
          {"mlp_dropout", cfg.mlp_dropout},
          {"word_dropout", cfg.word_dropout},
          {"mlp_activation", cfg.mlp_activation == Activation::kTanh ? "tanh" : "gelu"},
          {"encoder", std::move(enc)}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  static const std::set<std::string> kKeys = {
      "head_kind", "position_mode", "balance_b",  "lr",          "batch_size", "grad_accum",  "max_steps",
      "warmup_steps", "linear_decay", "seed",       "eval_every", "max_seq_len", "min_count",  "head_hidden", "rope_base",
      "mask_value", "threshold", "threshold_grid",    "mlp_dropout", "mlp_activation", "word_dropout", "encoder"};
  static const std::set<std::string> kEncoderKeys = {"hidden",     "layers",     "attn_heads",
                                                     "ffn_size",   "use_layout", "layout_buckets", "dropout"};
  if (!j.is_object()) throw SchemaError("train config must be a JSON object");
  for (const auto& [k, _] : j.items())
    if (!kKeys.count(k)) throw SchemaError("unknown train config key: " + k);

  TrainConfig cfg;
  try {
    if (j.contains("head_kind")) cfg.head_kind = parse_head_kind(j["head_kind"].get<std::string>());
    if (j.contains("position_mode")) cfg.position_mode = parse_position_mode(j["position_mode"].get<std::string>());
    if (j.contains("balance_b")) cfg.balance_b = j["balance_b"].get<double>();
    if (j.contains("lr")) cfg.lr = j["lr"].get<double>();
    if (j.contains("batch_size")) cfg.batch_size = j["batch_size"].get<std::size_t>();
    if (j.contains("grad_accum")) cfg.grad_accum = j["grad_accum"].get<std::size_t>();
    if (j.contains("max_steps")) cfg.max_steps = j["max_steps"].get<long>();
    if (j.contains("warmup_steps")) cfg.warmup_steps = j["warmup_steps"].get<long>();
    if (j.contains("linear_decay")) cfg.linear_decay = j["linear_decay"].get<bool>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("eval_every")) cfg.eval_every = j["eval_every"].get<long>();
    if (j.contains("max_seq_len")) cfg.max_seq_len = j["max_seq_len"].get<std::size_t>();
    if (j.contains("min_count")) cfg.min_count = j["min_count"].get<int>();
    if (j.contains("head_hidden")) cfg.head_hidden = j["head_hidden"].get<std::size_t>();
    if (j.contains("rope_base")) cfg.rope_base = j["rope_base"].get<double>();
    if (j.contains("mask_value")) cfg.mask_value = j["mask_value"].get<double>();
    if (j.contains("threshold")) cfg.threshold = j["threshold"].get<double>();
    if (j.contains("threshold_grid")) cfg.threshold_grid = j["threshold_grid"].get<std::vector<double>>();
    if (j.contains("mlp_dropout")) cfg.mlp_dropout = j["mlp_dropout"].get<double>();
    if (j.contains("word_dropout")) cfg.word_dropout = j["word_dropout"].get<double>();
    if (j.contains("mlp_activation")) {
      const auto a = j["mlp_activation"].get<std::string>();
      if (a != "tanh" && a != "gelu") throw SchemaError("mlp_activation must be tanh or gelu");
      cfg.mlp_activation = a == "tanh" ? Activation::kTanh : Activation::kGelu;
    }
    if (j.contains("encoder")) {
      const auto& e = j["encoder"];
      if (!e.is_object()) throw SchemaError("encoder config must be an object");
      for (const auto& [k, _] : e.items())
        if (!kEncoderKeys.count(k)) throw SchemaError("unknown encoder config key: " + k);
      if (e.contains("hidden")) cfg.encoder.hidden = e["hidden"].get<std::size_t>();
      if (e.contains("layers")) cfg.encoder.layers = e["layers"].get<std::size_t>();
      if (e.contains("attn_heads")) cfg.encoder.attn_heads = e["attn_heads"].get<std::size_t>();
      if (e.contains("ffn_size")) cfg.encoder.ffn_size = e["ffn_size"].get<std::size_t>();
      if (e.contains("use_layout")) cfg.encoder.use_layout = e["use_layout"].get<bool>();
      if (e.contains("layout_buckets")) cfg.encoder.layout_buckets = e["layout_buckets"].get<std::size_t>();
      if (e.contains("dropout")) cfg.encoder.dropout = e["dropout"].get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("bad train config value: ") + e.what());
  }
  cfg.encoder.max_seq_len = cfg.max_seq_len;
  validate(cfg);
  return cfg;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": malformed JSON at byte offset " + std::to_string(e.byte));
  }
  return train_config_from_json(j);
}

Model::Model(TrainConfig cfg, Vocabulary vocab, LabelSet labels, ParamStore params)
    : cfg_(std::move(cfg)), vocab_(std::move(vocab)), labels_(std::move(labels)), params_(std::move(params)) {
  cfg_.encoder.max_seq_len = cfg_.max_seq_len;
  validate(cfg_);
}

Model Model::create(const TrainConfig& cfg, Vocabulary vocab, LabelSet labels) {
  TrainConfig c = cfg;
  c.encoder.max_seq_len = c.max_seq_len;
  validate(c);
  if (labels.size() == 0) throw InvalidArgument("model needs at least one entity type");
  std::mt19937_64 rng(derive_seed(c.seed, 1));
  ParamStore params;
  init_encoder(params, c.encoder, vocab.size(), rng);
  switch (c.head_kind) {
    case HeadKind::kHga: {
      HeadConfig hc;
      hc.num_types = labels.size();
      hc.head_hidden = c.head_hidden;
      init_hga_head(params, hc, c.encoder.hidden, rng);
      break;
    }
    case HeadKind::kLinear:
      init_linear_head(params, labels.size(), c.encoder.hidden, rng);
      break;
    case HeadKind::kMlp:
      init_mlp_head(params, labels.size(), c.encoder.hidden, MlpConfig{0, c.mlp_activation, c.mlp_dropout}, rng);
      break;
  }
  return Model(c, std::move(vocab), std::move(labels), std::move(params));
}

HeadConfig Model::head_config() const {
  HeadConfig hc;
  hc.num_types = labels_.size();
  hc.head_hidden = cfg_.head_hidden;
  hc.rope_base = cfg_.rope_base;
  hc.mask_value = cfg_.mask_value;
  hc.position_mode = cfg_.position_mode;
  return hc;
}

Example Model::prepare(const Document& doc) const {
  const TokenSequence full = tokenize(doc, vocab_, cfg_.max_seq_len);
  Example ex;
  ex.doc_id = doc.id;
  ex.gold = gold_entities(doc, full, labels_);
  ex.seq = full.trimmed();
  auto boxes = token_boxes(doc, full);
  ex.boxes.assign(boxes.begin(), boxes.begin() + static_cast<std::ptrdiff_t>(ex.seq.length()));
  if (doc.page_size) ex.page = *doc.page_size;
  return ex;
}

Var Model::loss(Tape& tape, const Example& ex, std::mt19937_64* dropout_rng) const {
  TokenSequence dropped;
  const TokenSequence* seq = &ex.seq;
  if (dropout_rng && cfg_.word_dropout > 0.0) {
    dropped = ex.seq;
    std::bernoulli_distribution replace(cfg_.word_dropout);
    for (std::size_t i = 0; i < dropped.length(); ++i)
      if (dropped.attention_keep[i] && replace(*dropout_rng)) dropped.token_ids[i] = Vocabulary::kUnk;
    seq = &dropped;
  }
  const Var h = encode(tape, params_, cfg_.encoder, *seq, ex.boxes, ex.page, dropout_rng);
  const std::size_t d = labels_.size();
  switch (cfg_.head_kind) {
    case HeadKind::kHga: {
      const HeadConfig hc = head_config();
      const auto positions = head_positions(ex.seq, hc.position_mode);
      const auto per_type = score(tape, h, positions, params_, hc, ex.seq.attention_keep);
      const auto labels = build_labels(ex.gold, ex.seq.length(), d, ex.seq.attention_keep);
      return balanced_loss(tape, per_type, labels, BalanceConfig{cfg_.balance_b});
    }
    case HeadKind::kLinear:
      return tape.cross_entropy_rows(linear_logits(tape, h, params_), tag_targets(ex.gold, ex.seq.attention_keep, d));
    case HeadKind::kMlp: {
      const MlpConfig mc{0, cfg_.mlp_activation, cfg_.mlp_dropout};
      return tape.cross_entropy_rows(mlp_logits(tape, h, params_, mc, dropout_rng),
                                     tag_targets(ex.gold, ex.seq.attention_keep, d));
    }
  }
  throw InvalidArgument("unhandled head kind");
}

ScoreTensor Model::scores(const Example& ex) const {
  if (cfg_.head_kind != HeadKind::kHga) throw InvalidArgument("score tensors exist only for the hga head");
  Tape tape(Tape::Mode::kInference);
  const Var h = encode(tape, params_, cfg_.encoder, ex.seq, ex.boxes, ex.page);
  const HeadConfig hc = head_config();
  const auto per_type = score(tape, h, head_positions(ex.seq, hc.position_mode), params_, hc, ex.seq.attention_keep);
  return to_score_tensor(tape, per_type, ex.seq.attention_keep);
}

EntitySet Model::predict(const Example& ex) const {
  if (cfg_.head_kind == HeadKind::kHga) {
    return decode(scores(ex), DecodeConfig{cfg_.threshold, OverlapPolicy::kGreedyByScore});
  }
  Tape tape(Tape::Mode::kInference);
  const Var h = encode(tape, params_, cfg_.encoder, ex.seq, ex.boxes, ex.page);
  const Var logits = cfg_.head_kind == HeadKind::kLinear
                         ? linear_logits(tape, h, params_)
                         : mlp_logits(tape, h, params_, MlpConfig{0, cfg_.mlp_activation, cfg_.mlp_dropout}, nullptr);
  return decode_tags(tape.value(logits), ex.seq.attention_keep, labels_.size());
}

void save_model(const std::filesystem::path& dir, const Model& model) {
  std::filesystem::create_directories(dir);
  save_params(dir / "params.bin", model.params());
  model.vocab().save(dir / "vocab.tsv");
  nlohmann::ordered_json j;
  j["config"] = to_json(model.config());
  j["labels"] = model.labels().types();
  std::ofstream out(dir / "model.json", std::ios::trunc);
  if (!out) throw Error("cannot write " + (dir / "model.json").string());
  out << j.dump(2) << "\n";
}

Model load_model(const std::filesystem::path& dir) {
  std::ifstream in(dir / "model.json");
  if (!in) throw Error("not a model checkpoint directory (missing model.json): " + dir.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError((dir / "model.json").string() + ": malformed JSON at byte offset " + std::to_string(e.byte));
  }
  TrainConfig cfg = train_config_from_json(j.at("config"));
  LabelSet labels(j.at("labels").get<std::vector<std::string>>());
  Vocabulary vocab = Vocabulary::load(dir / "vocab.tsv");
  // Reference layout from a fresh model: every expected tensor must be present with the right shape.
  const Model reference = Model::create(cfg, vocab, labels);
  ParamStore params = load_params(dir / "params.bin");
  for (const auto& [name, p] : reference.params().entries()) {
    if (!params.contains(name)) throw SchemaError("checkpoint is missing parameter " + name);
    if (params.value(name).shape() != p.value.shape()) throw SchemaError("checkpoint parameter has wrong shape: " + name);
  }
  if (params.size() != reference.params().size()) throw SchemaError("checkpoint has unexpected parameters");
  return Model(std::move(cfg), std::move(vocab), std::move(labels), std::move(params));
}

}  // namespace hga
