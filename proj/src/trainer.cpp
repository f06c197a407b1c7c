#include "hga/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "hga/adam.hpp"
#include "hga/error.hpp"
#include "hga/synth.hpp"

namespace hga {
namespace {

// Seed streams derived from TrainConfig::seed.
constexpr std::uint64_t kDropoutStream = 2;
constexpr std::uint64_t kShuffleStreamBase = 1000;

class BatchSampler {
 public:
  BatchSampler(std::size_t n, std::uint64_t seed) : n_(n), seed_(seed) { reshuffle(); }

  std::size_t next() {
    if (cursor_ == order_.size()) {
      ++epoch_;
      reshuffle();
    }
    return order_[cursor_++];
  }

 private:
  void reshuffle() {
    order_.resize(n_);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::mt19937_64 rng(derive_seed(seed_, kShuffleStreamBase + epoch_));
    std::shuffle(order_.begin(), order_.end(), rng);
    cursor_ = 0;
  }

  std::size_t n_;
  std::uint64_t seed_;
  std::uint64_t epoch_ = 0;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

EvalReport evaluate_examples(const Model& model, const std::vector<Example>& examples) {
  EvalAccumulator acc(model.labels());
  for (const Example& ex : examples) acc.add(model.predict(ex), ex.gold);
  return acc.report();
}

struct Calibrated {
  double threshold = 0.0;
  EvalReport report;
};

// Scores each example once and decodes it at every grid threshold.
Calibrated calibrate_threshold(const Model& model, const std::vector<Example>& examples,
                               const std::vector<double>& grid) {
  std::vector<EvalAccumulator> accs(grid.size(), EvalAccumulator(model.labels()));
  for (const Example& ex : examples) {
    const ScoreTensor s = model.scores(ex);
    for (std::size_t g = 0; g < grid.size(); ++g)
      accs[g].add(decode(s, DecodeConfig{grid[g], OverlapPolicy::kGreedyByScore}), ex.gold);
  }
  Calibrated best{grid.front(), accs.front().report()};
  for (std::size_t g = 1; g < grid.size(); ++g) {
    EvalReport r = accs[g].report();
    if (r.scores.f1 > best.report.scores.f1) best = Calibrated{grid[g], std::move(r)};
  }
  return best;
}

}  // namespace

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

EvalReport evaluate_model(const Model& model, const std::vector<Document>& docs) {
  std::vector<Example> examples;
  examples.reserve(docs.size());
  for (const Document& d : docs) examples.push_back(model.prepare(d));
  return evaluate_examples(model, examples);
}

TrainResult train(const TrainConfig& cfg, const LabelSet& labels, const std::vector<Document>& train_docs,
                  const std::vector<Document>& dev_docs) {
  if (train_docs.empty()) throw InvalidArgument("training set is empty");
  Model model = Model::create(cfg, build_vocab(train_docs, cfg.min_count), labels);
  const TrainConfig& c = model.config();

  std::vector<Example> train_set;
  train_set.reserve(train_docs.size());
  for (const Document& d : train_docs) train_set.push_back(model.prepare(d));
  std::vector<Example> dev_set;
  dev_set.reserve(dev_docs.size());
  for (const Document& d : dev_docs) dev_set.push_back(model.prepare(d));

  TrainResult result{model, 0, -1.0, {}, {}};
  BatchSampler sampler(train_set.size(), c.seed);
  std::mt19937_64 dropout_rng(derive_seed(c.seed, kDropoutStream));
  const AdamConfig base_adam{c.lr};
  const double docs_per_step = static_cast<double>(c.batch_size * c.grad_accum);

  double loss_since_eval = 0.0;
  long steps_since_eval = 0;
  auto run_eval = [&](long step) {
    if (step > 0) {
      result.history.push_back({step, "train", "loss", loss_since_eval / static_cast<double>(steps_since_eval)});
      loss_since_eval = 0.0;
      steps_since_eval = 0;
    }
    EvalReport r;
    if (c.head_kind == HeadKind::kHga && !c.threshold_grid.empty()) {
      Calibrated cal = calibrate_threshold(model, dev_set, c.threshold_grid);
      model.set_threshold(cal.threshold);
      result.history.push_back({step, "dev", "threshold", cal.threshold});
      r = std::move(cal.report);
    } else {
      r = evaluate_examples(model, dev_set);
    }
    result.history.push_back({step, "dev", "precision", r.scores.precision});
    result.history.push_back({step, "dev", "recall", r.scores.recall});
    result.history.push_back({step, "dev", "f1", r.scores.f1});
    if (r.scores.f1 > result.best_dev_f1) {
      result.best_dev_f1 = r.scores.f1;
      result.best_step = step;
      result.best = model;
    }
  };

  run_eval(0);
  for (long step = 1; step <= c.max_steps; ++step) {
    model.params().zero_grad();
    double step_loss = 0.0;
    for (std::size_t micro = 0; micro < c.grad_accum; ++micro) {
      for (std::size_t b = 0; b < c.batch_size; ++b) {
        const Example& ex = train_set[sampler.next()];
        try {
          Tape tape;
          const Var loss = model.loss(tape, ex, &dropout_rng);
          step_loss += tape.value(loss).item();
          model.params().accumulate(tape.backward(loss), 1.0 / docs_per_step);
        } catch (const NumericError& e) {
          throw NumericError("training diverged at step " + std::to_string(step) + " on document '" + ex.doc_id +
                             "': " + e.what());
        }
      }
    }
    step_loss /= docs_per_step;
    if (!std::isfinite(step_loss)) throw NumericError("training diverged at step " + std::to_string(step));
    result.step_losses.push_back(step_loss);
    loss_since_eval += step_loss;
    ++steps_since_eval;

    AdamConfig adam = base_adam;
    if (c.warmup_steps > 0 && step <= c.warmup_steps) {
      adam.lr *= static_cast<double>(step) / static_cast<double>(c.warmup_steps);
    } else if (c.linear_decay) {
      adam.lr *= static_cast<double>(c.max_steps - step + 1) / static_cast<double>(c.max_steps - c.warmup_steps + 1);
    }
    adam_step(model.params(), adam, step);

    if ((c.eval_every > 0 && step % c.eval_every == 0) || step == c.max_steps) run_eval(step);
  }
  return result;
}

std::string history_csv(const std::vector<HistoryRow>& rows) {
  std::string out = "step,split,metric,value\n";
  for (const HistoryRow& r : rows) {
    out += std::to_string(r.step) + "," + r.split + "," + r.metric + "," + format_value(r.value) + "\n";
  }
  return out;
}

std::vector<SweepRow> sweep_balance(const TrainConfig& cfg, const std::vector<double>& values, const LabelSet& labels,
                                    const std::vector<Document>& train_docs, const std::vector<Document>& dev_docs,
                                    const std::vector<Document>& eval_docs) {
  for (double b : values) validate(BalanceConfig{b});
  std::vector<SweepRow> rows;
  for (double b : values) {
    TrainConfig c = cfg;
    c.balance_b = b;
    const TrainResult r = train(c, labels, train_docs, dev_docs);
    rows.push_back({b, evaluate_model(r.best, eval_docs).scores.f1});
  }
  return rows;
}

std::string sweep_tsv(const std::vector<SweepRow>& rows) {
  std::string out = "b\tf1\n";
  char buf[32];
  for (const SweepRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.2f", r.b);
    out += std::string(buf) + "\t" + format_value(r.f1) + "\n";
  }
  return out;
}

std::vector<HeadRow> compare_heads(const TrainConfig& cfg, const LabelSet& labels,
                                   const std::vector<Document>& train_docs, const std::vector<Document>& dev_docs,
                                   const std::vector<Document>& eval_docs) {
  std::vector<HeadRow> rows;
  for (HeadKind kind : {HeadKind::kLinear, HeadKind::kMlp, HeadKind::kHga}) {
    TrainConfig c = cfg;
    c.head_kind = kind;
    const TrainResult r = train(c, labels, train_docs, dev_docs);
    rows.push_back({kind, evaluate_model(r.best, eval_docs).scores});
  }
  return rows;
}

std::string heads_tsv(const std::vector<HeadRow>& rows) {
  std::string out = "head\tprecision\trecall\tf1\n";
  for (const HeadRow& r : rows) {
    out += std::string(to_string(r.head)) + "\t" + format_value(r.scores.precision) + "\t" +
           format_value(r.scores.recall) + "\t" + format_value(r.scores.f1) + "\n";
  }
  return out;
}

}  // namespace hga
