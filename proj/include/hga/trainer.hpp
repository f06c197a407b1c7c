#pragma once

#include <string>
#include <vector>

#include "hga/evaluate.hpp"
#include "hga/model.hpp"

namespace hga {

// One row of the metric history CSV "step,split,metric,value".
struct HistoryRow {
  long step = 0;
  std::string split;
  std::string metric;
  double value = 0.0;
};

struct TrainResult {
  Model best;
  long best_step = 0;
  double best_dev_f1 = 0.0;
  std::vector<HistoryRow> history;
  // Mean per-step training loss, indexed by step - 1.
  std::vector<double> step_losses;
};

// Runs cfg.max_steps Adam steps over seeded per-epoch shuffles of the
// training documents (batch_size documents per micro-batch, grad_accum
// micro-batches per step, loss averaged over the documents of a step).
// Evaluates on dev at step 0, every eval_every steps and at the last step;
// the returned model is the first checkpoint with the highest dev F1.
// Throws NumericError naming the step if the loss diverges.
TrainResult train(const TrainConfig& cfg, const LabelSet& labels, const std::vector<Document>& train_docs,
                  const std::vector<Document>& dev_docs);

EvalReport evaluate_model(const Model& model, const std::vector<Document>& docs);

std::string history_csv(const std::vector<HistoryRow>& rows);

struct SweepRow {
  double b = 0.0;
  double f1 = 0.0;
};

// One full training run per balance factor with the same seed; F1 is the
// best checkpoint's score on eval_docs.
std::vector<SweepRow> sweep_balance(const TrainConfig& cfg, const std::vector<double>& values, const LabelSet& labels,
                                    const std::vector<Document>& train_docs, const std::vector<Document>& dev_docs,
                                    const std::vector<Document>& eval_docs);
std::string sweep_tsv(const std::vector<SweepRow>& rows);

struct HeadRow {
  HeadKind head = HeadKind::kHga;
  Scores scores;
};

// Trains the linear, MLP and hga heads under an identical budget, encoder
// config and seed; scores are on eval_docs.
std::vector<HeadRow> compare_heads(const TrainConfig& cfg, const LabelSet& labels,
                                   const std::vector<Document>& train_docs, const std::vector<Document>& dev_docs,
                                   const std::vector<Document>& eval_docs);
std::string heads_tsv(const std::vector<HeadRow>& rows);

// Formats a double for the CSV/TSV outputs.
std::string format_value(double v);

}  // namespace hga
