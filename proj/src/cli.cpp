#include "hga/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "hga/error.hpp"
#include "hga/funsd.hpp"
#include "hga/pipeline_check.hpp"
#include "hga/synth.hpp"
#include "hga/tokenizer.hpp"
#include "hga/trainer.hpp"

namespace hga::cli {
namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

const std::vector<std::string> kFunsdLabels = {"header", "question", "answer"};

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

void write_manifest(const fs::path& dir, const std::string& command, const std::vector<std::string>& args,
                    ojson extra = ojson::object()) {
  ojson m;
  m["command"] = command;
  m["args"] = args;
  m["version"] = kVersion;
  for (auto& [k, v] : extra.items()) m[k] = v;
  write_text(dir / "manifest.json", m.dump(2) + "\n");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

LabelSet resolve_labels(const fs::path& data, const std::string& flag) {
  if (!flag.empty()) return LabelSet(split_list(flag));
  const fs::path root = fs::is_directory(data) ? data : data.parent_path();
  for (const fs::path& candidate : {root / "labels.json", root.parent_path() / "labels.json"}) {
    if (fs::exists(candidate)) {
      std::ifstream in(candidate);
      try {
        return LabelSet(nlohmann::json::parse(in).at("types").get<std::vector<std::string>>());
      } catch (const nlohmann::json::exception& e) {
        throw SchemaError(candidate.string() + ": " + e.what());
      }
    }
  }
  return LabelSet(kFunsdLabels);
}

struct Splits {
  std::vector<Document> train;
  std::vector<Document> dev;
  std::vector<Document> test;

  const std::vector<Document>& eval_set() const { return test.empty() ? dev : test; }
};

// <data>/train is required; dev falls back to test when absent.
Splits load_splits(const fs::path& data, const LabelSet& labels) {
  Splits s;
  if (!fs::is_directory(data / "train")) throw Error("dataset directory has no train/ split: " + data.string());
  s.train = load_funsd_json(data / "train", labels);
  if (fs::is_directory(data / "test")) s.test = load_funsd_json(data / "test", labels);
  if (fs::is_directory(data / "dev")) {
    s.dev = load_funsd_json(data / "dev", labels);
  } else {
    s.dev = s.test;
  }
  return s;
}

struct ConfigOverrides {
  std::string config;
  std::optional<double> balance_b;
  std::optional<std::string> head;
  std::optional<double> threshold;
  std::optional<std::uint64_t> seed;
  std::optional<long> max_steps;
  std::optional<double> lr;
  std::optional<long> eval_every;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "TrainConfig JSON file")->check(CLI::ExistingFile);
    app->add_option("--balance-b", balance_b, "balance factor b in [0,1)");
    app->add_option("--head", head, "head kind")->check(CLI::IsMember({"hga", "linear", "mlp"}));
    app->add_option("--threshold", threshold, "decode threshold");
    app->add_option("--seed", seed, "random seed");
    app->add_option("--max-steps", max_steps, "optimizer steps");
    app->add_option("--lr", lr, "learning rate");
    app->add_option("--eval-every", eval_every, "dev evaluation interval");
  }

  TrainConfig resolve() const {
    TrainConfig cfg = config.empty() ? TrainConfig{} : load_train_config(config);
    if (balance_b) cfg.balance_b = *balance_b;
    if (head) cfg.head_kind = parse_head_kind(*head);
    if (threshold) cfg.threshold = *threshold;
    if (seed) cfg.seed = *seed;
    if (max_steps) cfg.max_steps = *max_steps;
    if (lr) cfg.lr = *lr;
    if (eval_every) cfg.eval_every = *eval_every;
    cfg.encoder.max_seq_len = cfg.max_seq_len;
    validate(cfg);
    return cfg;
  }
};

std::string words_of_span(const Document& doc, const Entity& e) {
  std::vector<std::string> words;
  for (const TextNode& n : doc.nodes)
    for (auto& w : split_words(n.text)) words.push_back(std::move(w));
  std::string out;
  for (int i = e.start; i <= e.end && static_cast<std::size_t>(i) < words.size(); ++i) {
    if (!out.empty()) out += ' ';
    out += words[static_cast<std::size_t>(i)];
  }
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hypergraph attention entity recognition: synthetic data, training and evaluation", "hga"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic FUNSD-format dataset");
  std::uint64_t synth_seed = 7;
  std::size_t n_train = 200;
  std::size_t n_dev = 0;
  std::size_t n_test = 0;
  std::size_t n_types = 3;
  double other_fraction = 0.3;
  std::vector<int> nodes_range{6, 14};
  std::vector<int> tokens_range{1, 4};
  int vocab_per_type = 40;
  std::string synth_out;
  synth->add_option("--seed", synth_seed, "random seed");
  synth->add_option("--n-docs", n_train, "number of training documents");
  synth->add_option("--n-dev", n_dev, "number of dev documents");
  synth->add_option("--n-test", n_test, "number of test documents");
  synth->add_option("--types", n_types, "number of entity types")->check(CLI::PositiveNumber);
  synth->add_option("--other-fraction", other_fraction, "fraction of nodes labeled other")->check(CLI::Range(0.0, 1.0));
  synth->add_option("--nodes", nodes_range, "min max nodes per document")->expected(2);
  synth->add_option("--tokens", tokens_range, "min max tokens per node")->expected(2);
  synth->add_option("--vocab-per-type", vocab_per_type, "word pool size per type");
  synth->add_option("--out", synth_out, "output directory")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "train a model; writes checkpoint, history CSV and manifest");
  ConfigOverrides train_ov;
  train_ov.attach(train_cmd);
  std::string train_data;
  std::string train_out;
  std::string train_labels;
  std::string position_modes;
  train_cmd->add_option("--data", train_data, "dataset directory with train/ and dev/ or test/")->required();
  train_cmd->add_option("--out", train_out, "output directory")->required();
  train_cmd->add_option("--labels", train_labels, "comma-separated entity types");
  train_cmd->add_option("--position-mode", position_modes,
                        "none, token or span; a comma-separated list trains one arm per mode");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint; writes an EvalReport JSON");
  std::string eval_ckpt;
  std::string eval_data;
  std::string eval_out;
  std::optional<double> eval_threshold;
  eval_cmd->add_option("--checkpoint", eval_ckpt, "checkpoint directory")->required()->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--data", eval_data, "FUNSD JSON file or directory")->required()->check(CLI::ExistingPath);
  eval_cmd->add_option("--out", eval_out, "report path (default: stdout)");
  eval_cmd->add_option("--threshold", eval_threshold, "decode threshold");

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "decode entities for each document");
  std::string pred_ckpt;
  std::string pred_data;
  std::string pred_out;
  std::optional<double> pred_threshold;
  predict_cmd->add_option("--checkpoint", pred_ckpt, "checkpoint directory")->required()->check(CLI::ExistingDirectory);
  predict_cmd->add_option("--data", pred_data, "FUNSD JSON file or directory")->required()->check(CLI::ExistingPath);
  predict_cmd->add_option("--out", pred_out, "output JSON path (default: stdout)");
  predict_cmd->add_option("--threshold", pred_threshold, "decode threshold");

  // gradcheck
  auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference check of encoder + hga head + balanced loss");
  PipelineCheckConfig gc;
  double gc_eps = 1e-5;
  double gc_tol = 1e-4;
  grad_cmd->add_option("--L", gc.length, "sequence length")->check(CLI::PositiveNumber);
  grad_cmd->add_option("--D", gc.types, "entity types")->check(CLI::PositiveNumber);
  grad_cmd->add_option("--H", gc.hidden, "encoder width")->check(CLI::PositiveNumber);
  grad_cmd->add_option("--d", gc.head_hidden, "head width (even)")->check(CLI::PositiveNumber);
  grad_cmd->add_option("--seed", gc.seed, "random seed");
  grad_cmd->add_option("--eps", gc_eps, "central-difference step")->check(CLI::Range(1e-7, 1e-3));
  grad_cmd->add_option("--tol", gc_tol, "max relative error allowed");
  grad_cmd->add_option("--balance-b", gc.balance_b, "balance factor b");

  // sweep-b
  auto* sweep_cmd = app.add_subcommand("sweep-b", "train once per balance factor; writes sweep.tsv");
  ConfigOverrides sweep_ov;
  sweep_ov.attach(sweep_cmd);
  std::string sweep_data;
  std::string sweep_out;
  std::string sweep_labels;
  std::string sweep_values = "0.0,0.2,0.4,0.6,0.8";
  sweep_cmd->add_option("--data", sweep_data, "dataset directory")->required();
  sweep_cmd->add_option("--out", sweep_out, "output directory")->required();
  sweep_cmd->add_option("--labels", sweep_labels, "comma-separated entity types");
  sweep_cmd->add_option("--values", sweep_values, "comma-separated b values");

  // compare-heads
  auto* cmp_cmd = app.add_subcommand("compare-heads", "train linear, mlp and hga heads; writes heads.tsv");
  ConfigOverrides cmp_ov;
  cmp_ov.attach(cmp_cmd);
  std::string cmp_data;
  std::string cmp_out;
  std::string cmp_labels;
  cmp_cmd->add_option("--data", cmp_data, "dataset directory")->required();
  cmp_cmd->add_option("--out", cmp_out, "output directory")->required();
  cmp_cmd->add_option("--labels", cmp_labels, "comma-separated entity types");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (synth->parsed()) {
      SynthConfig cfg;
      cfg.seed = synth_seed;
      cfg.n_docs = n_train + n_dev + n_test;
      cfg.labels = synth_label_set(n_types);
      cfg.nodes_per_doc = {nodes_range[0], nodes_range[1]};
      cfg.tokens_per_node = {tokens_range[0], tokens_range[1]};
      cfg.other_fraction = other_fraction;
      cfg.vocab_size_per_type = vocab_per_type;
      const auto docs = gen_dataset(cfg);
      const fs::path root(synth_out);
      // Dev documents come last so that adding a dev split leaves train and
      // test unchanged.
      for (std::size_t i = 0; i < docs.size(); ++i) {
        const char* split = i < n_train ? "train" : (i < n_train + n_test ? "test" : "dev");
        write_text(root / split / (docs[i].id + ".json"), to_funsd_json(docs[i]));
      }
      write_text(root / "labels.json", ojson{{"types", cfg.labels.types()}}.dump(2) + "\n");
      write_manifest(root, command, args, {{"seed", synth_seed}});
      out << "wrote " << docs.size() << " documents to " << root.string() << "\n";
      return kExitOk;
    }

    if (train_cmd->parsed()) {
      TrainConfig cfg = train_ov.resolve();
      const LabelSet labels = resolve_labels(train_data, train_labels);
      const Splits data = load_splits(train_data, labels);
      std::vector<PositionMode> modes;
      for (const auto& m : split_list(position_modes)) modes.push_back(parse_position_mode(m));
      if (modes.empty()) modes.push_back(cfg.position_mode);
      const fs::path root(train_out);
      std::string ablation = "position_mode,step,f1\n";
      for (PositionMode mode : modes) {
        TrainConfig arm = cfg;
        arm.position_mode = mode;
        const fs::path dir = modes.size() == 1 ? root : root / to_string(mode);
        const TrainResult r = train(arm, labels, data.train, data.dev);
        save_model(dir / "best", r.best);
        write_text(dir / "history.csv", history_csv(r.history));
        write_text(dir / "config.json", to_json(arm).dump(2) + "\n");
        write_manifest(dir, command, args, {{"seed", arm.seed}, {"config", to_json(arm)}, {"labels", labels.types()}});
        for (const HistoryRow& row : r.history) {
          if (row.split == "dev" && row.metric == "f1") {
            ablation += std::string(to_string(mode)) + "," + std::to_string(row.step) + "," + format_value(row.value) + "\n";
          }
        }
        out << to_string(mode) << ": best dev f1 " << format_value(r.best_dev_f1) << " at step " << r.best_step << "\n";
      }
      if (modes.size() > 1) {
        write_text(root / "ablation.csv", ablation);
        write_manifest(root, command, args, {{"seed", cfg.seed}});
      }
      return kExitOk;
    }

    if (eval_cmd->parsed() || predict_cmd->parsed()) {
      const bool is_eval = eval_cmd->parsed();
      Model model = load_model(is_eval ? eval_ckpt : pred_ckpt);
      const auto& thr = is_eval ? eval_threshold : pred_threshold;
      if (thr) {
        TrainConfig c = model.config();
        c.threshold = *thr;
        model = Model(c, model.vocab(), model.labels(), model.params());
      }
      const auto docs = load_funsd_json(is_eval ? eval_data : pred_data, model.labels());
      const std::string dest = is_eval ? eval_out : pred_out;
      std::string text;
      if (is_eval) {
        text = to_json(evaluate_model(model, docs)) + "\n";
      } else {
        ojson all = ojson::array();
        for (const Document& d : docs) {
          const Example ex = model.prepare(d);
          ojson ents = ojson::array();
          for (const Entity& e : model.predict(ex)) {
            ents.push_back({{"type", model.labels().name(static_cast<std::size_t>(e.type))},
                            {"start", e.start},
                            {"end", e.end},
                            {"text", words_of_span(d, e)}});
          }
          all.push_back({{"id", d.id}, {"entities", std::move(ents)}});
        }
        text = all.dump(2) + "\n";
      }
      if (dest.empty()) {
        out << text;
      } else {
        write_text(dest, text);
        write_manifest(fs::path(dest).parent_path().empty() ? fs::path(".") : fs::path(dest).parent_path(), command,
                       args);
      }
      return kExitOk;
    }

    if (grad_cmd->parsed()) {
      PipelineCheckConfig c = gc;
      c.padding = std::min<std::size_t>(2, c.length - 1);
      const PipelineFixture fx = make_pipeline_fixture(c);
      ParamStore params = fx.params;
      const GradCheckReport report = finite_diff_check(fx.graph(), params, gc_eps);
      for (const ParamCheck& p : report.params) {
        out << p.name << "\tmax_rel_err=" << p.max_rel_error << "\tmax_abs_err=" << p.max_abs_error << "\n";
      }
      const bool ok = report.passed(gc_tol);
      out << "max rel err " << report.max_rel_error << (ok ? " < " : " >= ") << gc_tol << " (worst: "
          << report.worst_param << ")\n";
      return ok ? kExitOk : kExitRuntime;
    }

    if (sweep_cmd->parsed()) {
      const TrainConfig cfg = sweep_ov.resolve();
      const LabelSet labels = resolve_labels(sweep_data, sweep_labels);
      const Splits data = load_splits(sweep_data, labels);
      std::vector<double> values;
      for (const auto& v : split_list(sweep_values)) values.push_back(std::stod(v));
      const auto rows = sweep_balance(cfg, values, labels, data.train, data.dev, data.eval_set());
      const fs::path root(sweep_out);
      write_text(root / "sweep.tsv", sweep_tsv(rows));
      write_manifest(root, command, args, {{"seed", cfg.seed}, {"config", to_json(cfg)}, {"labels", labels.types()}});
      out << sweep_tsv(rows);
      return kExitOk;
    }

    if (cmp_cmd->parsed()) {
      const TrainConfig cfg = cmp_ov.resolve();
      const LabelSet labels = resolve_labels(cmp_data, cmp_labels);
      const Splits data = load_splits(cmp_data, labels);
      const auto rows = compare_heads(cfg, labels, data.train, data.dev, data.eval_set());
      const fs::path root(cmp_out);
      write_text(root / "heads.tsv", heads_tsv(rows));
      write_manifest(root, command, args, {{"seed", cfg.seed}, {"config", to_json(cfg)}, {"labels", labels.types()}});
      out << heads_tsv(rows);
      return kExitOk;
    }
  } catch (const std::invalid_argument& e) {
    err << "hga " << command << ": bad value: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "hga " << command << ": " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace hga::cli
