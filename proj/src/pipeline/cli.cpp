#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "loggraph/common/error.hpp"
#include "loggraph/pipeline/commands.hpp"
#include "loggraph/pipeline/synth.hpp"

namespace loggraph::pipeline {

namespace {

void write_metadata(const CLI::App& sub, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "# loggraph " << sub.get_name() << "; replay with: loggraph " << sub.get_name() << " --config " << path.filename().string()
      << '\n';
  out << '[' << sub.get_name() << "]\n" << sub.config_to_str(true, false);
}

fs::path sibling_meta(const fs::path& out, const std::string& name) {
  return out.parent_path() / (out.stem().string() + "_" + name + "_meta.toml");
}

struct Cli {
  CLI::App app{"Graph-based log anomaly detection"};

  SynthConfig synth;
  fs::path synth_out;

  ParseOptions parse;
  std::string store_in;

  BuildOptions build;
  std::string label_format = "session";
  std::string strategy = "session";
  std::string provider = "hashed";
  std::string embeddings_in;

  TrainOptions train;
  std::string weight_transform = "log1p";
  bool no_degree = false, no_distance = false, no_edge_weight = false, no_interaction = false;

  EvalOptions eval;
  EvalOptions predict;

  CLI::App* synth_cmd = nullptr;
  CLI::App* parse_cmd = nullptr;
  CLI::App* build_cmd = nullptr;
  CLI::App* train_cmd = nullptr;
  CLI::App* eval_cmd = nullptr;
  CLI::App* predict_cmd = nullptr;

  Cli() {
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    app.set_config("--config", "", "Replay a *_meta.toml file; its section names the subcommand");

    synth_cmd = app.add_subcommand("synth", "Generate a labelled synthetic log corpus");
    synth_cmd->add_option("--out", synth_out, "Output directory")->required();
    synth_cmd->add_option("--event-types", synth.event_types, "Number of event types k");
    synth_cmd->add_option("--sequences", synth.sequences, "Number of sequences");
    synth_cmd->add_option("--length", synth.length, "Events per sequence");
    synth_cmd->add_option("--anomaly-rate", synth.anomaly_rate, "Fraction of perturbed sequences");
    synth_cmd->add_option("--seed", synth.seed, "Random seed");

    parse_cmd = app.add_subcommand("parse", "Parse raw log lines into event ids");
    parse_cmd->add_option("--input", parse.input, "Raw log file")->required();
    parse_cmd->add_option("--out", parse.out_dir, "Output directory")->required();
    parse_cmd->add_option("--header-pattern", parse.header_pattern, "Regex for the line header ('' keeps lines)");
    parse_cmd->add_option("--session-pattern", parse.session_pattern, "Regex for the session key ('' disables)");
    parse_cmd->add_option("--depth", parse.drain.depth, "Parse tree depth");
    parse_cmd->add_option("--similarity", parse.drain.similarity_threshold, "Template similarity threshold");
    parse_cmd->add_option("--max-children", parse.drain.max_children, "Children per tree node");
    parse_cmd->add_option("--store-in", store_in, "Continue from this template store");

    build_cmd = app.add_subcommand("build", "Group events into windows and build graphs");
    build_cmd->add_option("--events", build.events, "events.tsv written by parse")->required();
    build_cmd->add_option("--labels", build.labels, "Label file")->required();
    build_cmd->add_option("--label-format", label_format, "session (BlockId,Label csv) or line (0/1 per raw line)")
        ->check(CLI::IsMember({"session", "line"}));
    build_cmd->add_option("--templates", build.templates, "templates.json written by parse");
    build_cmd->add_option("--out", build.out_dir, "Output directory")->required();
    build_cmd->add_option("--window", strategy, "session, fixed or sliding")
        ->check(CLI::IsMember({"session", "fixed", "sliding"}));
    build_cmd->add_option("--window-size", build.window_size, "Events per fixed or sliding window");
    build_cmd->add_option("--step", build.step, "Sliding window step");
    build_cmd->add_option("--embedding", provider, "hashed or file")->check(CLI::IsMember({"hashed", "file"}));
    build_cmd->add_option("--embedding-dim", build.embedding_dim, "Embedding width (0 accepts any for file)");
    build_cmd->add_option("--embeddings-in", embeddings_in, "Vector file for the file provider");
    build_cmd->add_option("--max-distance", build.max_distance, "Distance clipping L");
    build_cmd->add_option("--train-fraction", build.train_fraction, "Chronological train share; 0 writes one file");

    auto& m = train.model;
    auto& t = train.train;
    train_cmd = app.add_subcommand("train", "Train a classifier on a graph file");
    train_cmd->add_option("--graphs", train.graphs, "Training graphs (JSONL)")->required();
    train_cmd->add_option("--embeddings", train.embeddings, "Embedding file")->required();
    train_cmd->add_option("--out", train.out_dir, "Output directory")->required();
    train_cmd->add_option("--d-z", m.d_z, "Attention width");
    train_cmd->add_option("--heads", m.heads, "Attention heads");
    train_cmd->add_option("--max-distance", m.max_distance, "Distance clipping L");
    train_cmd->add_option("--max-degree", m.max_degree, "Degree clamp");
    train_cmd->add_option("--layers", m.encoder_layers, "Encoder layers");
    train_cmd->add_option("--ffn-hidden", m.ffn_hidden, "Classifier head width");
    train_cmd->add_option("--encoder-ffn-hidden", m.encoder_ffn_hidden, "Encoder feed-forward width");
    train_cmd->add_option("--dropout", m.dropout, "Dropout rate");
    train_cmd->add_flag("--no-degree", no_degree, "Disable degree encoding");
    train_cmd->add_flag("--no-distance", no_distance, "Disable distance bias and value terms");
    train_cmd->add_flag("--no-edge-weight", no_edge_weight, "Disable edge-weight gating");
    train_cmd->add_flag("--no-interaction", no_interaction, "Scalar distance bias instead of query/key products");
    train_cmd->add_option("--weight-transform", weight_transform, "raw, log1p or mean_norm")
        ->check(CLI::IsMember({"raw", "log1p", "mean_norm"}));
    train_cmd->add_option("--lr-start", t.lr_start, "Initial learning rate");
    train_cmd->add_option("--lr-end", t.lr_end, "Final learning rate");
    train_cmd->add_option("--batch-size", t.batch_size, "Mini-batch size");
    train_cmd->add_option("--max-epochs", t.max_epochs, "Epoch limit");
    train_cmd->add_option("--patience", t.patience, "Early-stopping patience in epochs");
    train_cmd->add_option("--weight-decay", t.weight_decay, "AdamW weight decay");
    train_cmd->add_option("--seed", t.seed, "Root seed for initialisation, shuffling and dropout");
    train_cmd->add_option("--oversample-target", t.oversample_target, "Anomaly share after oversampling; 0 disables");
    train_cmd->add_option("--val-fraction", t.val_fraction, "Chronological validation share");
    train_cmd->add_flag("--verbose", t.verbose, "Print per-epoch losses");

    eval_cmd = add_scoring("eval", "Compute precision, recall and F1 on a labelled graph file", eval);
    predict_cmd = add_scoring("predict", "Write per-graph anomaly scores", predict);
  }

  CLI::App* add_scoring(const std::string& name, const std::string& help, EvalOptions& o) {
    auto* cmd = app.add_subcommand(name, help);
    cmd->add_option("--graphs", o.graphs, "Graph file (JSONL)")->required();
    cmd->add_option("--embeddings", o.embeddings, "Embedding file")->required();
    cmd->add_option("--checkpoint", o.checkpoint, "checkpoint.json written by train")->required();
    cmd->add_option("--out", o.out, "Output file")->required();
    return cmd;
  }

  void run() {
    if (synth_cmd->parsed()) {
      const auto corpus = generate_corpus(synth);
      write_corpus(corpus, synth_out);
      write_metadata(*synth_cmd, synth_out / "synth_meta.toml");
      std::cout << "wrote " << corpus.sequences.size() << " sequences (" << corpus.anomaly_count()
                << " anomalous) to " << synth_out.string() << '\n';
    } else if (parse_cmd->parsed()) {
      if (!store_in.empty()) parse.store_in = store_in;
      const auto report = run_parse(parse);
      write_metadata(*parse_cmd, parse.out_dir / "parse_meta.toml");
      std::cout << "parsed " << report.stream.rows.size() << " lines into " << report.templates
                << " templates; skipped " << report.skipped << '\n';
    } else if (build_cmd->parsed()) {
      build.label_format = label_format == "line" ? LabelFormat::kLine : LabelFormat::kSession;
      build.strategy = window::strategy_from_string(strategy);
      build.provider = provider == "file" ? embed::Provider::kFile : embed::Provider::kHashed;
      if (!embeddings_in.empty()) build.embeddings_in = embeddings_in;
      if (build.provider == embed::Provider::kHashed && build.templates.empty()) {
        throw ConfigError("the hashed embedding provider needs --templates");
      }
      const auto report = run_build(build);
      write_metadata(*build_cmd, build.out_dir / "build_meta.toml");
      std::cout << "built " << report.graphs << " graphs (" << report.anomalies << " anomalous)";
      if (report.train_graphs + report.test_graphs > 0) {
        std::cout << "; train " << report.train_graphs << ", test " << report.test_graphs;
      }
      if (report.dropped_keyless > 0) std::cout << "; " << report.dropped_keyless << " events without a session key";
      std::cout << '\n';
    } else if (train_cmd->parsed()) {
      auto& m = train.model;
      m.use_degree = !no_degree;
      m.use_distance = !no_distance;
      m.use_edge_weight = !no_edge_weight;
      m.use_feature_structure_interaction = !no_interaction;
      m.edge_weight_transform = graph::weight_transform_from_string(weight_transform);
      const auto result = run_train(train);
      write_metadata(*train_cmd, train.out_dir / "train_meta.toml");
      std::cout << "trained " << result.history.size() << " epochs; best epoch " << result.summary.best_epoch << '\n';
      if (!result.summary.aborted.empty()) throw NumericError("training aborted: " + result.summary.aborted);
    } else if (eval_cmd->parsed()) {
      const auto ev = run_eval(eval);
      write_metadata(*eval_cmd, sibling_meta(eval.out, "eval"));
      std::cout << "precision " << ev.metrics.precision << " recall " << ev.metrics.recall << " f1 " << ev.metrics.f1
                << '\n';
    } else if (predict_cmd->parsed()) {
      const auto ev = run_predict(predict);
      write_metadata(*predict_cmd, sibling_meta(predict.out, "predict"));
      std::cout << "scored " << ev.predictions.size() << " graphs\n";
    }
  }
};

}  // namespace

// CLI11 only reads config files through the top-level app, so
// "<cmd> --config f" is rewritten to "--config f <cmd>".
std::vector<std::string> hoist_config(std::vector<std::string> args) {
  if (args.size() < 2) return args;
  for (std::size_t i = 2; i < args.size(); ++i) {
    std::vector<std::string> moved;
    if (args[i] == "--config" && i + 1 < args.size()) {
      moved = {args[i], args[i + 1]};
    } else if (args[i].rfind("--config=", 0) == 0) {
      moved = {args[i]};
    } else {
      continue;
    }
    args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
               args.begin() + static_cast<std::ptrdiff_t>(i + moved.size()));
    args.insert(args.begin() + 1, moved.begin(), moved.end());
    break;
  }
  return args;
}

int run_cli(int argc, const char* const* argv) {
  const auto args = hoist_config(std::vector<std::string>(argv, argv + argc));
  std::vector<const char*> ptrs;
  for (const auto& a : args) ptrs.push_back(a.c_str());
  Cli cli;
  try {
    cli.app.parse(static_cast<int>(ptrs.size()), ptrs.data());
  } catch (const CLI::CallForHelp& e) {
    return cli.app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return cli.app.exit(e);
  } catch (const CLI::ParseError& e) {
    cli.app.exit(e);
    return 2;
  }
  try {
    cli.run();
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"loggraph"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace loggraph::pipeline
