#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "loggraph/embed/embedding_table.hpp"
#include "loggraph/model/config.hpp"
#include "loggraph/parse/drain.hpp"
#include "loggraph/parse/log_record.hpp"
#include "loggraph/train/trainer.hpp"
#include "loggraph/window/windowing.hpp"

namespace loggraph::pipeline {

namespace fs = std::filesystem;

// Event stream written by `parse` and read by `build`.
struct EventRow {
  std::size_t line_no = 0;  // 1-based line in the raw log
  parse::EventId event_id = 0;
  std::optional<std::string> session_key;
};

struct EventStream {
  std::size_t total_lines = 0;  // raw lines read, including skipped ones
  std::vector<EventRow> rows;
};

void save_event_stream(const EventStream& stream, const fs::path& path);
EventStream load_event_stream(const fs::path& path);  // throws DataError

struct ParseOptions {
  fs::path input;
  fs::path out_dir;
  std::string header_pattern = parse::kHdfsHeaderPattern;
  std::string session_pattern = parse::kHdfsBlockPattern;
  parse::DrainParams drain;
  std::optional<fs::path> store_in;  // continue from a saved template store
};

struct ParseReport {
  EventStream stream;
  std::size_t skipped = 0;
  std::size_t templates = 0;
};

// Writes events.tsv and templates.json into out_dir.
ParseReport run_parse(const ParseOptions& opts);

enum class LabelFormat { kSession, kLine };

struct BuildOptions {
  fs::path events;
  fs::path labels;
  LabelFormat label_format = LabelFormat::kSession;
  fs::path templates;  // needed by the hashed provider
  fs::path out_dir;
  window::Strategy strategy = window::Strategy::kSession;
  std::size_t window_size = 0;
  std::size_t step = 0;
  embed::Provider provider = embed::Provider::kHashed;
  std::size_t embedding_dim = embed::kDefaultDim;
  std::optional<fs::path> embeddings_in;  // vectors for the file provider
  int max_distance = graph::kDefaultMaxDistance;
  double train_fraction = 0.0;  // 0 writes graphs.jsonl, otherwise train.jsonl + test.jsonl
};

struct BuildReport {
  std::size_t graphs = 0;
  std::size_t train_graphs = 0;
  std::size_t test_graphs = 0;
  std::size_t anomalies = 0;
  std::size_t dropped_keyless = 0;
};

// Writes the graph file(s) and embeddings.txt into out_dir.
BuildReport run_build(const BuildOptions& opts);

/// Per-event labels from either a BlockId,Label csv or one 0/1 per raw line.
std::vector<window::Label> event_labels(const EventStream& stream, const fs::path& labels, LabelFormat format);

struct TrainOptions {
  fs::path graphs;
  fs::path embeddings;
  fs::path out_dir;
  model::ModelConfig model;  // d_v is taken from the embedding file
  train::TrainConfig train;
};

// Writes checkpoint.json, history.csv and train_summary.json into out_dir.
train::TrainResult run_train(const TrainOptions& opts);

struct EvalOptions {
  fs::path graphs;
  fs::path embeddings;
  fs::path checkpoint;
  fs::path out;  // metrics JSON (eval) or scores JSONL (predict)
};

train::Evaluation run_eval(const EvalOptions& opts);
train::Evaluation run_predict(const EvalOptions& opts);

// Command-line entry point. Returns the process exit code: 0 success,
// 1 internal error, 2 user or configuration error.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);  // args exclude the program name

}  // namespace loggraph::pipeline
