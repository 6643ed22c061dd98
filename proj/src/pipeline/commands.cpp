#include "loggraph/pipeline/commands.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "loggraph/common/error.hpp"
#include "loggraph/graph/log_graph.hpp"
#include "loggraph/model/graph_transformer.hpp"

namespace loggraph::pipeline {

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(std::string("cannot read ") + what + " " + path.string());
  return in;
}

template <typename T>
T parse_number(std::string_view text, const fs::path& path, std::size_t line_no) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected an integer, got '" +
                    std::string(text) + "'");
  }
  return value;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::vector<graph::LogGraph> load_graph_set(const fs::path& graphs, const fs::path& embeddings,
                                            std::size_t expected_dim, int max_distance) {
  const auto ids = graph::graph_file_event_ids(graphs);
  const auto table = embed::EmbeddingTable::load(embeddings, 0, ids);
  if (expected_dim != 0 && table.dim() != expected_dim) {
    throw ConfigError("embedding dimension " + std::to_string(table.dim()) + " does not match the model input width " +
                      std::to_string(expected_dim));
  }
  return graph::load_graphs(graphs, table, max_distance);
}

}  // namespace

void save_event_stream(const EventStream& stream, const fs::path& path) {
  auto out = open_out(path);
  out << "#total_lines\t" << stream.total_lines << '\n';
  out << "line_no\tevent_id\tsession_key\n";
  for (const auto& r : stream.rows) {
    out << r.line_no << '\t' << r.event_id << '\t' << r.session_key.value_or("") << '\n';
  }
}

EventStream load_event_stream(const fs::path& path) {
  auto in = open_in(path, "event stream");
  EventStream stream;
  std::string line;
  std::size_t line_no = 0;
  bool seen_total = false;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    if (line.rfind("#total_lines\t", 0) == 0) {
      stream.total_lines = parse_number<std::size_t>(std::string_view(line).substr(13), path, line_no);
      seen_total = true;
      continue;
    }
    if (line.rfind("line_no\t", 0) == 0) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected 3 columns");
    EventRow row;
    row.line_no = parse_number<std::size_t>(std::string_view(line).substr(0, t1), path, line_no);
    row.event_id = parse_number<parse::EventId>(std::string_view(line).substr(t1 + 1, t2 - t1 - 1), path, line_no);
    if (t2 + 1 < line.size()) row.session_key = line.substr(t2 + 1);
    stream.rows.push_back(std::move(row));
  }
  if (!seen_total) throw DataError(path.string() + ": missing #total_lines header");
  return stream;
}

ParseReport run_parse(const ParseOptions& opts) {
  const parse::HeaderPattern header(opts.header_pattern);
  std::optional<parse::SessionKeyPattern> session;
  if (!opts.session_pattern.empty()) session.emplace(opts.session_pattern);
  opts.drain.validate();
  auto in = open_in(opts.input, "log file");
  parse::TemplateStore store = opts.store_in ? parse::TemplateStore::load(*opts.store_in)
                                             : parse::TemplateStore(opts.drain);

  ParseReport report;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) {
      ++report.skipped;
      continue;
    }
    parse::LogRecord rec;
    try {
      rec = header.strip(line, line_no);
    } catch (const DataError&) {
      ++report.skipped;
      continue;
    }
    EventRow row;
    row.line_no = line_no;
    row.event_id = store.parse_line(rec);
    if (session) row.session_key = session->extract(rec.raw);
    report.stream.rows.push_back(std::move(row));
  }
  report.stream.total_lines = line_no;
  report.templates = store.size();

  fs::create_directories(opts.out_dir);
  save_event_stream(report.stream, opts.out_dir / "events.tsv");
  store.save(opts.out_dir / "templates.json");
  return report;
}

std::vector<window::Label> event_labels(const EventStream& stream, const fs::path& labels, LabelFormat format) {
  auto in = open_in(labels, "label file");
  std::vector<window::Label> out;
  out.reserve(stream.rows.size());
  std::string line;
  std::size_t line_no = 0;

  if (format == LabelFormat::kLine) {
    std::vector<window::Label> per_line;
    while (std::getline(in, line)) {
      ++line_no;
      strip_cr(line);
      if (line == "0") per_line.push_back(window::Label::kNormal);
      else if (line == "1") per_line.push_back(window::Label::kAnomalous);
      else throw DataError(labels.string() + ":" + std::to_string(line_no) + ": expected 0 or 1");
    }
    if (per_line.size() != stream.total_lines) {
      throw DataError("label file has " + std::to_string(per_line.size()) + " entries but the log has " +
                      std::to_string(stream.total_lines) + " lines");
    }
    for (const auto& r : stream.rows) out.push_back(per_line.at(r.line_no - 1));
    return out;
  }

  std::map<std::string, window::Label> by_key;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty() || (line_no == 1 && line.rfind("BlockId,", 0) == 0)) continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) throw DataError(labels.string() + ":" + std::to_string(line_no) + ": expected key,label");
    const std::string value = line.substr(comma + 1);
    window::Label label;
    if (value == "Anomaly" || value == "1") label = window::Label::kAnomalous;
    else if (value == "Normal" || value == "0") label = window::Label::kNormal;
    else throw DataError(labels.string() + ":" + std::to_string(line_no) + ": unknown label '" + value + "'");
    by_key[line.substr(0, comma)] = label;
  }
  std::set<std::string> missing;
  for (const auto& r : stream.rows) {
    if (!r.session_key) {
      out.push_back(window::Label::kNormal);
      continue;
    }
    const auto it = by_key.find(*r.session_key);
    if (it == by_key.end()) {
      missing.insert(*r.session_key);
      out.push_back(window::Label::kNormal);
    } else {
      out.push_back(it->second);
    }
  }
  if (!missing.empty()) {
    throw DataError("label file has no entry for " + std::to_string(missing.size()) + " session(s), first: " +
                    *missing.begin());
  }
  return out;
}

BuildReport run_build(const BuildOptions& opts) {
  if (opts.strategy != window::Strategy::kSession && opts.window_size == 0) {
    throw ConfigError("fixed and sliding windows need a window size >= 1");
  }
  if (opts.strategy == window::Strategy::kSliding && opts.step == 0) {
    throw ConfigError("sliding windows need a step >= 1");
  }
  if (opts.max_distance < 1) throw ConfigError("max distance must be >= 1");
  if (opts.train_fraction < 0.0 || opts.train_fraction > 1.0) throw ConfigError("train fraction must lie in [0, 1]");

  const auto stream = load_event_stream(opts.events);
  const auto labels = event_labels(stream, opts.labels, opts.label_format);
  std::vector<window::LabeledEvent> events;
  events.reserve(stream.rows.size());
  std::vector<parse::EventId> ids;
  for (std::size_t i = 0; i < stream.rows.size(); ++i) {
    events.push_back({stream.rows[i].event_id, labels[i], stream.rows[i].session_key});
    ids.push_back(stream.rows[i].event_id);
  }

  BuildReport report;
  std::vector<window::LogSequence> sequences;
  switch (opts.strategy) {
    case window::Strategy::kSession: {
      auto grouping = window::group_by_session(events);
      sequences = std::move(grouping.sequences);
      report.dropped_keyless = grouping.dropped_keyless;
      break;
    }
    case window::Strategy::kFixed: sequences = window::group_fixed(events, opts.window_size); break;
    case window::Strategy::kSliding: sequences = window::group_sliding(events, opts.window_size, opts.step); break;
  }

  std::optional<embed::EmbeddingTable> table;
  if (opts.provider == embed::Provider::kHashed) {
    table.emplace(embed::EmbeddingTable::from_store(parse::TemplateStore::load(opts.templates), opts.embedding_dim));
  } else {
    if (!opts.embeddings_in) throw ConfigError("the file embedding provider needs an input embedding file");
    table.emplace(embed::EmbeddingTable::load(*opts.embeddings_in, opts.embedding_dim, ids));
  }

  const graph::GraphOptions gopts{opts.max_distance};
  std::vector<graph::LogGraph> graphs;
  graphs.reserve(sequences.size());
  for (const auto& seq : sequences) {
    graphs.push_back(graph::build_graph(seq, *table, gopts));
    if (graphs.back().label == window::Label::kAnomalous) ++report.anomalies;
  }
  report.graphs = graphs.size();

  fs::create_directories(opts.out_dir);
  if (opts.train_fraction > 0.0) {
    const auto [train, test] = window::chronological_split(graphs, opts.train_fraction);
    graph::save_graphs(train, opts.out_dir / "train.jsonl");
    graph::save_graphs(test, opts.out_dir / "test.jsonl");
    report.train_graphs = train.size();
    report.test_graphs = test.size();
  } else {
    graph::save_graphs(graphs, opts.out_dir / "graphs.jsonl");
  }
  table->save(opts.out_dir / "embeddings.txt");
  return report;
}

train::TrainResult run_train(const TrainOptions& opts) {
  const auto ids = graph::graph_file_event_ids(opts.graphs);
  const auto table = embed::EmbeddingTable::load(opts.embeddings, 0, ids);
  model::ModelConfig mcfg = opts.model;
  mcfg.d_v = table.dim();
  mcfg.validate();
  opts.train.validate();
  const auto graphs = graph::load_graphs(opts.graphs, table, mcfg.max_distance);

  auto result = train::train(graphs, mcfg, opts.train);

  fs::create_directories(opts.out_dir);
  result.model.save_checkpoint(opts.out_dir / "checkpoint.json");
  open_out(opts.out_dir / "history.csv") << train::history_csv(result.history);
  const auto& s = result.summary;
  nlohmann::ordered_json summary = {{"train_graphs", s.train_graphs},
                                    {"oversampled", s.oversampled},
                                    {"validation_graphs", s.validation_graphs},
                                    {"epochs", result.history.size()},
                                    {"best_epoch", s.best_epoch},
                                    {"stopped_early", s.stopped_early},
                                    {"single_class", s.single_class},
                                    {"oversample_unreachable", s.oversample_unreachable},
                                    {"clamped_degrees", s.clamped_degrees},
                                    {"aborted", s.aborted}};
  open_out(opts.out_dir / "train_summary.json") << summary.dump(1) << '\n';
  return result;
}

train::Evaluation run_eval(const EvalOptions& opts) {
  const auto model = model::GraphTransformer::load_checkpoint(opts.checkpoint);
  const auto graphs = load_graph_set(opts.graphs, opts.embeddings, model.config().d_v, model.config().max_distance);
  if (graphs.empty()) throw DataError("test set " + opts.graphs.string() + " is empty");
  auto ev = train::evaluate(model, graphs);
  open_out(opts.out) << ev.metrics.to_json().dump(1) << '\n';
  return ev;
}

train::Evaluation run_predict(const EvalOptions& opts) {
  const auto model = model::GraphTransformer::load_checkpoint(opts.checkpoint);
  const auto graphs = load_graph_set(opts.graphs, opts.embeddings, model.config().d_v, model.config().max_distance);
  auto ev = train::evaluate(model, graphs);
  auto out = open_out(opts.out);
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    nlohmann::ordered_json j = {{"index", i}, {"score", ev.anomaly_scores[i]}, {"prediction", ev.predictions[i]}};
    out << j.dump() << '\n';
  }
  return ev;
}

}  // namespace loggraph::pipeline
