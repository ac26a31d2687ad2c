#include "posestream/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "posestream/checkpoint.hpp"
#include "posestream/fusion.hpp"
#include "posestream/io_util.hpp"
#include "posestream/pipeline.hpp"
#include "posestream/score_io.hpp"
#include "posestream/synth.hpp"
#include "posestream/tensor_cache.hpp"
#include "posestream/train.hpp"

namespace posestream {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Error carrying extra fields for the stderr JSON payload.
struct CommandError : std::runtime_error {
  json details;
  CommandError(const std::string& what, json extra = json::object()) : std::runtime_error(what), details(std::move(extra)) {}
};

// Parameter fingerprint; paths are left out so relocated runs hash the same.
class ConfigHasher {
 public:
  template <typename T>
  ConfigHasher& add(std::string_view key, const T& value) {
    std::ostringstream ss;
    ss.precision(17);
    ss << value;
    text_ += std::string(key) + "=" + ss.str() + "\n";
    return *this;
  }
  std::uint64_t hash() const { return fnv1a64(text_); }

 private:
  std::string text_;
};

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad number '" + item + "' in list '" + text + "'");
    }
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  write_file_atomic(path, [&](std::ostream& out) { out << text; });
}

json provenance_json(const Provenance& p) { return {{"config_hash", hex64(p.config_hash)}, {"seed", p.seed}}; }

// --- synth -------------------------------------------------------------------

struct SynthArgs {
  std::string profile = "jhmdb_gt";
  std::vector<std::string> classes{"wave_right", "walk", "squat", "jumping_jack"};
  SyntheticSpec spec;
  fs::path out;
};

void cmd_synth(const SynthArgs& a, std::ostream& log) {
  SyntheticSpec spec = a.spec;
  spec.classes.clear();
  for (const auto& c : a.classes) spec.classes.push_back(parse_motion(c));
  const auto topology = build_topology(a.profile);
  const auto videos = synthesize(spec, topology);

  ConfigHasher h;
  h.add("profile", topology.id()).add("sigma", spec.noise_sigma).add("dropout", spec.dropout);
  h.add("videos_per_class", spec.videos_per_class).add("min_frames", spec.min_frames).add("max_frames", spec.max_frames);
  h.add("prefix", spec.id_prefix).add("seed", spec.seed);
  for (const auto& c : a.classes) h.add("class", c);
  const Provenance prov{h.hash(), spec.seed};

  write_file_atomic(a.out, [&](std::ostream& out) {
    json meta = provenance_json(prov);
    meta["generator"] = "synthetic";
    meta["profile"] = topology.id();
    meta["classes"] = a.classes;
    out << json{{"meta", meta}}.dump() << "\n";
    for (const auto& v : videos) out << annotation_line(v) << "\n";
  });
  log << "wrote " << videos.size() << " synthetic videos to " << a.out.string() << "\n";
}

// --- preprocess --------------------------------------------------------------

struct PreprocessArgs {
  fs::path annotations;
  std::string profile = "jhmdb_gt";
  PreprocessSettings settings;
  std::string policy = "interpolate";
  fs::path spatial_corpus;
  fs::path out_dir;
};

void cmd_preprocess(PreprocessArgs a, std::ostream& log) {
  const auto topology = build_topology(a.profile);
  if (a.policy == "interpolate") {
    a.settings.policy = MissingJointPolicy::interpolate;
  } else if (a.policy == "zero-fill") {
    a.settings.policy = MissingJointPolicy::zero_fill;
  } else {
    throw std::invalid_argument("unknown missing-joint policy '" + a.policy + "' (interpolate | zero-fill)");
  }

  const auto input = read_annotations(a.annotations, topology.size());
  if (input.records.empty()) throw std::invalid_argument("no valid records in " + a.annotations.string());

  std::optional<SpatialModel> model;
  if (a.settings.policy == MissingJointPolicy::interpolate) {
    if (a.spatial_corpus.empty()) {
      model = fit_corpus_model(input.records, topology, a.settings);
    } else {
      const auto corpus = read_annotations(a.spatial_corpus, topology.size());
      if (corpus.records.empty()) throw std::invalid_argument("spatial corpus has no valid records");
      model = fit_corpus_model(corpus.records, topology, a.settings);
    }
  }
  auto result = preprocess_videos(input.records, topology, a.settings, model ? &*model : nullptr);
  if (result.tensors.empty()) throw std::invalid_argument("every video was rejected during preprocessing");

  ConfigHasher h;
  h.add("profile", topology.id()).add("segments", a.settings.segments).add("max_gap", a.settings.max_gap);
  h.add("degree", a.settings.degree).add("policy", a.policy).add("seed", a.settings.seed);
  h.add("gap_normalized", a.settings.tensor.gap_normalized).add("spatial_corpus", !a.spatial_corpus.empty());
  const Provenance prov{h.hash(), a.settings.seed};

  TensorCache cache;
  cache.rows = result.tensors.front().rows();
  cache.width = result.tensors.front().cols();
  cache.topology = topology.id();
  cache.provenance = prov;
  cache.tensors = result.tensors;
  fs::create_directories(a.out_dir);
  write_tensor_cache(a.out_dir / "tensors.bin", cache);

  write_file_atomic(a.out_dir / "poses.jsonl", [&](std::ostream& out) {
    out << json{{"meta", provenance_json(prov)}}.dump() << "\n";
    for (const auto& p : result.poses) out << annotation_line(p) << "\n";
  });

  std::vector<std::pair<std::string, int>> labels;
  for (const auto& t : result.tensors) {
    if (t.label) labels.emplace_back(t.video, *t.label);
  }
  write_file_atomic(a.out_dir / "labels.csv", [&](std::ostream& out) { write_labels(out, labels, prov); });

  if (!is_builtin_profile(topology.id())) {
    fs::copy_file(a.profile, a.out_dir / "topology.txt", fs::copy_options::overwrite_existing);
  }

  json report = provenance_json(prov);
  report["topology"] = topology.id();
  report["tensor_shape"] = {cache.rows, cache.width, 3};
  report["videos_in"] = input.records.size() + input.issues.size();
  report["videos_out"] = result.tensors.size();
  json rejected = json::array();
  for (const auto& issue : input.issues) rejected.push_back({{"line", issue.line}, {"error", issue.message}});
  report["malformed_records"] = rejected;
  std::size_t temporal = 0, spatial = 0, synthetic = 0, dropped = 0;
  json videos = json::array();
  for (const auto& r : result.reports) {
    temporal += r.temporal_filled;
    spatial += r.spatial_filled;
    synthetic += r.synthetic_filled;
    dropped += r.frames_dropped;
    json v{{"video", r.video},           {"frames", r.frames_in},           {"unusable_frames", r.frames_dropped},
           {"missing", r.missing_in},    {"temporal", r.temporal_filled}, {"spatial", r.spatial_filled},
           {"synthetic", r.synthetic_filled}};
    if (!r.rejected.empty()) v["rejected"] = r.rejected;
    videos.push_back(std::move(v));
  }
  report["interpolated"] = {{"temporal", temporal}, {"spatial", spatial}, {"synthetic", synthetic},
                            {"total", temporal + spatial + synthetic}};
  report["unusable_frames"] = dropped;
  report["videos"] = videos;
  write_text(a.out_dir / "preprocess_report.json", report.dump(2) + "\n");

  for (const auto& issue : input.issues) log << "rejected line " << issue.line << ": " << issue.message << "\n";
  log << "cached " << result.tensors.size() << " tensors of shape " << cache.rows << "x" << cache.width << "x3 in "
      << a.out_dir.string() << "\n";
}

// --- train -------------------------------------------------------------------

struct TrainArgs {
  fs::path data;
  fs::path checkpoint;
  fs::path trace;
  TrainConfig config;
  bool no_resample = false;
  Architecture arch;
};

SkeletonTopology topology_for(const fs::path& data_dir, const std::string& id) {
  if (is_builtin_profile(id)) return build_topology(id);
  return load_topology(data_dir / "topology.txt");
}

void cmd_train(TrainArgs a, std::ostream& log) {
  a.config.resample_each_epoch = !a.no_resample;
  auto cache = read_tensor_cache(a.data / "tensors.bin");
  if (cache.tensors.empty()) throw std::invalid_argument("tensor cache is empty");

  int classes = 0;
  for (const auto& t : cache.tensors) {
    if (!t.label) throw std::invalid_argument("training tensor " + t.video + " has no label");
    classes = std::max(classes, *t.label + 1);
  }
  NetShape shape{cache.rows, cache.width, std::max(classes, 2), a.arch};

  ConfigHasher h;
  h.add("data_hash", hex64(cache.provenance.config_hash)).add("lr", a.config.learning_rate);
  h.add("epochs", a.config.epochs).add("batch", a.config.batch_size).add("seed", a.config.seed);
  h.add("weight_decay", a.config.weight_decay).add("resample", a.config.resample_each_epoch);
  h.add("threads", a.config.threads).add("conv1", a.arch.conv1).add("conv2", a.arch.conv2);
  h.add("pool", a.arch.pool_window).add("pool_stride", a.arch.pool_stride).add("hidden", a.arch.hidden);
  h.add("classes", shape.classes);
  const Provenance prov{h.hash(), a.config.seed};

  auto net = PoseConvNetd::xavier(shape, a.config.seed);
  TrainingSet set;
  if (a.config.resample_each_epoch) {
    const auto poses = read_annotations(a.data / "poses.jsonl");
    if (!poses.issues.empty()) throw std::invalid_argument("poses.jsonl: " + poses.issues.front().message);
    std::vector<NormalizedPoseSequence> normalized;
    for (const auto& p : poses.records) {
      NormalizedPoseSequence n;
      n.video = p.video;
      n.label = p.label;
      n.xy = p.xy;
      n.state = p.state;
      n.usable.assign(static_cast<std::size_t>(p.frames()), true);
      normalized.push_back(std::move(n));
    }
    const auto topology = topology_for(a.data, cache.topology);
    set = make_training_set(std::move(cache.tensors), std::move(normalized), topology, a.config.seed);
  } else {
    set.tensors = std::move(cache.tensors);
  }

  TrainResult result;
  try {
    result = train(std::move(net), set, a.config);
  } catch (const TrainingDiverged& e) {
    throw CommandError(e.what(), {{"epoch", e.epoch()}, {"batch", e.batch()}});
  }

  write_checkpoint(a.checkpoint, Checkpoint{result.net, prov});
  const fs::path trace = a.trace.empty() ? fs::path(a.checkpoint).replace_extension(".trace.csv") : a.trace;
  write_file_atomic(trace, [&](std::ostream& out) {
    out << "# config_hash=" << hex64(prov.config_hash) << " seed=" << prov.seed << "\n";
    out << "epoch,loss,accuracy\n";
    for (const auto& e : result.trace) out << e.epoch << ',' << format_double(e.loss) << ',' << format_double(e.accuracy) << "\n";
  });
  if (!result.trace.empty()) {
    log << "epoch " << result.trace.back().epoch << ": loss " << result.trace.back().loss << ", train accuracy "
        << result.trace.back().accuracy << "\n";
  }
  log << "wrote checkpoint " << a.checkpoint.string() << "\n";
}

// --- eval --------------------------------------------------------------------

struct EvalArgs {
  fs::path data;
  fs::path checkpoint;
  fs::path scores;
  fs::path report;
};

void cmd_eval(const EvalArgs& a, std::ostream& log) {
  const auto ck = read_checkpoint(a.checkpoint);
  const auto cache = read_tensor_cache(a.data / "tensors.bin");
  if (cache.tensors.empty()) throw std::invalid_argument("evaluation set is empty");
  const auto& shape = ck.net.shape();
  if (cache.rows != shape.rows || cache.width != shape.cols) {
    throw std::invalid_argument("checkpoint expects " + std::to_string(shape.rows) + "x" + std::to_string(shape.cols) +
                                " tensors, cache holds " + std::to_string(cache.rows) + "x" + std::to_string(cache.width));
  }

  StreamScores scores(StreamId::pose, shape.classes);
  std::map<std::string, int> labels;
  ForwardCache<double> fc;
  for (const auto& t : cache.tensors) {
    ck.net.forward(t, fc);
    scores.add(t.video, fc.probs);
    if (t.label) labels[t.video] = *t.label;
  }
  ConfigHasher h;
  h.add("checkpoint", hex64(ck.provenance.config_hash)).add("data", hex64(cache.provenance.config_hash));
  const Provenance prov{h.hash(), ck.provenance.seed};
  write_scores(a.scores, scores, prov);

  json report = provenance_json(prov);
  report["videos"] = scores.size();
  if (labels.size() == scores.size()) {
    const auto ev = evaluate(scores, labels);
    report["accuracy"] = ev.accuracy;
    report["per_class_accuracy"] = std::vector<double>(ev.per_class.data(), ev.per_class.data() + ev.per_class.size());
    report["class_counts"] = std::vector<int>(ev.class_count.data(), ev.class_count.data() + ev.class_count.size());
    json confusion = json::array();
    for (Eigen::Index r = 0; r < ev.confusion.rows(); ++r) {
      std::vector<int> row(static_cast<std::size_t>(ev.confusion.cols()));
      for (Eigen::Index c = 0; c < ev.confusion.cols(); ++c) row[static_cast<std::size_t>(c)] = ev.confusion(r, c);
      confusion.push_back(row);
    }
    report["confusion"] = confusion;
    log << "accuracy " << ev.accuracy << " over " << ev.videos << " videos\n";
  } else {
    log << "scored " << scores.size() << " videos (labels incomplete, no accuracy)\n";
  }
  if (!a.report.empty()) write_text(a.report, report.dump(2) + "\n");
}

// --- fuse / weights-search ---------------------------------------------------

struct StreamArgs {
  fs::path pose;
  fs::path spatial;
  fs::path temporal;
  fs::path labels;
};

struct LoadedStreams {
  std::optional<StreamScores> pose, spatial, temporal;
  const StreamScores* p() const { return pose ? &*pose : nullptr; }
  const StreamScores* s() const { return spatial ? &*spatial : nullptr; }
  const StreamScores* t() const { return temporal ? &*temporal : nullptr; }
};

LoadedStreams load_streams(const StreamArgs& a) {
  LoadedStreams s;
  if (!a.pose.empty()) s.pose = read_scores(a.pose, StreamId::pose);
  if (!a.spatial.empty()) s.spatial = read_scores(a.spatial, StreamId::spatial);
  if (!a.temporal.empty()) s.temporal = read_scores(a.temporal, StreamId::temporal);
  if (!s.pose && !s.spatial && !s.temporal) throw std::invalid_argument("give at least one of --pose, --spatial, --temporal");
  return s;
}

struct FuseArgs {
  StreamArgs streams;
  std::string weights = "1,1,1";
  fs::path out;
  fs::path report;
};

FusionWeights parse_weights(const std::string& text) {
  const auto w = parse_list(text);
  if (w.size() != 3) throw std::invalid_argument("--weights needs three values w_p,w_s,w_t");
  FusionWeights fw{w[0], w[1], w[2]};
  fw.validate();
  return fw;
}

void cmd_fuse(const FuseArgs& a, std::ostream& log, std::ostream& err) {
  const auto w = parse_weights(a.weights);
  const auto streams = load_streams(a.streams);
  const auto fused = fuse(streams.p(), streams.s(), streams.t(), w);
  for (const auto& warning : fused.warnings) err << "warning: " << warning << "\n";

  ConfigHasher h;
  h.add("w_p", w.pose).add("w_s", w.spatial).add("w_t", w.temporal);
  h.add("pose", static_cast<bool>(streams.pose)).add("spatial", static_cast<bool>(streams.spatial));
  h.add("temporal", static_cast<bool>(streams.temporal));
  const Provenance prov{h.hash(), 0};
  if (!a.out.empty()) write_scores(a.out, fused.fused, prov);

  if (a.streams.labels.empty()) return;
  const auto labels = read_labels(a.streams.labels);
  const auto table = subset_table(streams.p(), streams.s(), streams.t(), w, labels);
  const auto ev = evaluate(fused.fused, labels);

  std::ostringstream rep;
  rep << "# weights w_p=" << format_double(w.pose) << " w_s=" << format_double(w.spatial)
      << " w_t=" << format_double(w.temporal) << "\n";
  rep << "# config_hash=" << hex64(prov.config_hash) << " seed=" << prov.seed << "\n";
  for (const auto& warning : fused.warnings) rep << "# warning: " << warning << "\n";
  rep << "streams,w_p,w_s,w_t,accuracy\n";
  for (const auto& row : table) {
    rep << row.name << ',' << format_double(row.weights.pose) << ',' << format_double(row.weights.spatial) << ','
        << format_double(row.weights.temporal) << ',' << format_double(row.accuracy) << "\n";
  }
  rep << "# per-class accuracy of the fused scores\n";
  rep << "class,videos,accuracy\n";
  for (Eigen::Index k = 0; k < ev.per_class.size(); ++k) {
    rep << k << ',' << ev.class_count(k) << ',' << format_double(ev.per_class(k)) << "\n";
  }
  const std::string text = rep.str();
  if (!a.report.empty()) write_text(a.report, text);
  log << text;
}

struct SearchArgs {
  StreamArgs streams;
  std::string grid = "0,0.5,1,1.5,2";
  fs::path out;
};

void cmd_weights_search(const SearchArgs& a, std::ostream& log) {
  if (a.streams.labels.empty()) throw std::invalid_argument("weights-search needs --labels for the validation split");
  const auto streams = load_streams(a.streams);
  const auto labels = read_labels(a.streams.labels);
  const auto result = search_weights(streams.p(), streams.s(), streams.t(), parse_list(a.grid), labels);

  std::ostringstream rep;
  rep << "# best w_p=" << format_double(result.best.pose) << " w_s=" << format_double(result.best.spatial)
      << " w_t=" << format_double(result.best.temporal) << " accuracy=" << format_double(result.best_accuracy) << "\n";
  rep << "w_p,w_s,w_t,accuracy\n";
  for (const auto& [w, acc] : result.evaluated) {
    rep << format_double(w.pose) << ',' << format_double(w.spatial) << ',' << format_double(w.temporal) << ','
        << format_double(acc) << "\n";
  }
  if (!a.out.empty()) write_text(a.out, rep.str());
  log << "best weights (" << result.best.pose << ", " << result.best.spatial << ", " << result.best.temporal
      << ") accuracy " << result.best_accuracy << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pose-stream action recognition: pose tensors, pose network training, score fusion"};
  app.set_config("--config", "", "TOML/INI file with one section per subcommand");
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a labelled synthetic motion corpus (JSON lines)");
  s->add_option("--profile", synth.profile, "Topology profile or description file")->capture_default_str();
  s->add_option("--classes", synth.classes, "Motion classes")->delimiter(',')->capture_default_str();
  s->add_option("--videos-per-class", synth.spec.videos_per_class)->capture_default_str();
  s->add_option("--min-frames", synth.spec.min_frames)->capture_default_str();
  s->add_option("--max-frames", synth.spec.max_frames)->capture_default_str();
  s->add_option("--sigma", synth.spec.noise_sigma, "Gaussian coordinate noise, pixels")->capture_default_str();
  s->add_option("--dropout", synth.spec.dropout, "Probability of hiding a joint slot")->capture_default_str();
  s->add_option("--seed", synth.spec.seed)->capture_default_str();
  s->add_option("--prefix", synth.spec.id_prefix, "Video id prefix")->capture_default_str();
  s->add_option("--out", synth.out, "Annotation file to write")->required();

  PreprocessArgs pre;
  auto* p = app.add_subcommand("preprocess", "Interpolate, normalize and cache pose tensors");
  p->add_option("--annotations", pre.annotations, "Annotation JSON-lines file")->required();
  p->add_option("--profile", pre.profile, "Topology profile or description file")->capture_default_str();
  p->add_option("--segments,-K", pre.settings.segments, "Snippets per video")->capture_default_str();
  p->add_option("--max-gap", pre.settings.max_gap, "Longest gap bridged by temporal interpolation")->capture_default_str();
  p->add_option("--degree", pre.settings.degree, "Spatial model polynomial degree (1 or 2)")->capture_default_str();
  p->add_option("--policy", pre.policy, "interpolate | zero-fill")->capture_default_str();
  p->add_option("--spatial-corpus", pre.spatial_corpus, "Fit the spatial model on this annotation file instead");
  p->add_option("--seed", pre.settings.seed)->capture_default_str();
  p->add_flag("--gap-normalized", pre.settings.tensor.gap_normalized, "Divide differences by the frame gap");
  p->add_option("--out-dir", pre.out_dir, "Output directory")->required();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train the pose network on a tensor cache");
  t->add_option("--data", tr.data, "Directory written by preprocess")->required();
  t->add_option("--checkpoint", tr.checkpoint, "Checkpoint to write")->required();
  t->add_option("--trace", tr.trace, "Per-epoch CSV trace (default: <checkpoint>.trace.csv)");
  t->add_option("--epochs", tr.config.epochs)->capture_default_str();
  t->add_option("--lr", tr.config.learning_rate)->capture_default_str();
  t->add_option("--batch-size", tr.config.batch_size)->capture_default_str();
  t->add_option("--weight-decay", tr.config.weight_decay)->capture_default_str();
  t->add_option("--seed", tr.config.seed)->capture_default_str();
  t->add_option("--threads", tr.config.threads)->capture_default_str();
  t->add_flag("--no-resample", tr.no_resample, "Keep the cached snippets instead of redrawing each epoch");
  t->add_option("--conv1", tr.arch.conv1)->capture_default_str();
  t->add_option("--conv2", tr.arch.conv2)->capture_default_str();
  t->add_option("--pool", tr.arch.pool_window)->capture_default_str();
  t->add_option("--pool-stride", tr.arch.pool_stride)->capture_default_str();
  t->add_option("--hidden", tr.arch.hidden)->capture_default_str();

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Score a tensor cache with a checkpoint");
  e->add_option("--data", ev.data, "Directory written by preprocess")->required();
  e->add_option("--checkpoint", ev.checkpoint)->required();
  e->add_option("--scores", ev.scores, "Score CSV to write")->required();
  e->add_option("--report", ev.report, "Accuracy report (JSON)");

  FuseArgs fu;
  auto* f = app.add_subcommand("fuse", "Weighted late fusion of stream score files");
  f->add_option("--pose", fu.streams.pose);
  f->add_option("--spatial", fu.streams.spatial);
  f->add_option("--temporal", fu.streams.temporal);
  f->add_option("--labels", fu.streams.labels, "video,label CSV for the accuracy report");
  f->add_option("--weights", fu.weights, "w_p,w_s,w_t")->capture_default_str();
  f->add_option("--out", fu.out, "Fused score CSV");
  f->add_option("--report", fu.report, "Accuracy report CSV");

  SearchArgs ws;
  auto* w = app.add_subcommand("weights-search", "Grid-search fusion weights on a validation split");
  w->add_option("--pose", ws.streams.pose);
  w->add_option("--spatial", ws.streams.spatial);
  w->add_option("--temporal", ws.streams.temporal);
  w->add_option("--labels", ws.streams.labels)->required();
  w->add_option("--grid", ws.grid, "Candidate values per weight")->capture_default_str();
  w->add_option("--out", ws.out, "Search report CSV");

  std::string command = "posestream";
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& pe) {
    err << json{{"command", command}, {"error", pe.what()}}.dump() << "\n";
    return pe.get_exit_code() == 0 ? 2 : pe.get_exit_code();
  }

  try {
    if (*s) {
      command = "synth";
      cmd_synth(synth, out);
    } else if (*p) {
      command = "preprocess";
      cmd_preprocess(pre, out);
    } else if (*t) {
      command = "train";
      cmd_train(tr, out);
    } else if (*e) {
      command = "eval";
      cmd_eval(ev, out);
    } else if (*f) {
      command = "fuse";
      cmd_fuse(fu, out, err);
    } else if (*w) {
      command = "weights-search";
      cmd_weights_search(ws, out);
    }
  } catch (const CommandError& ce) {
    json payload{{"command", command}, {"error", ce.what()}};
    payload.update(ce.details);
    err << payload.dump() << "\n";
    return 1;
  } catch (const std::exception& ex) {
    err << json{{"command", command}, {"error", ex.what()}}.dump() << "\n";
    return 1;
  }
  return 0;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"posestream"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace posestream
