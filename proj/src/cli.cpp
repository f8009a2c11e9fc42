#include "extsum/cli.hpp"

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "extsum/json_io.hpp"

namespace extsum {

using nlohmann::json;
namespace fs = std::filesystem;

fs::path RunConfig::Paths::SplitFile(Split split) const {
  return data_dir / (std::string(SplitName(split)) + ".jsonl");
}

json DefaultConfigJson() {
  const RunConfig d;
  json model = ToJson(d.model);
  model.erase("seed");
  model.erase("vocab_size");
  model.erase("num_aspects");
  json train = ToJson(d.train);
  train.erase("seed");
  return {
      {"seed", d.seed},
      {"paths",
       {{"data_dir", d.paths.data_dir.string()},
        {"products", ""},
        {"input", ""},
        {"output", ""},
        {"checkpoint", d.paths.checkpoint.string()},
        {"report", d.paths.report.string()},
        {"generations", d.paths.generations.string()},
        {"eval_report", d.paths.eval_report.string()},
        {"heatmap", d.paths.heatmap.string()}}},
      {"schema",
       {{"category", "synth"},
        {"aspects", {"appearance", "battery", "screen"}},
        {"cluster_count", 0}}},
      {"model", model},
      {"train", train},
      {"decode", ToJson(d.decode)},
      {"label", {{"threshold", kDefaultLabelThreshold}, {"strip_punctuation", false}}},
      {"corpus",
       {{"min_fragment_chars", 15},
        {"max_fragment_chars", 55},
        {"max_input_chars", 400},
        {"max_target_chars", 70},
        {"skip_empty_products", false},
        {"split_ratios", {0.8, 0.1, 0.1}}}},
      {"synth", {{"products", d.synth_products}}},
      {"generate", {{"mode", "aspect"}, {"split", "test"}}},
      {"evaluate", {{"mode", "top1"}}},
      {"heatmap", {{"product_id", ""}, {"aspect", ""}}},
  };
}

void MergeConfig(json& base, const json& overlay) {
  if (!base.is_object() || !overlay.is_object()) {
    base = overlay;
    return;
  }
  for (const auto& [key, value] : overlay.items()) {
    if (base.contains(key) && base[key].is_object() && value.is_object()) {
      MergeConfig(base[key], value);
    } else {
      base[key] = value;
    }
  }
}

void ApplyOverride(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError(assignment, "expected key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* node = &config;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty()) throw ConfigError(key, "empty path component");
    if (!node->is_object()) throw ConfigError(key, "'" + part + "' is not inside an object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

namespace {

class Section {
 public:
  Section(const json& root, const std::string& key) : key_(key) {
    auto it = root.find(key);
    if (it == root.end()) {
      j_ = json::object();
    } else if (!it->is_object()) {
      throw ConfigError(key, "expected an object");
    } else {
      j_ = *it;
    }
  }

  template <typename T>
  T Get(const std::string& name, T fallback) {
    known_.insert(name);
    auto it = j_.find(name);
    if (it == j_.end()) return fallback;
    if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw ConfigError(Path(name), "expected a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer()) throw ConfigError(Path(name), "expected an integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) throw ConfigError(Path(name), "expected a number");
    }
    try {
      return it->get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(Path(name), e.what());
    }
  }

  void RejectUnknown() const {
    for (const auto& [k, v] : j_.items()) {
      if (!known_.count(k)) throw ConfigError(Path(k), "unknown key");
    }
  }

  std::string Path(const std::string& name) const { return key_ + "." + name; }
  const json& raw() const { return j_; }

 private:
  json j_;
  std::string key_;
  std::set<std::string> known_;
};

}  // namespace

RunConfig ParseRunConfig(const json& config) {
  if (!config.is_object()) throw ConfigError("<root>", "configuration must be a JSON object");
  static const std::set<std::string> kTopLevel = {
      "seed",  "paths", "schema", "model",    "train",    "decode",
      "label", "corpus", "synth", "generate", "evaluate", "heatmap"};
  for (const auto& [k, v] : config.items()) {
    if (!kTopLevel.count(k)) throw ConfigError(k, "unknown key");
  }

  RunConfig rc;
  if (config.contains("seed")) {
    const auto& seed = config["seed"];
    if (!seed.is_number_integer() || seed.get<std::int64_t>() < 0) {
      throw ConfigError("seed", "expected a non-negative integer");
    }
    rc.seed = config["seed"].get<std::uint64_t>();
  }

  Section paths(config, "paths");
  auto path = [&](const char* name, const fs::path& fallback) {
    return fs::path(paths.Get<std::string>(name, fallback.string()));
  };
  rc.paths.data_dir = path("data_dir", rc.paths.data_dir);
  rc.paths.products = path("products", rc.paths.products);
  rc.paths.input = path("input", rc.paths.input);
  rc.paths.output = path("output", rc.paths.output);
  rc.paths.checkpoint = path("checkpoint", rc.paths.checkpoint);
  rc.paths.report = path("report", rc.paths.report);
  rc.paths.generations = path("generations", rc.paths.generations);
  rc.paths.eval_report = path("eval_report", rc.paths.eval_report);
  rc.paths.heatmap = path("heatmap", rc.paths.heatmap);
  paths.RejectUnknown();

  Section schema(config, "schema");
  const auto category = schema.Get<std::string>("category", "synth");
  const auto aspects = schema.Get<std::vector<std::string>>("aspects", {});
  const int clusters = schema.Get<int>("cluster_count", 0);
  schema.RejectUnknown();
  try {
    rc.schema = aspects.empty() ? CategorySchema::Clusters(category, clusters)
                                : CategorySchema::FromNames(category, aspects);
    rc.schema.Validate();
  } catch (const std::exception& e) {
    throw ConfigError(aspects.empty() ? "schema.cluster_count" : "schema.aspects", e.what());
  }

  ModelConfig model_base;
  model_base.seed = rc.seed;
  model_base.num_aspects = static_cast<int>(rc.schema.aspects.size());
  rc.model = ModelConfigFromJson(Section(config, "model").raw(), "model", model_base);
  TrainConfig train_base;
  train_base.seed = rc.seed;
  rc.train = TrainConfigFromJson(Section(config, "train").raw(), "train", train_base);
  rc.decode = DecodeConfigFromJson(Section(config, "decode").raw(), "decode");

  Section label(config, "label");
  rc.label.threshold = label.Get<double>("threshold", rc.label.threshold);
  rc.label.strip_punctuation = label.Get<bool>("strip_punctuation", false);
  label.RejectUnknown();
  if (!(rc.label.threshold >= 0.0 && rc.label.threshold <= 1.0)) {
    throw ConfigError("label.threshold", "must lie in [0, 1]");
  }

  Section corpus(config, "corpus");
  rc.corpus.min_fragment_chars = corpus.Get<int>("min_fragment_chars", 15);
  rc.corpus.max_fragment_chars = corpus.Get<int>("max_fragment_chars", 55);
  rc.corpus.limits.max_input_chars = corpus.Get<int>("max_input_chars", 400);
  rc.corpus.limits.max_target_chars = corpus.Get<int>("max_target_chars", 70);
  rc.corpus.skip_empty_products = corpus.Get<bool>("skip_empty_products", false);
  const auto ratios = corpus.Get<std::vector<double>>("split_ratios", {0.8, 0.1, 0.1});
  corpus.RejectUnknown();
  if (rc.corpus.min_fragment_chars < 1 ||
      rc.corpus.min_fragment_chars > rc.corpus.max_fragment_chars) {
    throw ConfigError("corpus.min_fragment_chars", "must be in [1, max_fragment_chars]");
  }
  if (rc.corpus.limits.max_input_chars < 1) {
    throw ConfigError("corpus.max_input_chars", "must be >= 1");
  }
  if (rc.corpus.limits.max_target_chars < 1) {
    throw ConfigError("corpus.max_target_chars", "must be >= 1");
  }
  if (ratios.size() != 3 || ratios[0] < 0 || ratios[1] < 0 || ratios[2] < 0 ||
      std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) {
    throw ConfigError("corpus.split_ratios", "expected three non-negative ratios summing to 1");
  }
  rc.corpus.ratios = {ratios[0], ratios[1], ratios[2]};

  Section synth(config, "synth");
  rc.synth_products = synth.Get<int>("products", rc.synth_products);
  synth.RejectUnknown();
  if (rc.synth_products < 1) throw ConfigError("synth.products", "must be >= 1");

  Section gen(config, "generate");
  const auto mode = gen.Get<std::string>("mode", "aspect");
  const auto split = gen.Get<std::string>("split", "test");
  gen.RejectUnknown();
  if (mode == "aspect") {
    rc.generate_mode = GenerateMode::kAspect;
  } else if (mode == "null") {
    rc.generate_mode = GenerateMode::kNullTop1;
  } else if (mode == "topk") {
    rc.generate_mode = GenerateMode::kTopK;
  } else {
    throw ConfigError("generate.mode", "expected aspect, null or topk, got '" + mode + "'");
  }
  try {
    rc.generate_split = ParseSplit(split);
  } catch (const std::exception& e) {
    throw ConfigError("generate.split", e.what());
  }

  Section eval(config, "evaluate");
  const auto eval_mode = eval.Get<std::string>("mode", "top1");
  eval.RejectUnknown();
  if (eval_mode == "top1") {
    rc.evaluate_mode = EvalMode::kTop1;
  } else if (eval_mode == "topk") {
    rc.evaluate_mode = EvalMode::kTopK;
  } else {
    throw ConfigError("evaluate.mode", "expected top1 or topk, got '" + eval_mode + "'");
  }

  Section heat(config, "heatmap");
  rc.heatmap_product = heat.Get<std::string>("product_id", "");
  rc.heatmap_aspect = heat.Get<std::string>("aspect", "");
  heat.RejectUnknown();
  return rc;
}

namespace {

LoadOptions LoadOptionsFor(const RunConfig& rc) {
  LoadOptions opts;
  opts.limits = rc.corpus.limits;
  opts.schema = rc.schema;
  return opts;
}

void WriteDataset(const RunConfig& rc, const Dataset& dataset) {
  for (Split s : {Split::kTrain, Split::kDev, Split::kTest}) {
    WriteInstances(rc.paths.SplitFile(s), dataset.Get(s));
  }
}

void LabelInPlace(std::vector<Instance>& instances, const LabelOptions& options) {
  for (auto& inst : instances) inst.labels = LabelSentences(inst.sentences, inst.summary, options);
}

int CmdSynth(const RunConfig& rc, std::ostream& out) {
  const SynthCorpus corpus = SynthesizeCorpus(rc.seed, rc.synth_products, rc.schema);
  WriteProducts(rc.paths.data_dir / "products.jsonl", corpus.products);
  const Dataset dataset = corpus.ToDataset();
  WriteDataset(rc, dataset);
  out << FormatStatsTable(ComputeCorpusStats(dataset), rc.schema.category);
  return 0;
}

int CmdBuildCorpus(const RunConfig& rc, std::ostream& out) {
  if (rc.paths.products.empty()) throw ConfigError("paths.products", "required by build-corpus");
  const auto products = LoadProducts(rc.paths.products);
  const Dataset dataset = BuildDataset(products, rc.schema, rc.seed, rc.corpus);
  WriteDataset(rc, dataset);
  out << FormatStatsTable(ComputeCorpusStats(dataset), rc.schema.category);
  return 0;
}

int CmdLabel(const RunConfig& rc, std::ostream& out) {
  std::vector<std::pair<fs::path, fs::path>> jobs;
  if (!rc.paths.input.empty()) {
    jobs.emplace_back(rc.paths.input, rc.paths.output.empty() ? rc.paths.input : rc.paths.output);
  } else {
    for (Split s : {Split::kTrain, Split::kDev, Split::kTest}) {
      jobs.emplace_back(rc.paths.SplitFile(s), rc.paths.SplitFile(s));
    }
  }
  for (const auto& [in, dst] : jobs) {
    auto instances = LoadCorpus(in, Split::kTrain, LoadOptionsFor(rc));
    LabelInPlace(instances, rc.label);
    std::size_t positive = 0, total = 0;
    for (const auto& inst : instances) {
      for (int l : inst.labels->labels) positive += static_cast<std::size_t>(l);
      total += inst.labels->labels.size();
    }
    WriteInstances(dst, instances);
    out << dst.string() << ": " << instances.size() << " instances, " << positive << "/"
        << total << " sentences labeled 1\n";
  }
  return 0;
}

int CmdTrain(const RunConfig& rc, std::ostream& out) {
  auto train = LoadCorpus(rc.paths.SplitFile(Split::kTrain), Split::kTrain, LoadOptionsFor(rc));
  auto dev = LoadCorpus(rc.paths.SplitFile(Split::kDev), Split::kDev, LoadOptionsFor(rc));
  std::size_t relabeled = 0;
  for (auto& inst : train) {
    if (!inst.labels) {
      inst.labels = LabelSentences(inst.sentences, inst.summary, rc.label);
      ++relabeled;
    }
  }
  if (relabeled > 0) {
    std::cerr << "labeled " << relabeled << " unlabeled training instances on the fly\n";
  }
  std::vector<std::string> aspect_names;
  for (const auto& a : rc.schema.aspects) aspect_names.push_back(a.name);
  ExtModel model(rc.model, Vocabulary::Build(train), aspect_names);

  TrainOptions opts;
  opts.checkpoint_path = rc.paths.checkpoint;
  opts.log = [](const std::string& line) { std::cerr << line << '\n'; };
  const TrainReport report = Train(model, train, dev, rc.train, opts);
  WriteFileAtomic(rc.paths.report, ToJson(report).dump(2) + "\n");
  out << "trained " << report.steps.size() << " steps; best dev perplexity "
      << report.best_perplexity << " at step " << report.best_step << "; checkpoint "
      << report.best_checkpoint << "\n";
  return 0;
}

std::vector<Instance> LoadForModel(const RunConfig& rc, const ExtModel& model, Split split) {
  LoadOptions opts;
  opts.limits = rc.corpus.limits;
  opts.schema = CategorySchema::FromNames(rc.schema.category, model.aspect_names());
  return LoadCorpus(rc.paths.SplitFile(split), split, opts);
}

int CmdGenerate(const RunConfig& rc, std::ostream& out) {
  const ExtModel model = LoadCheckpoint(rc.paths.checkpoint);
  const auto instances = LoadForModel(rc, model, rc.generate_split);
  std::string buf;
  std::size_t records = 0;
  if (rc.generate_mode == GenerateMode::kTopK) {
    std::vector<std::string> order;
    std::map<std::string, std::vector<const Instance*>> by_product;
    for (const auto& inst : instances) {
      auto& group = by_product[inst.product_id];
      if (group.empty()) order.push_back(inst.product_id);
      group.push_back(&inst);
    }
    for (const auto& product : order) {
      const auto& group = by_product[product];
      auto rec = TopKGenerate(model, group.front()->sentences, std::nullopt,
                              static_cast<int>(group.size()), rc.decode);
      rec.product_id = product;
      buf += GenerationToJsonLine(rec) + "\n";
      ++records;
    }
  } else {
    for (const auto& inst : instances) {
      const int aspect = rc.generate_mode == GenerateMode::kAspect
                             ? model.AspectIndex(inst.aspect.name)
                             : model.null_aspect();
      auto rec = BeamSearch(model, inst.sentences, aspect, rc.decode);
      rec.product_id = inst.product_id;
      rec.aspect = inst.aspect.name;
      buf += GenerationToJsonLine(rec) + "\n";
      ++records;
    }
  }
  WriteFileAtomic(rc.paths.generations, buf);
  out << "wrote " << records << " generations to " << rc.paths.generations.string() << "\n";
  return 0;
}

int CmdEvaluate(const RunConfig& rc, std::ostream& out) {
  std::ifstream in(rc.paths.generations);
  if (!in) throw std::runtime_error("cannot open " + rc.paths.generations.string());
  std::vector<GenerationRecord> generations;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      generations.push_back(GenerationFromJsonLine(line));
    } catch (const std::exception& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  const auto references =
      LoadCorpus(rc.paths.SplitFile(rc.generate_split), rc.generate_split, LoadOptionsFor(rc));
  const EvalReport report = Evaluate(generations, references, rc.evaluate_mode);
  const std::string text = report.ToJson().dump(2) + "\n";
  WriteFileAtomic(rc.paths.eval_report, text);
  out << text;
  return 0;
}

int CmdHeatmap(const RunConfig& rc, std::ostream& out) {
  const ExtModel model = LoadCheckpoint(rc.paths.checkpoint);
  const auto instances = LoadForModel(rc, model, rc.generate_split);
  const Instance* chosen = nullptr;
  for (const auto& inst : instances) {
    if (rc.heatmap_product.empty() || inst.product_id == rc.heatmap_product) {
      chosen = &inst;
      break;
    }
  }
  if (!chosen) throw ConfigError("heatmap.product_id", "no instance for '" + rc.heatmap_product + "'");
  int aspect = chosen->aspect.index;
  if (!rc.heatmap_aspect.empty()) {
    try {
      aspect = model.AspectIndex(rc.heatmap_aspect);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("heatmap.aspect", e.what());
    }
  }
  const auto heat = ExportHeatmap(model, *chosen, aspect);
  WriteFileAtomic(rc.paths.heatmap, heat.ToCsv());
  out << "wrote " << heat.rows.size() << " rows for " << heat.product_id << "/" << heat.aspect
      << " to " << rc.paths.heatmap.string() << "\n";
  return 0;
}

}  // namespace

int RunCli(int argc, char** argv) {
  CLI::App app{"Aspect-conditioned extractive-abstractive summarization toolkit", "extsumm"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "top-level random seed");
  app.add_option("--set", overrides, "override a dotted config key: key=value")
      ->allow_extra_args(false);

  using Command = int (*)(const RunConfig&, std::ostream&);
  const std::vector<std::tuple<const char*, const char*, Command>> commands = {
      {"build-corpus", "build train/dev/test instances from raw products", CmdBuildCorpus},
      {"synth", "write a synthetic corpus", CmdSynth},
      {"label", "add LCS overlap labels to instance files", CmdLabel},
      {"train", "train a model and write the best checkpoint", CmdTrain},
      {"generate", "decode summaries for a split", CmdGenerate},
      {"evaluate", "score generations against references", CmdEvaluate},
      {"heatmap", "export extractor scores of one instance as CSV", CmdHeatmap},
  };
  Command selected = nullptr;
  for (const auto& [name, help, fn] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->callback([&selected, fn = fn] { selected = fn; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    json config = DefaultConfigJson();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      json file;
      try {
        file = json::parse(in);
      } catch (const json::parse_error& e) {
        throw ConfigError(config_path, std::string("invalid JSON: ") + e.what());
      }
      MergeConfig(config, file);
    }
    if (seed) config["seed"] = *seed;
    for (const auto& o : overrides) ApplyOverride(config, o);
    const RunConfig rc = ParseRunConfig(config);
    return selected(rc, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "error: invalid configuration key '" << e.key() << "': " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int RunCli(const std::vector<std::string>& args) {
  std::vector<std::string> storage = args;
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  argv.push_back(nullptr);
  return RunCli(static_cast<int>(storage.size()), argv.data());
}

}  // namespace extsum
