#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "causegen/ci_engine.hpp"
#include "causegen/cladder.hpp"
#include "causegen/corr2cause.hpp"
#include "causegen/dag.hpp"
#include "causegen/jsonl.hpp"

namespace causegen::cli {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
using Settings = std::map<std::string, std::string>;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

/// key = value lines; '#' starts a comment line, [sections] are ignored.
Settings read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  Settings out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(fmt::format("{}:{}: expected key = value", path, number));
    }
    std::string key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
        value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    }
    out[key] = value;
  }
  return out;
}

std::string config_argument(const std::vector<std::string>& args) {
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return {};
}

struct Context {
  Settings defaults;
  std::set<std::string> known{"config", "verbose"};
  bool verbose = false;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;

  void progress(const std::string& message) const {
    if (verbose) *err << message << '\n';
  }
};

/// Adds --name, taking its default from the config file when present.
template <typename T>
CLI::Option* option(Context& ctx, CLI::App* app, const std::string& name, T& var,
                    const std::string& description, bool required = false) {
  CLI::Option* o = app->add_option("--" + name, var, description);
  ctx.known.insert(name);
  if (auto it = ctx.defaults.find(name); it != ctx.defaults.end()) {
    o->run_callback_for_default();
    o->default_val(it->second);
  } else if (required) {
    o->required();
  }
  return o;
}

ordered_json meta_line(const std::string& command, std::optional<std::uint64_t> seed,
                       const Settings& effective, const ordered_json& extra = {}) {
  std::string canonical = command;
  for (const auto& [k, v] : effective) canonical += "\n" + k + "=" + v;
  ordered_json meta = {{"tool", "causegen"},
                       {"version", CAUSEGEN_VERSION},
                       {"command", command},
                       {"seed", seed ? ordered_json(*seed) : ordered_json(nullptr)},
                       {"config_hash", fmt::format("{:016x}", fnv1a64(canonical))}};
  if (extra.is_object()) {
    for (const auto& [k, v] : extra.items()) meta[k] = v;
  }
  return {{"_meta", std::move(meta)}};
}

std::optional<fs::path> env_dir() {
  const char* dir = std::getenv(kOutputDirEnv);
  if (dir == nullptr || *dir == '\0') return std::nullopt;
  return fs::path(dir);
}

/// Explicit --out, else the env directory plus `default_name`, else stdout
/// (nullopt). Checked before any generation work starts.
std::optional<fs::path> output_file(const std::string& out, const std::string& default_name) {
  fs::path path;
  if (!out.empty()) {
    path = out;
  } else if (auto dir = env_dir()) {
    std::error_code ec;
    fs::create_directories(*dir, ec);
    if (ec) throw IoError("cannot create " + dir->string() + ": " + ec.message());
    path = *dir / default_name;
  } else {
    return std::nullopt;
  }
  const fs::path parent = path.parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw UsageError("output directory does not exist: " + parent.string());
  }
  if (fs::is_directory(path)) throw UsageError(path.string() + " is a directory");
  return path;
}

class Sink {
 public:
  Sink(const std::optional<fs::path>& path, std::ostream& fallback) : path_(path) {
    if (path_) {
      file_.open(*path_, std::ios::binary | std::ios::trunc);
      if (!file_) throw IoError("cannot open " + path_->string() + " for writing");
    }
    stream_ = path_ ? static_cast<std::ostream*>(&file_) : &fallback;
  }

  void line(const ordered_json& j) { *stream_ << j.dump() << '\n'; }
  void text(const std::string& s) { *stream_ << s << '\n'; }

  void close() {
    stream_->flush();
    if (!*stream_) {
      throw IoError("write failed" + (path_ ? ": " + path_->string() : std::string()));
    }
    if (path_) file_.close();
  }

 private:
  std::optional<fs::path> path_;
  std::ofstream file_;
  std::ostream* stream_ = nullptr;
};

std::vector<Corr2CauseRecord> read_corr2cause(const std::string& path,
                                              std::optional<JsonlFile>* header = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  JsonlFile file = read_jsonl(in);
  Split split = Split::Train;
  if (file.meta && file.meta->contains("split")) {
    split = split_from_string(file.meta->at("split").get<std::string>());
  }
  std::vector<Corr2CauseRecord> records;
  records.reserve(file.rows.size());
  for (std::size_t k = 0; k < file.rows.size(); ++k) {
    try {
      records.push_back(corr2cause_from_json(file.rows[k], split));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(fmt::format("{}: record {}: {}", path, k + 1, e.what()));
    }
  }
  if (header != nullptr) {
    file.rows.clear();
    *header = std::move(file);
  }
  return records;
}

// ---- enumerate-graphs

struct EnumerateArgs {
  int nodes = 0;
  std::string out;
};

void run_enumerate(const Context& ctx, const EnumerateArgs& a) {
  if (a.nodes < 1 || a.nodes > 7) throw UsageError("--nodes must be between 1 and 7");
  Sink sink(output_file(a.out, fmt::format("graphs_n{}.jsonl", a.nodes)), *ctx.out);
  const std::vector<Dag> dags = enumerate_dags(a.nodes);
  ctx.progress(fmt::format("enumerate-graphs: {} graphs on {} nodes", dags.size(), a.nodes));
  sink.line(meta_line("enumerate-graphs", std::nullopt, {{"nodes", std::to_string(a.nodes)}},
                      {{"count", dags.size()}}));
  for (const Dag& d : dags) {
    ordered_json edges = ordered_json::array();
    for (const Edge& e : d.edges()) edges.push_back({e.from, e.to});
    sink.line({{"n", d.size()}, {"edges", std::move(edges)}, {"canonical", canonical_form(d)}});
  }
  sink.close();
}

// ---- gen corr2cause

struct Corr2CauseArgs {
  int max_nodes = 6;
  std::uint64_t seed = 0;
  std::string out;
  std::string split_policy = "published";
};

void run_gen_corr2cause(const Context& ctx, const Corr2CauseArgs& a) {
  if (a.max_nodes < 2 || a.max_nodes > 6) throw UsageError("--max-nodes must be between 2 and 6");
  SplitPolicy policy;
  if (a.split_policy == "published") {
    policy = SplitPolicy::Published;
  } else if (a.split_policy == "cap") {
    policy = SplitPolicy::CapRule;
  } else {
    throw UsageError("--split-policy must be 'published' or 'cap'");
  }
  fs::path dir;
  if (!a.out.empty()) {
    dir = a.out;
  } else if (auto env = env_dir()) {
    dir = *env / "corr2cause";
  } else {
    throw UsageError(fmt::format("--out is required unless {} is set", kOutputDirEnv));
  }
  if (fs::exists(dir) && !fs::is_directory(dir)) {
    throw UsageError(dir.string() + " exists and is not a directory");
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  ctx.progress(fmt::format("gen corr2cause: building n = 2..{}", a.max_nodes));
  const auto records = build_dataset(a.max_nodes, a.seed, policy);
  ctx.progress(fmt::format("gen corr2cause: {} records", records.size()));
  const Settings effective{{"max-nodes", std::to_string(a.max_nodes)},
                           {"seed", std::to_string(a.seed)},
                           {"split-policy", a.split_policy}};
  for (Split split : {Split::Train, Split::Dev, Split::Test}) {
    Sink sink(dir / (std::string(to_string(split)) + ".jsonl"), *ctx.out);
    std::size_t count = 0;
    for (const auto& r : records) count += r.split == split;
    sink.line(meta_line("gen corr2cause", a.seed, effective,
                        {{"split", to_string(split)}, {"count", count}}));
    for (const auto& r : records) {
      if (r.split == split) sink.line(to_json(r));
    }
    sink.close();
  }
}

// ---- gen cladder

struct CladderArgs {
  std::size_t size = 10112;
  std::uint64_t seed = 0;
  std::string out;
  std::string story_bank;
};

void run_gen_cladder(const Context& ctx, const CladderArgs& a) {
  if (a.size < 2) throw UsageError("--size must be at least 2");
  std::optional<StoryBank> custom;
  if (!a.story_bank.empty()) {
    std::ifstream in(a.story_bank, std::ios::binary);
    if (!in) throw UsageError("cannot read story bank " + a.story_bank);
    std::stringstream text;
    text << in.rdbuf();
    try {
      custom = StoryBank::parse(text.str());
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  const StoryBank& bank = custom ? *custom : StoryBank::builtin();
  Sink sink(output_file(a.out, "cladder.jsonl"), *ctx.out);

  ctx.progress(fmt::format("gen cladder: {} records", a.size));
  const CladderDataset data = assemble_dataset(a.size, a.seed, bank);
  if (data.records.size() != a.size) {
    *ctx.err << fmt::format("gen cladder: size {} is odd; generated {} for an exact yes/no balance\n",
                            a.size, data.records.size());
  }
  const Settings effective{{"seed", std::to_string(a.seed)},
                           {"size", std::to_string(a.size)},
                           {"story-bank", bank.id()}};
  sink.line(meta_line("gen cladder", a.seed, effective,
                      {{"count", data.records.size()}, {"story_bank", bank.id()}}));
  for (const auto& r : data.records) sink.line(to_json(r));
  sink.close();
}

// ---- perturb

struct PerturbArgs {
  std::string mode;
  std::string in;
  std::string out;
};

void run_perturb(const Context& ctx, const PerturbArgs& a) {
  PerturbMode mode;
  if (a.mode == "paraphrase") {
    mode = PerturbMode::Paraphrase;
  } else if (a.mode == "refactor") {
    mode = PerturbMode::VariableRefactor;
  } else {
    throw UsageError("--mode must be 'paraphrase' or 'refactor'");
  }
  Sink sink(output_file(a.out, fs::path(a.in).stem().string() + "." + a.mode + ".jsonl"),
            *ctx.out);
  std::optional<JsonlFile> header;
  const auto records = read_corr2cause(a.in, &header);
  std::optional<std::uint64_t> seed;
  ordered_json extra = {{"mode", a.mode}, {"count", records.size()}};
  if (header->meta) {
    const nlohmann::json& m = *header->meta;
    if (m.contains("seed") && m.at("seed").is_number_unsigned()) {
      seed = m.at("seed").get<std::uint64_t>();
    }
    if (m.contains("split")) extra["split"] = m.at("split");
    if (m.contains("config_hash")) extra["source_config_hash"] = m.at("config_hash");
  }
  sink.line(meta_line("perturb", seed, {{"mode", a.mode}}, extra));
  for (const auto& r : records) sink.line(to_json(perturb(r, mode)));
  sink.close();
  ctx.progress(fmt::format("perturb: {} records", records.size()));
}

// ---- stats

struct StatsArgs {
  std::vector<std::string> in;
  std::string out;
};

void run_stats(const Context& ctx, const StatsArgs& a) {
  std::vector<Corr2CauseRecord> records;
  for (const std::string& path : a.in) {
    auto part = read_corr2cause(path);
    records.insert(records.end(), part.begin(), part.end());
  }
  Sink sink(a.out.empty() ? std::nullopt : output_file(a.out, "stats.json"), *ctx.out);
  sink.text(to_json(dataset_stats(records)).dump(2));
  sink.close();
}

// ---- ci eval

struct CiEvalArgs {
  std::string in = "-";
  std::string out;
};

Query parse_query(const nlohmann::json& j) {
  Query q;
  if (j.is_string()) {
    q.kind = query_from_string(j.get<std::string>());
    return q;
  }
  q.kind = query_from_string(j.at("kind").get<std::string>());
  if (j.contains("polarity")) q.polarity = polarity_from_string(j.at("polarity").get<std::string>());
  if (j.contains("given_value")) q.given_value = j.at("given_value").get<int>();
  if (q.given_value != 0 && q.given_value != 1) {
    throw std::invalid_argument("given_value must be 0 or 1");
  }
  return q;
}

void run_ci_eval(const Context& ctx, const CiEvalArgs& a) {
  std::stringstream text;
  if (a.in == "-") {
    text << std::cin.rdbuf();
  } else {
    std::ifstream in(a.in, std::ios::binary);
    if (!in) throw UsageError("cannot read " + a.in);
    text << in.rdbuf();
  }
  const GraphSpec* g = nullptr;
  Query q;
  BernoulliCbn cbn;
  Estimand est;
  try {
    const nlohmann::json input = nlohmann::json::parse(text.str());
    g = &graph_spec(graph_from_string(input.at("graph").get<std::string>()));
    q = parse_query(input.at("query"));
    std::vector<std::vector<double>> cpds;
    for (int v = 0; v < g->dag.size(); ++v) {
      cpds.push_back(input.at("cpds").at(g->dag.name(v)).get<std::vector<double>>());
    }
    cbn = BernoulliCbn(g->dag, std::move(cpds));
    est = derive_estimand(*g, q);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("ci eval input: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("ci eval input: ") + e.what());
  }
  Sink sink(a.out.empty() ? std::nullopt : output_file(a.out, "eval.json"), *ctx.out);
  ordered_json data = ordered_json::array();
  for (const DataTerm& t : required_data(est)) {
    data.push_back({{"term", to_string(t, g->dag.names())},
                    {"value", cbn.query_prob({{t.node, 1}}, t.given)}});
  }
  const double value = evaluate(est, cbn);
  ordered_json result = {{"estimand", to_string(est, g->dag.names())},
                         {"data", std::move(data)},
                         {"value", value},
                         {"answer", nullptr}};
  try {
    result["answer"] = to_string(answer(q, value));
  } catch (const AmbiguousAnswer&) {
    ctx.progress("ci eval: value is within the ambiguity margin; no answer");
  }
  sink.text(result.dump(2));
  sink.close();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Context ctx;
  ctx.out = &out;
  ctx.err = &err;

  CLI::App app{"Generators for synthetic causal reasoning benchmarks", "causegen"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", CAUSEGEN_VERSION);
  std::string config_path;
  app.add_option("--config", config_path, "File of key = value lines supplying flag defaults");
  app.add_flag("-v,--verbose", ctx.verbose, "Report progress on standard error");

  EnumerateArgs enumerate_args;
  Corr2CauseArgs corr2cause_args;
  CladderArgs cladder_args;
  PerturbArgs perturb_args;
  StatsArgs stats_args;
  CiEvalArgs ci_args;
  CLI::App* enumerate = nullptr;
  CLI::App* gen_corr2cause = nullptr;
  CLI::App* gen_cladder = nullptr;
  CLI::App* perturb_cmd = nullptr;
  CLI::App* stats = nullptr;
  CLI::App* ci_eval = nullptr;

  try {
    if (const std::string path = config_argument(args); !path.empty()) {
      ctx.defaults = read_config(path);
    }

    enumerate = app.add_subcommand("enumerate-graphs", "List DAGs up to isomorphism");
    option(ctx, enumerate, "nodes", enumerate_args.nodes, "Number of nodes (1-7)", true);
    option(ctx, enumerate, "out", enumerate_args.out, "Output JSONL file");

    CLI::App* gen = app.add_subcommand("gen", "Generate a dataset");
    gen->require_subcommand(1);
    gen_corr2cause = gen->add_subcommand("corr2cause", "Correlation-to-causation inference records");
    option(ctx, gen_corr2cause, "max-nodes", corr2cause_args.max_nodes, "Largest graph size (2-6)");
    option(ctx, gen_corr2cause, "seed", corr2cause_args.seed, "Seed for the split assignment");
    option(ctx, gen_corr2cause, "out", corr2cause_args.out,
           "Output directory for train/dev/test.jsonl");
    option(ctx, gen_corr2cause, "split-policy", corr2cause_args.split_policy,
           "'published' per-n sizes or the 'cap' rule");
    gen_cladder = gen->add_subcommand("cladder", "Causal question answering records");
    option(ctx, gen_cladder, "size", cladder_args.size, "Number of records");
    option(ctx, gen_cladder, "seed", cladder_args.seed, "Generation seed");
    option(ctx, gen_cladder, "out", cladder_args.out, "Output JSONL file");
    option(ctx, gen_cladder, "story-bank", cladder_args.story_bank,
           "Story bank JSON replacing the built-in one");

    perturb_cmd = app.add_subcommand("perturb", "Paraphrase or rename variables in records");
    option(ctx, perturb_cmd, "mode", perturb_args.mode, "paraphrase or refactor", true);
    option(ctx, perturb_cmd, "in", perturb_args.in, "Input JSONL file", true)
        ->check(CLI::ExistingFile);
    option(ctx, perturb_cmd, "out", perturb_args.out, "Output JSONL file");

    stats = app.add_subcommand("stats", "Summary statistics of record files as JSON");
    option(ctx, stats, "in", stats_args.in, "Input JSONL file(s)", true)->check(CLI::ExistingFile);
    option(ctx, stats, "out", stats_args.out, "Output file (default: standard output)");

    CLI::App* ci = app.add_subcommand("ci", "Causal inference engine");
    ci->require_subcommand(1);
    ci_eval = ci->add_subcommand("eval", "Estimand, data, value and answer for a model and query");
    option(ctx, ci_eval, "in", ci_args.in, "Input JSON (default: standard input)");
    option(ctx, ci_eval, "out", ci_args.out, "Output file (default: standard output)");

    for (const auto& [key, value] : ctx.defaults) {
      if (!ctx.known.count(key)) throw UsageError("unknown config key: " + key);
    }
    if (auto it = ctx.defaults.find("verbose"); it != ctx.defaults.end()) {
      ctx.verbose = it->second == "true" || it->second == "1";
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kExitOk;
    err << app.help();
    return kExitUsageError;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsageError;
  }

  try {
    if (*enumerate) run_enumerate(ctx, enumerate_args);
    else if (*gen_corr2cause) run_gen_corr2cause(ctx, corr2cause_args);
    else if (*gen_cladder) run_gen_cladder(ctx, cladder_args);
    else if (*perturb_cmd) run_perturb(ctx, perturb_args);
    else if (*stats) run_stats(ctx, stats_args);
    else if (*ci_eval) run_ci_eval(ctx, ci_args);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitGenerationError;
  }
  return kExitOk;
}

}  // namespace causegen::cli
