#include "causegen/cladder.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <fmt/format.h>

#include "causegen/corr2cause.hpp"

namespace causegen {

namespace detail {
extern const std::string_view kBuiltinStoryBank;
}

namespace {

using nlohmann::json;

std::array<std::string, 2> form_pair(const json& j, const char* key) {
  const json& a = j.at(key);
  if (!a.is_array() || a.size() != 2) {
    throw std::invalid_argument(std::string("story bank: '") + key +
                                "' must list two forms");
  }
  std::array<std::string, 2> out{a[0].get<std::string>(), a[1].get<std::string>()};
  if (out[0].empty() || out[1].empty()) {
    throw std::invalid_argument(std::string("story bank: empty '") + key + "' form");
  }
  return out;
}

VariableForms parse_forms(const json& j) {
  VariableForms v;
  v.role = j.at("role").get<std::string>();
  v.overall = j.at("overall").get<std::string>();
  if (v.overall.empty()) throw std::invalid_argument("story bank: empty overall form");
  v.noun = form_pair(j, "noun");
  v.sent = form_pair(j, "sent");
  v.attr = form_pair(j, "attr");
  v.cond = form_pair(j, "cond");
  return v;
}

Story parse_story(const json& j) {
  Story s;
  s.id = j.at("id").get<std::string>();
  s.graph = graph_from_string(j.at("graph").get<std::string>());
  const GraphSpec& g = graph_spec(s.graph);
  s.variables.resize(g.dag.size());
  std::vector<bool> seen(g.dag.size(), false);
  for (const json& jv : j.at("variables")) {
    VariableForms v = parse_forms(jv);
    int node = -1;
    try {
      node = g.node(v.role);
    } catch (const std::out_of_range&) {
      throw std::invalid_argument("story bank: " + s.id + " has unknown role " + v.role);
    }
    if (seen[node]) {
      throw std::invalid_argument("story bank: " + s.id + " repeats role " + v.role);
    }
    seen[node] = true;
    s.variables[node] = std::move(v);
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw std::invalid_argument("story bank: " + s.id + " does not cover every node");
  }
  return s;
}

std::vector<VariableForms> parse_replacements(const json& j, const char* role) {
  std::vector<VariableForms> out;
  for (const json& jv : j) {
    out.push_back(parse_forms(jv));
    if (out.back().role != role) {
      throw std::invalid_argument(std::string("story bank: replacement must have role ") + role);
    }
  }
  return out;
}

VariableForms invented(const std::string& role, const std::string& w) {
  return {role,
          w,
          {"absence of " + w, w},
          {"there is no " + w, "there is " + w},
          {"those without " + w, "those with " + w},
          {"if there had been no " + w, "if there had been " + w}};
}

double round_percent(double p) { return std::round(p * 100.0) / 100.0; }

std::string percent(double p) { return fmt::format("{}%", std::lround(p * 100.0)); }

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

std::string overall_list(const Story& story, NodeSet set) {
  std::vector<std::string> names;
  for (int v : members(set)) names.push_back(story.var(v).overall);
  return join_names(names);
}

void append(std::string& text, const std::string& sentence) {
  if (!text.empty()) text += ' ';
  text += sentence;
}

std::string data_sentence(const Story& story, const DataTerm& term, double p) {
  const std::string& target = story.var(term.node).noun[1];
  const std::vector<int> given = members(term.given.mask);
  if (given.empty()) {
    return "The overall probability of " + target + " is " + percent(p) + ".";
  }
  std::string s = "For " + story.var(given[0]).attr[term.given.get(given[0])];
  for (std::size_t k = 1; k < given.size(); ++k) {
    s += (k == 1 ? ", when " : " and ") + story.var(given[k]).sent[term.given.get(given[k])];
  }
  return s + ", the probability of " + target + " is " + percent(p) + ".";
}

std::string query_sentence(const GraphSpec& g, const Story& story, const Query& q) {
  const bool pos = q.polarity == Polarity::Positive;
  const VariableForms& x = story.var(g.x);
  const VariableForms& y = story.var(g.y);
  switch (q.kind) {
    case QueryKind::MarginalProb:
      return "Is the overall likelihood of " + y.noun[1] + " " +
             (pos ? "greater" : "smaller") + " than chance?";
    case QueryKind::ConditionalProb:
      return "Is the chance of " + y.noun[1] + " " + (pos ? "larger" : "smaller") +
             " when observing " + x.noun[1] + "?";
    case QueryKind::ExplainingAway:
      return "If we look at " + story.var(g.node("V3")).attr[q.given_value] +
             ", does the chance of " + y.noun[1] + " " + (pos ? "increase" : "decrease") +
             " when observing " + x.noun[1] + "?";
    case QueryKind::ColliderBias:
      return "If we look at " + story.var(g.node("V3")).attr[q.given_value] +
             ", does it mean that " + x.noun[1] + " " + (pos ? "increases" : "decreases") +
             " the chance of " + y.noun[1] + "?";
    case QueryKind::BackdoorAdjustmentSet:
      return "To understand how " + x.overall + " affects " + y.overall +
             ", should we look directly at how " + x.overall + " correlates with " +
             y.overall + " in general, or this correlation case by case according to " +
             overall_list(story, backdoor_candidate(g.id)) + "? " +
             (pos ? "Is the case-by-case approach the right one?"
                  : "Is looking at the correlation in general the right approach?");
    case QueryKind::Ate:
      return "Will " + x.noun[1] + " " + (pos ? "increase" : "decrease") +
             " the chance of " + y.noun[1] + "?";
    case QueryKind::CounterfactualProb:
      return "Can we infer that " + y.sent[pos ? 1 : 0] + " " + x.cond[1] +
             " instead of " + x.noun[0] + "?";
    case QueryKind::Att:
      return "For " + x.attr[1] + ", would it be " + (pos ? "less" : "more") +
             " likely to see " + y.noun[1] + " " + x.cond[0] + "?";
    case QueryKind::Nde: {
      const std::string effect = pos ? "positively" : "negatively";
      if (g.mediators() == 0) {
        return "Does " + x.noun[1] + " " + effect + " affect " + y.noun[1] + " directly?";
      }
      return "If we disregard the mediation effect through " +
             overall_list(story, g.mediators()) + ", would " + x.noun[1] + " still " +
             effect + " affect " + y.noun[1] + "?";
    }
    case QueryKind::Nie:
      return "Does " + x.overall + " " + (pos ? "positively" : "negatively") + " affect " +
             y.overall + " through " + overall_list(story, g.mediators()) + "?";
  }
  throw std::invalid_argument("unknown query kind");
}

bool scm_agrees(const GraphSpec& g, const Query& q, const BernoulliCbn& cbn, double exact) {
  for (const auto& scm : {ResponseFunctionScm::comonotone(cbn),
                          ResponseFunctionScm::independent(cbn)}) {
    if (std::abs(direct_value(g, q, cbn, scm) - exact) > 1e-9) return false;
  }
  return true;
}

Story pick_story(const StoryBank& bank, GraphId graph, Sense sense, Rng& rng) {
  const auto bases = bank.stories_for(graph);
  if (bases.empty()) {
    throw GenerationError("no story for graph " + std::string(to_string(graph)));
  }
  switch (sense) {
    case Sense::Commonsense: return *bases[rng.below(bases.size())];
    case Sense::AntiCommonsense:
      return anti_commonsense(bank, *bases[rng.below(bases.size())], rng);
    case Sense::Nonsense: return nonsense(bank, graph, rng);
  }
  throw std::invalid_argument("unknown sense");
}

}  // namespace

std::string_view to_string(Sense sense) {
  switch (sense) {
    case Sense::Commonsense: return "commonsense";
    case Sense::AntiCommonsense: return "anticommonsense";
    case Sense::Nonsense: return "nonsense";
  }
  throw std::invalid_argument("unknown sense");
}

Sense sense_from_string(std::string_view name) {
  for (Sense s : {Sense::Commonsense, Sense::AntiCommonsense, Sense::Nonsense}) {
    if (to_string(s) == name) return s;
  }
  throw std::invalid_argument("unknown sense: " + std::string(name));
}

StoryBank StoryBank::parse(std::string_view json_text) {
  StoryBank bank;
  try {
    const json j = json::parse(json_text);
    bank.id_ = j.at("name").get<std::string>() + "@" +
               std::to_string(j.at("version").get<int>());
    for (const json& js : j.at("stories")) bank.stories_.push_back(parse_story(js));
    bank.anti_outcomes_ = parse_replacements(j.at("anti_outcomes"), "Y");
    bank.anti_treatments_ = parse_replacements(j.at("anti_treatments"), "X");
    for (const json& w : j.at("nonsense_words")) {
      auto word = w.get<std::string>();
      if (std::find(bank.words_.begin(), bank.words_.end(), word) == bank.words_.end()) {
        bank.words_.push_back(std::move(word));
      }
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("story bank: ") + e.what());
  }
  std::size_t most_nodes = 0;
  for (const GraphSpec& g : graph_bank()) {
    most_nodes = std::max(most_nodes, static_cast<std::size_t>(g.dag.size()));
  }
  if (bank.words_.size() < most_nodes) {
    throw std::invalid_argument("story bank: too few nonsense words");
  }
  return bank;
}

const StoryBank& StoryBank::builtin() {
  static const StoryBank bank = parse(detail::kBuiltinStoryBank);
  return bank;
}

std::vector<const Story*> StoryBank::stories_for(GraphId graph) const {
  std::vector<const Story*> out;
  for (const Story& s : stories_) {
    if (s.graph == graph) out.push_back(&s);
  }
  return out;
}

Story anti_commonsense(const StoryBank& bank, const Story& base, Rng& rng) {
  if (base.sense != Sense::Commonsense) {
    throw std::invalid_argument("anti_commonsense: base story must be commonsense");
  }
  const GraphSpec& g = graph_spec(base.graph);
  const bool outcome = rng.below(2) == 0;
  const auto& pool = outcome ? bank.anti_outcomes() : bank.anti_treatments();
  if (pool.empty()) throw GenerationError("story bank has no replacement attributes");
  const VariableForms& pick = pool[rng.below(pool.size())];
  Story s = base;
  s.sense = Sense::AntiCommonsense;
  s.variables[outcome ? g.y : g.x] = pick;
  s.id = base.id + (outcome ? "/y:" : "/x:") + pick.overall;
  return s;
}

Story nonsense(const StoryBank& bank, GraphId graph, Rng& rng) {
  const GraphSpec& g = graph_spec(graph);
  std::vector<std::string> words = bank.nonsense_words();
  rng.shuffle(words);
  Story s;
  s.graph = graph;
  s.sense = Sense::Nonsense;
  s.id = "nonsense/" + g.name;
  for (int v = 0; v < g.dag.size(); ++v) {
    s.variables.push_back(invented(g.dag.name(v), words[v]));
    s.id += (v == 0 ? ":" : ",") + words[v];
  }
  return s;
}

BernoulliCbn sample_parameters(GraphId graph, Rng& rng) {
  const GraphSpec& g = graph_spec(graph);
  const auto pct = [](int k) { return k / 100.0; };
  if (graph == GraphId::Iv) {
    std::vector<std::vector<double>> cpds(4);
    cpds[g.node("V1")] = {pct(rng.uniform_int(5, 95))};
    cpds[g.node("V2")] = {pct(rng.uniform_int(5, 95))};
    // X rows: V1 is bit 0, V2 is bit 1.
    const int lo0 = rng.uniform_int(5, 55);
    const int lo1 = rng.uniform_int(5, 55);
    const int up0 = lo0 + rng.uniform_int(5, 40);
    const int up1 = lo1 + rng.uniform_int(5, 40);
    cpds[g.x] = {pct(lo0), pct(lo1), pct(up0), pct(up1)};
    // Y rows: V1 is bit 0, X is bit 1.
    const int b = rng.uniform_int(-40, 40);
    const int c = rng.uniform_int(-40, 40);
    const int a = rng.uniform_int(5 - std::min({0, b, c, b + c}),
                                  95 - std::max({0, b, c, b + c}));
    cpds[g.y] = {pct(a), pct(a + c), pct(a + b), pct(a + b + c)};
    return BernoulliCbn(g.dag, std::move(cpds));
  }
  std::vector<std::vector<double>> cpds;
  for (int v = 0; v < g.dag.size(); ++v) {
    std::vector<double> rows(std::size_t{1} << g.dag.parent_list(v).size());
    for (double& p : rows) p = pct(rng.uniform_int(5, 95));
    cpds.push_back(std::move(rows));
  }
  return BernoulliCbn(g.dag, std::move(cpds));
}

Solution solve(const GraphSpec& g, const Query& q, const BernoulliCbn& cbn) {
  Solution s;
  s.estimand = derive_estimand(g, q);
  s.exact = evaluate(s.estimand, cbn);
  s.answer = answer(q, s.exact);
  for (const DataTerm& t : required_data(s.estimand)) {
    s.data.set(t, round_percent(cbn.query_prob({{t.node, 1}}, t.given)));
  }
  s.value = evaluate(s.estimand, s.data);
  if (answer(q, s.value) != s.answer) {
    throw AmbiguousAnswer("rounding the data changes the answer");
  }
  return s;
}

BernoulliCbn sample_cbn(const GraphSpec& g, const Query& q, std::uint64_t seed,
                        int max_attempts) {
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    Rng rng(derive_seed({seed, static_cast<std::uint64_t>(attempt)}));
    BernoulliCbn cbn = sample_parameters(g.id, rng);
    try {
      const Solution s = solve(g, q, cbn);
      if (rung(q.kind) == 3 && !scm_agrees(g, q, cbn, s.exact)) continue;
      return cbn;
    } catch (const DegenerateEstimand&) {
    } catch (const AmbiguousAnswer&) {
    }
  }
  throw GenerationError(fmt::format("no usable parameters for {} on {} after {} attempts",
                                    to_string(q.kind), g.name, max_attempts));
}

std::string verbalize_question(const GraphSpec& g, const Story& story,
                               const DataTable& data, const Query& query) {
  if (story.graph != g.id || static_cast<int>(story.variables.size()) != g.dag.size()) {
    throw std::invalid_argument("verbalize_question: story " + story.id +
                                " does not belong to graph " + g.name);
  }
  std::string text;
  for (int v = 0; v < g.dag.size(); ++v) {
    if (g.dag.children(v) == 0) continue;
    append(text, capitalize(story.var(v).overall) + " has a direct effect on " +
                     overall_list(story, g.dag.children(v)) + ".");
  }
  for (int v : members(g.unobserved)) {
    append(text, capitalize(story.var(v).overall) + " is unobserved.");
  }
  for (const auto& [term, p] : data.entries()) append(text, data_sentence(story, term, p));
  append(text, query_sentence(g, story, query));
  return text;
}

std::string generate_explanation(const GraphSpec& g, const Story& story,
                                 const Query& query, const Solution& s) {
  const auto& names = g.dag.names();
  std::vector<Edge> edges = g.dag.edges();
  std::sort(edges.begin(), edges.end());
  std::string graph;
  for (const Edge& e : edges) {
    graph += (graph.empty() ? "" : ",") + names[e.from] + "->" + names[e.to];
  }
  std::string legend;
  for (int v = 0; v < g.dag.size(); ++v) {
    legend += (v == 0 ? "" : ", ") + names[v] + " = " + story.var(v).overall;
  }
  std::string data;
  for (const auto& [term, p] : s.data.entries()) {
    data += (data.empty() ? "" : "; ") + to_string(term, names) + fmt::format("={:.2f}", p);
  }
  const std::string est = to_string(s.estimand, names);
  const std::string numeric = render_numeric(
      s.estimand, TermSource([&](const DataTerm& t) { return s.data.get(t); }));
  return fmt::format(
      "Step 1) Extract the causal graph: The causal graph expressed in the context is: "
      "\"{}\", where {}.\n\n"
      "Step 2) Identify the query type: The query type of the above question is \"{}\".\n\n"
      "Step 3) Formulate the query to its symbolic form: The formal form of the query is "
      "\"{}\".\n\n"
      "Step 4) Collect all the available data: The available data are: \"{}\".\n\n"
      "Step 5) Derive the estimand: Based on the graph structure and causal query, the "
      "question can be simplified into estimand \"{}\".\n\n"
      "Step 6) Solve for the estimand: Plug in the available data \"{}\" into \"{}\".\n"
      "{}\n≈ {:.4f}\n\n"
      "Since the estimate for the estimand is {:.4f}, the overall answer to the question "
      "is {}.",
      graph, legend, display_name(query.kind), symbolic_expression(g, query), data, est,
      data, est, numeric, s.value, s.value, to_string(s.answer));
}

CladderRecord make_record(const GraphSpec& g, const Query& query, const Story& story,
                          const BernoulliCbn& cbn) {
  const Solution s = solve(g, query, cbn);
  CladderRecord r;
  r.question = verbalize_question(g, story, s.data, query);
  r.answer = s.answer;
  r.explanation = generate_explanation(g, story, query, s);
  r.graph = g.id;
  r.query = query;
  r.story_id = story.id;
  r.sense = story.sense;
  r.cpds = cbn.cpds();
  r.estimand = to_string(s.estimand, g.dag.names());
  r.value = s.value;
  return r;
}

nlohmann::ordered_json to_json(const CladderRecord& r) {
  const GraphSpec& g = graph_spec(r.graph);
  nlohmann::ordered_json cpds = nlohmann::ordered_json::object();
  for (int v = 0; v < g.dag.size(); ++v) cpds[g.dag.name(v)] = r.cpds.at(v);
  nlohmann::ordered_json query = {{"kind", to_string(r.query.kind)},
                                  {"polarity", to_string(r.query.polarity)},
                                  {"given_value", r.query.given_value}};
  nlohmann::ordered_json meta = {{"graph", g.name},
                                 {"query", std::move(query)},
                                 {"rung", rung(r.query.kind)},
                                 {"story", r.story_id},
                                 {"sense", to_string(r.sense)},
                                 {"cpds", std::move(cpds)},
                                 {"estimand", r.estimand},
                                 {"value", r.value}};
  return {{"question", r.question},
          {"answer", to_string(r.answer)},
          {"explanation", r.explanation},
          {"meta", std::move(meta)}};
}

CladderDataset assemble_dataset(std::size_t size, std::uint64_t seed,
                                const StoryBank& bank) {
  const std::size_t n = size - size % 2;
  if (n == 0) throw std::invalid_argument("assemble_dataset: size must be at least 2");

  struct Cell {
    GraphId graph;
    QueryKind kind;
    Sense sense = Sense::Commonsense;
    bool yes = false;
  };
  const std::size_t per_rung[3] = {n * 5 / 16, n * 5 / 16, n - 2 * (n * 5 / 16)};
  std::vector<Cell> plan;
  for (int r = 1; r <= 3; ++r) {
    std::vector<Cell> cells;
    for (QueryKind k : kAllQueries) {
      if (rung(k) != r) continue;
      for (GraphId graph : kAllGraphs) {
        if (covers(graph, k)) cells.push_back({graph, k});
      }
    }
    for (std::size_t j = 0; j < per_rung[r - 1]; ++j) {
      Cell c = cells[j % cells.size()];
      c.sense = static_cast<Sense>(j / cells.size() % 3);
      plan.push_back(c);
    }
  }
  Rng order(derive_seed({seed}));
  order.shuffle(plan);

  // Collider-bias questions are always "no"; the rest share the yes quota
  // evenly in plan order.
  const std::size_t free = static_cast<std::size_t>(std::count_if(
      plan.begin(), plan.end(), [](const Cell& c) { return c.kind != QueryKind::ColliderBias; }));
  const std::size_t yes = n / 2;
  if (yes > free) throw GenerationError("assemble_dataset: yes quota is infeasible");
  std::size_t k = 0;
  for (Cell& c : plan) {
    if (c.kind == QueryKind::ColliderBias) continue;
    c.yes = (k + 1) * yes / free - k * yes / free == 1;
    ++k;
  }

  CladderDataset out;
  out.requested = size;
  out.records.reserve(n);
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const Cell& c = plan[i];
    const GraphSpec& g = graph_spec(c.graph);
    const std::uint64_t record_seed = derive_seed({seed, i});
    Rng rng(record_seed);
    const Story story = pick_story(bank, c.graph, c.sense, rng);
    Query q{c.kind, Polarity::Positive, 1};
    if (c.kind == QueryKind::ExplainingAway || c.kind == QueryKind::ColliderBias) {
      q.given_value = static_cast<int>(rng.below(2));
    }
    const BernoulliCbn cbn = sample_cbn(g, q, record_seed);
    const Answer want = c.yes ? Answer::Yes : Answer::No;
    if (solve(g, q, cbn).answer != want) q.polarity = Polarity::Negative;
    out.records.push_back(make_record(g, q, story, cbn));
    if (out.records.back().answer != want) {
      throw GenerationError("assemble_dataset: rephrasing did not reach the target answer");
    }
  }
  return out;
}

RoundTrip check_record(const nlohmann::json& record) {
  try {
    const json& meta = record.at("meta");
    const GraphSpec& g = graph_spec(graph_from_string(meta.at("graph").get<std::string>()));
    const json& jq = meta.at("query");
    Query q;
    q.kind = query_from_string(jq.at("kind").get<std::string>());
    q.polarity = polarity_from_string(jq.at("polarity").get<std::string>());
    q.given_value = jq.at("given_value").get<int>();
    if (meta.at("rung").get<int>() != rung(q.kind)) return {false, "rung mismatch"};
    std::vector<std::vector<double>> cpds;
    for (int v = 0; v < g.dag.size(); ++v) {
      cpds.push_back(meta.at("cpds").at(g.dag.name(v)).get<std::vector<double>>());
    }
    const BernoulliCbn cbn(g.dag, std::move(cpds));
    const Estimand est = derive_estimand(g, q);
    const Answer a = answer(q, evaluate(est, cbn));
    if (record.at("answer").get<std::string>() != to_string(a)) {
      return {false, "answer differs from the one derived from the cpds"};
    }
    if (meta.at("estimand").get<std::string>() != to_string(est, g.dag.names())) {
      return {false, "estimand mismatch"};
    }
    DataTable data;
    for (const DataTerm& t : required_data(est)) {
      data.set(t, round_percent(cbn.query_prob({{t.node, 1}}, t.given)));
    }
    if (std::abs(evaluate(est, data) - meta.at("value").get<double>()) > 1e-9) {
      return {false, "value does not reproduce from the stated data"};
    }
    return {true, ""};
  } catch (const std::exception& e) {
    return {false, e.what()};
  }
}

}  // namespace causegen
