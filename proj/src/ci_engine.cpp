#include "causegen/ci_engine.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <fmt/format.h>

#include "causegen/independence.hpp"

namespace causegen {

namespace {

GraphSpec make_graph(GraphId id, std::string name,
                     std::vector<std::string> roles, std::vector<Edge> edges,
                     NodeSet unobserved = 0) {
  const int n = static_cast<int>(roles.size());
  Dag dag(n, std::move(edges), roles);
  auto find = [&](const char* role) {
    return static_cast<int>(std::find(roles.begin(), roles.end(), role) -
                            roles.begin());
  };
  return GraphSpec{id, std::move(name), std::move(dag), find("X"), find("Y"),
                   unobserved};
}

std::vector<GraphSpec> build_bank() {
  std::vector<GraphSpec> bank;
  bank.push_back(make_graph(GraphId::Chain, "chain", {"X", "V2", "Y"},
                            {{0, 1}, {1, 2}}));
  bank.push_back(make_graph(GraphId::Fork, "fork", {"X", "V2", "Y"},
                            {{0, 2}, {1, 2}}));
  bank.push_back(make_graph(GraphId::Collision, "collision", {"X", "Y", "V3"},
                            {{0, 2}, {1, 2}}));
  bank.push_back(make_graph(GraphId::Confounding, "confounding",
                            {"V1", "X", "Y"}, {{0, 1}, {0, 2}, {1, 2}}));
  bank.push_back(make_graph(GraphId::Mediation, "mediation", {"X", "V2", "Y"},
                            {{0, 1}, {0, 2}, {1, 2}}));
  bank.push_back(make_graph(GraphId::Diamond, "diamond",
                            {"X", "V2", "V3", "Y"},
                            {{0, 1}, {0, 2}, {1, 3}, {2, 3}}));
  bank.push_back(make_graph(GraphId::DiamondCut, "diamondcut",
                            {"V1", "V3", "X", "Y"},
                            {{0, 1}, {0, 2}, {2, 3}, {1, 3}}));
  bank.push_back(make_graph(GraphId::Iv, "IV", {"V1", "V2", "X", "Y"},
                            {{0, 2}, {0, 3}, {1, 2}, {2, 3}}, singleton(0)));
  bank.push_back(make_graph(GraphId::Arrowhead, "arrowhead",
                            {"X", "V2", "V3", "Y"},
                            {{0, 2}, {1, 2}, {1, 3}, {0, 3}, {2, 3}}));
  bank.push_back(make_graph(GraphId::Frontdoor, "frontdoor",
                            {"V1", "X", "V3", "Y"},
                            {{0, 1}, {0, 3}, {1, 2}, {2, 3}}, singleton(0)));
  return bank;
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Estimand builders.
Slot lit(int node, int value) { return {node, value, -1}; }
Slot var(int node, int bound) { return {node, 0, bound}; }
Estimand P(Slot target, std::vector<Slot> given = {}) {
  return Estimand::term(target, std::move(given));
}

// P(Y=1|X=1) - P(Y=1|X=0)
Estimand simple_diff(int x, int y) {
  return Estimand::sub(P(lit(y, 1), {lit(x, 1)}), P(lit(y, 1), {lit(x, 0)}));
}

// sum_x P(X=x) P(Y=1|X=x)
Estimand total_y(int x, int y) {
  return Estimand::sum(
      0, x, Estimand::mul(P(var(x, 0)), P(lit(y, 1), {var(x, 0)})));
}

// sum_z P(z | cond) [P(Y=1|X=1,z) - P(Y=1|X=0,z)]
Estimand adjusted_diff(int x, int y, int z, std::vector<Slot> cond) {
  return Estimand::sum(
      0, z,
      Estimand::mul(P(var(z, 0), std::move(cond)),
                    Estimand::sub(P(lit(y, 1), {lit(x, 1), var(z, 0)}),
                                  P(lit(y, 1), {lit(x, 0), var(z, 0)}))));
}

// sum_z P(z|X=0) P(Y=1|X=1,z)
Estimand adjusted_counterfactual(int x, int y, int z) {
  return Estimand::sum(0, z,
                       Estimand::mul(P(var(z, 0), {lit(x, 0)}),
                                     P(lit(y, 1), {lit(x, 1), var(z, 0)})));
}

Estimand wald(int x, int y, int z) {
  return Estimand::div(
      Estimand::sub(P(lit(y, 1), {lit(z, 1)}), P(lit(y, 1), {lit(z, 0)})),
      Estimand::sub(P(lit(x, 1), {lit(z, 1)}), P(lit(x, 1), {lit(z, 0)})));
}

// sum_m [P(m|X=1) - P(m|X=0)] sum_x P(x) P(Y=1|x,m)
Estimand frontdoor_ate(int x, int y, int m) {
  return Estimand::sum(
      0, m,
      Estimand::mul(
          Estimand::sub(P(var(m, 0), {lit(x, 1)}), P(var(m, 0), {lit(x, 0)})),
          Estimand::sum(1, x,
                        Estimand::mul(P(var(x, 1)),
                                      P(lit(y, 1), {var(x, 1), var(m, 0)})))));
}

// P(Y=1|X=1) - sum_m P(m|X=0) P(Y=1|X=1,m)
Estimand frontdoor_att(int x, int y, int m) {
  return Estimand::sub(
      P(lit(y, 1), {lit(x, 1)}),
      Estimand::sum(0, m,
                    Estimand::mul(P(var(m, 0), {lit(x, 0)}),
                                  P(lit(y, 1), {lit(x, 1), var(m, 0)}))));
}

// sum_m P(m|X=1) P(Y=1|X=0,m)
Estimand frontdoor_counterfactual(int x, int y, int m) {
  return Estimand::sum(0, m,
                       Estimand::mul(P(var(m, 0), {lit(x, 1)}),
                                     P(lit(y, 1), {lit(x, 0), var(m, 0)})));
}

// Mediation formula with an optional pre-treatment covariate w confounding
// mediator and outcome (w independent of X).
Estimand mediation_nde(int x, int y, int m, int w = -1) {
  std::vector<Slot> wslot;
  if (w >= 0) wslot.push_back(var(w, 1));
  auto with = [&](std::vector<Slot> s) {
    s.insert(s.end(), wslot.begin(), wslot.end());
    return s;
  };
  Estimand inner = Estimand::sum(
      0, m,
      Estimand::mul(P(var(m, 0), with({lit(x, 0)})),
                    Estimand::sub(P(lit(y, 1), with({lit(x, 1), var(m, 0)})),
                                  P(lit(y, 1), with({lit(x, 0), var(m, 0)})))));
  if (w < 0) return inner;
  return Estimand::sum(1, w, Estimand::mul(P(var(w, 1)), std::move(inner)));
}

Estimand mediation_nie(int x, int y, int m, int w = -1) {
  std::vector<Slot> wslot;
  if (w >= 0) wslot.push_back(var(w, 1));
  auto with = [&](std::vector<Slot> s) {
    s.insert(s.end(), wslot.begin(), wslot.end());
    return s;
  };
  Estimand inner = Estimand::sum(
      0, m,
      Estimand::mul(Estimand::sub(P(var(m, 0), with({lit(x, 1)})),
                                  P(var(m, 0), with({lit(x, 0)}))),
                    P(lit(y, 1), with({lit(x, 0), var(m, 0)}))));
  if (w < 0) return inner;
  return Estimand::sum(1, w, Estimand::mul(P(var(w, 1)), std::move(inner)));
}

// Two parallel mediators a, b each caused only by X; Y caused only by them.
Estimand diamond_nie(int x, int y, int a, int b) {
  auto joint = [&](int xv) {
    return Estimand::mul(P(var(a, 0), {lit(x, xv)}), P(var(b, 1), {lit(x, xv)}));
  };
  return Estimand::sum(
      0, a,
      Estimand::sum(1, b,
                    Estimand::mul(Estimand::sub(joint(1), joint(0)),
                                  P(lit(y, 1), {var(a, 0), var(b, 1)}))));
}

void uncovered(const GraphSpec& g, QueryKind kind) {
  throw std::invalid_argument("query " + std::string(to_string(kind)) +
                              " is not covered on graph " + g.name);
}

int slot_value(const Slot& s, const std::vector<int>& env) {
  return s.bound >= 0 ? env.at(s.bound) : s.value;
}

DataTerm concrete(const Estimand& e, const std::vector<int>& env) {
  DataTerm t;
  t.node = e.target().node;
  for (const Slot& s : e.given()) t.given.set(s.node, slot_value(s, env));
  return t;
}

double eval(const Estimand& e, const TermSource& src, std::vector<int>& env) {
  switch (e.op()) {
    case Estimand::Op::Const: return e.value();
    case Estimand::Op::Term: {
      const double p1 = src(concrete(e, env));
      return slot_value(e.target(), env) == 1 ? p1 : 1.0 - p1;
    }
    case Estimand::Op::Add:
      return eval(e.args()[0], src, env) + eval(e.args()[1], src, env);
    case Estimand::Op::Sub:
      return eval(e.args()[0], src, env) - eval(e.args()[1], src, env);
    case Estimand::Op::Mul:
      return eval(e.args()[0], src, env) * eval(e.args()[1], src, env);
    case Estimand::Op::Div: {
      const double den = eval(e.args()[1], src, env);
      if (den == 0.0) throw DegenerateEstimand("estimand divides by zero");
      return eval(e.args()[0], src, env) / den;
    }
    case Estimand::Op::Sum: {
      if (static_cast<int>(env.size()) <= e.bound()) env.resize(e.bound() + 1, 0);
      double total = 0.0;
      for (int v = 0; v <= 1; ++v) {
        env[e.bound()] = v;
        total += eval(e.args()[0], src, env);
      }
      return total;
    }
  }
  throw std::logic_error("unknown estimand op");
}

void collect(const Estimand& e, std::vector<int>& env,
             std::vector<DataTerm>& out) {
  switch (e.op()) {
    case Estimand::Op::Const: return;
    case Estimand::Op::Term: {
      DataTerm t = concrete(e, env);
      if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
      return;
    }
    case Estimand::Op::Sum:
      if (static_cast<int>(env.size()) <= e.bound()) env.resize(e.bound() + 1, 0);
      for (int v = 0; v <= 1; ++v) {
        env[e.bound()] = v;
        collect(e.args()[0], env, out);
      }
      return;
    default:
      for (const Estimand& a : e.args()) collect(a, env, out);
  }
}

bool compound(const Estimand& e) {
  return e.op() == Estimand::Op::Add || e.op() == Estimand::Op::Sub;
}

std::string slot_text(const Slot& s, std::span<const std::string> names) {
  return names[s.node] + "=" +
         (s.bound >= 0 ? lower(names[s.node]) : std::to_string(s.value));
}

std::string format_number(double v) {
  if (v == std::floor(v) && std::abs(v) < 1e9) return fmt::format("{}", static_cast<long long>(v));
  return fmt::format("{:.2f}", v);
}

// Shared printer: `leaf` renders terms, `expand` controls whether sums are
// written symbolically or expanded over both values.
std::string print(const Estimand& e, std::span<const std::string> names,
                  const TermSource* src, std::vector<int>& env) {
  auto wrap = [&](const Estimand& a) {
    std::string s = print(a, names, src, env);
    return compound(a) || (src != nullptr && a.op() == Estimand::Op::Sum)
               ? "[" + s + "]"
               : s;
  };
  switch (e.op()) {
    case Estimand::Op::Const: return format_number(e.value());
    case Estimand::Op::Term: {
      if (src != nullptr) {
        const double p1 = (*src)(concrete(e, env));
        return fmt::format("{:.2f}",
                           slot_value(e.target(), env) == 1 ? p1 : 1.0 - p1);
      }
      std::string s = "P(" + slot_text(e.target(), names);
      for (std::size_t k = 0; k < e.given().size(); ++k) {
        s += (k == 0 ? "|" : ",") + slot_text(e.given()[k], names);
      }
      return s + ")";
    }
    case Estimand::Op::Add:
      return print(e.args()[0], names, src, env) + " + " +
             print(e.args()[1], names, src, env);
    case Estimand::Op::Sub:
      return print(e.args()[0], names, src, env) + " - " + wrap(e.args()[1]);
    case Estimand::Op::Mul: return wrap(e.args()[0]) + " * " + wrap(e.args()[1]);
    case Estimand::Op::Div:
      return "[" + print(e.args()[0], names, src, env) + "] / [" +
             print(e.args()[1], names, src, env) + "]";
    case Estimand::Op::Sum: {
      if (static_cast<int>(env.size()) <= e.bound()) env.resize(e.bound() + 1, 0);
      if (src == nullptr) {
        return "\\sum_{" + lower(names[e.sum_node()]) + "} " +
               (compound(e.args()[0]) ? "[" + print(e.args()[0], names, src, env) + "]"
                                      : print(e.args()[0], names, src, env));
      }
      std::string s;
      for (int v = 0; v <= 1; ++v) {
        env[e.bound()] = v;
        if (v == 1) s += " + ";
        s += print(e.args()[0], names, src, env);
      }
      return s;
    }
  }
  throw std::logic_error("unknown estimand op");
}

double y_indicator(const GraphSpec& g, NodeSet world) {
  return contains(world, g.y) ? 1.0 : 0.0;
}

// E[Y_{x, M_{x'}}]
double nested_mean(const GraphSpec& g, const ResponseFunctionScm& scm, int x,
                   int x_med) {
  const NodeSet med = g.mediators();
  return scm.expectation([&](const Unit& u) {
    Assignment act{{g.x, x_med}};
    const NodeSet base = u.world(act);
    Assignment nested{{g.x, x}};
    for (int m : members(med)) nested.set(m, contains(base, m) ? 1 : 0);
    return y_indicator(g, u.world(nested));
  });
}

}  // namespace

int GraphSpec::node(std::string_view role) const {
  const auto& names = dag.names();
  auto it = std::find(names.begin(), names.end(), role);
  if (it == names.end()) {
    throw std::out_of_range("graph " + name + " has no node " + std::string(role));
  }
  return static_cast<int>(it - names.begin());
}

NodeSet GraphSpec::mediators() const {
  return dag.descendants(x) & dag.ancestors(y);
}

const std::vector<GraphSpec>& graph_bank() {
  static const std::vector<GraphSpec> bank = build_bank();
  return bank;
}

const GraphSpec& graph_spec(GraphId id) {
  for (const GraphSpec& g : graph_bank()) {
    if (g.id == id) return g;
  }
  throw std::invalid_argument("unknown graph id");
}

std::string_view to_string(GraphId id) { return graph_spec(id).name; }

GraphId graph_from_string(std::string_view name) {
  for (const GraphSpec& g : graph_bank()) {
    if (g.name == name) return g.id;
  }
  throw std::invalid_argument("unknown graph: " + std::string(name));
}

std::string_view to_string(QueryKind kind) {
  switch (kind) {
    case QueryKind::MarginalProb: return "marginal";
    case QueryKind::ConditionalProb: return "conditional";
    case QueryKind::ExplainingAway: return "explaining_away";
    case QueryKind::BackdoorAdjustmentSet: return "backdoor_adjustment_set";
    case QueryKind::Ate: return "ate";
    case QueryKind::ColliderBias: return "collider_bias";
    case QueryKind::CounterfactualProb: return "counterfactual";
    case QueryKind::Att: return "att";
    case QueryKind::Nde: return "nde";
    case QueryKind::Nie: return "nie";
  }
  throw std::invalid_argument("unknown query kind");
}

QueryKind query_from_string(std::string_view name) {
  for (QueryKind k : kAllQueries) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown query kind: " + std::string(name));
}

std::string_view display_name(QueryKind kind) {
  switch (kind) {
    case QueryKind::MarginalProb: return "marginal probability";
    case QueryKind::ConditionalProb: return "conditional probability";
    case QueryKind::ExplainingAway: return "explaining away effect";
    case QueryKind::BackdoorAdjustmentSet: return "backdoor adjustment set";
    case QueryKind::Ate: return "average treatment effect";
    case QueryKind::ColliderBias: return "collider bias";
    case QueryKind::CounterfactualProb: return "normal counterfactual question";
    case QueryKind::Att: return "average treatment effect on treated";
    case QueryKind::Nde: return "natural direct effect";
    case QueryKind::Nie: return "natural indirect effect";
  }
  throw std::invalid_argument("unknown query kind");
}

int rung(QueryKind kind) {
  switch (kind) {
    case QueryKind::MarginalProb:
    case QueryKind::ConditionalProb:
    case QueryKind::ExplainingAway: return 1;
    case QueryKind::BackdoorAdjustmentSet:
    case QueryKind::Ate:
    case QueryKind::ColliderBias: return 2;
    default: return 3;
  }
}

std::string_view to_string(Polarity polarity) {
  return polarity == Polarity::Positive ? "positive" : "negative";
}

Polarity polarity_from_string(std::string_view name) {
  if (name == "positive") return Polarity::Positive;
  if (name == "negative") return Polarity::Negative;
  throw std::invalid_argument("unknown polarity: " + std::string(name));
}

bool covers(GraphId graph, QueryKind kind) {
  using G = GraphId;
  switch (kind) {
    case QueryKind::MarginalProb: return true;
    case QueryKind::ConditionalProb:
    case QueryKind::Ate:
    case QueryKind::CounterfactualProb: return graph != G::Collision;
    case QueryKind::ExplainingAway:
    case QueryKind::ColliderBias: return graph == G::Collision;
    case QueryKind::BackdoorAdjustmentSet: return backdoor_candidate(graph) != 0;
    case QueryKind::Att: return graph != G::Collision && graph != G::Iv;
    case QueryKind::Nde:
      return graph == G::Iv || graph == G::Arrowhead || graph == G::Confounding ||
             graph == G::Mediation || graph == G::DiamondCut;
    case QueryKind::Nie:
      return graph == G::Mediation || graph == G::Frontdoor ||
             graph == G::Arrowhead || graph == G::Diamond || graph == G::Chain;
  }
  return false;
}

NodeSet backdoor_candidate(GraphId graph) {
  const GraphSpec& g = graph_spec(graph);
  switch (graph) {
    case GraphId::Chain:
    case GraphId::Mediation:
    case GraphId::Diamond: return singleton(g.node("V2"));
    case GraphId::Collision:
    case GraphId::Arrowhead: return singleton(g.node("V3"));
    case GraphId::Confounding:
    case GraphId::DiamondCut: return singleton(g.node("V1"));
    default: return 0;
  }
}

NodeSet asked_set(GraphId graph, const Query& query) {
  return query.polarity == Polarity::Positive ? backdoor_candidate(graph) : 0;
}

bool check_backdoor_set(const Dag& dag, int x, int y, NodeSet z) {
  if (x == y) throw std::invalid_argument("check_backdoor_set: x == y");
  if (contains(z, x) || contains(z, y)) {
    throw std::invalid_argument("check_backdoor_set: z contains x or y");
  }
  if ((z & dag.descendants(x)) != 0) return false;
  return is_d_separated(dag.without_outgoing(singleton(x)), x, y, z);
}

Estimand Estimand::constant(double v) {
  Estimand e;
  e.op_ = Op::Const;
  e.value_ = v;
  return e;
}

Estimand Estimand::term(Slot target, std::vector<Slot> given) {
  Estimand e;
  e.op_ = Op::Term;
  e.target_ = target;
  std::sort(given.begin(), given.end(),
            [](const Slot& a, const Slot& b) { return a.node < b.node; });
  e.given_ = std::move(given);
  return e;
}

#define CAUSEGEN_BINARY(fn, kind)                 \
  Estimand Estimand::fn(Estimand a, Estimand b) { \
    Estimand e;                                   \
    e.op_ = Op::kind;                             \
    e.args_.push_back(std::move(a));              \
    e.args_.push_back(std::move(b));              \
    return e;                                     \
  }
CAUSEGEN_BINARY(add, Add)
CAUSEGEN_BINARY(sub, Sub)
CAUSEGEN_BINARY(mul, Mul)
CAUSEGEN_BINARY(div, Div)
#undef CAUSEGEN_BINARY

Estimand Estimand::sum(int bound, int node, Estimand body) {
  Estimand e;
  e.op_ = Op::Sum;
  e.bound_ = bound;
  e.sum_node_ = node;
  e.args_.push_back(std::move(body));
  return e;
}

std::string to_string(const DataTerm& term, std::span<const std::string> names) {
  std::string s = "P(" + names[term.node] + "=1";
  bool first = true;
  for (int g : members(term.given.mask)) {
    s += first ? "|" : ",";
    first = false;
    s += names[g] + "=" + std::to_string(term.given.get(g));
  }
  return s + ")";
}

Estimand derive_estimand(const GraphSpec& g, const Query& query) {
  if (!covers(g.id, query.kind)) uncovered(g, query.kind);
  const int x = g.x;
  const int y = g.y;
  using G = GraphId;
  switch (query.kind) {
    case QueryKind::MarginalProb: return total_y(x, y);
    case QueryKind::ConditionalProb:
      return Estimand::sub(P(lit(y, 1), {lit(x, 1)}), total_y(x, y));
    case QueryKind::ExplainingAway: {
      const int z = g.node("V3");
      const int zv = query.given_value;
      return Estimand::sub(
          P(lit(y, 1), {lit(x, 1), lit(z, zv)}),
          Estimand::sum(0, x,
                        Estimand::mul(P(var(x, 0), {lit(z, zv)}),
                                      P(lit(y, 1), {var(x, 0), lit(z, zv)}))));
    }
    case QueryKind::BackdoorAdjustmentSet:
      return Estimand::constant(
          check_backdoor_set(g.dag, x, y, asked_set(g.id, query)) ? 1.0 : 0.0);
    case QueryKind::ColliderBias: return Estimand::constant(0.0);
    case QueryKind::Ate:
      switch (g.id) {
        case G::Confounding: return adjusted_diff(x, y, g.node("V1"), {});
        case G::DiamondCut: return adjusted_diff(x, y, g.node("V3"), {});
        case G::Iv: return wald(x, y, g.node("V2"));
        case G::Frontdoor: return frontdoor_ate(x, y, g.node("V3"));
        default: return simple_diff(x, y);
      }
    case QueryKind::Att:
      switch (g.id) {
        case G::Confounding:
          return adjusted_diff(x, y, g.node("V1"), {lit(x, 1)});
        case G::DiamondCut:
          return adjusted_diff(x, y, g.node("V3"), {lit(x, 1)});
        case G::Frontdoor: return frontdoor_att(x, y, g.node("V3"));
        default: return simple_diff(x, y);
      }
    case QueryKind::CounterfactualProb:
      switch (g.id) {
        case G::Confounding: return adjusted_counterfactual(x, y, g.node("V1"));
        case G::DiamondCut: return adjusted_counterfactual(x, y, g.node("V3"));
        case G::Frontdoor: return frontdoor_counterfactual(x, y, g.node("V3"));
        case G::Iv:
          return Estimand::add(P(lit(y, 1), {lit(x, 0)}), wald(x, y, g.node("V2")));
        default: return P(lit(y, 1), {lit(x, 1)});
      }
    case QueryKind::Nde:
      switch (g.id) {
        case G::Mediation: return mediation_nde(x, y, g.node("V2"));
        case G::Arrowhead: return mediation_nde(x, y, g.node("V3"), g.node("V2"));
        case G::Confounding: return adjusted_diff(x, y, g.node("V1"), {});
        case G::DiamondCut: return adjusted_diff(x, y, g.node("V3"), {});
        case G::Iv: return wald(x, y, g.node("V2"));
        default: uncovered(g, query.kind);
      }
      break;
    case QueryKind::Nie:
      switch (g.id) {
        case G::Mediation: return mediation_nie(x, y, g.node("V2"));
        case G::Arrowhead: return mediation_nie(x, y, g.node("V3"), g.node("V2"));
        case G::Frontdoor: return frontdoor_ate(x, y, g.node("V3"));
        case G::Diamond: return diamond_nie(x, y, g.node("V2"), g.node("V3"));
        case G::Chain: {
          const int m = g.node("V2");
          return Estimand::sum(
              0, m,
              Estimand::mul(Estimand::sub(P(var(m, 0), {lit(x, 1)}),
                                          P(var(m, 0), {lit(x, 0)})),
                            P(lit(y, 1), {var(m, 0)})));
        }
        default: uncovered(g, query.kind);
      }
      break;
  }
  uncovered(g, query.kind);
  return Estimand::constant(0.0);
}

std::vector<DataTerm> required_data(const Estimand& est) {
  std::vector<DataTerm> out;
  std::vector<int> env;
  collect(est, env, out);
  return out;
}

double evaluate(const Estimand& est, const TermSource& source) {
  std::vector<int> env;
  return eval(est, source, env);
}

double evaluate(const Estimand& est, const BernoulliCbn& cbn) {
  return evaluate(est, TermSource([&](const DataTerm& t) {
                    return cbn.query_prob({{t.node, 1}}, t.given);
                  }));
}

void DataTable::set(const DataTerm& term, double p) {
  for (auto& [t, v] : entries_) {
    if (t == term) {
      v = p;
      return;
    }
  }
  entries_.emplace_back(term, p);
}

double DataTable::get(const DataTerm& term) const {
  for (const auto& [t, v] : entries_) {
    if (t == term) return v;
  }
  throw std::out_of_range("data table lacks a required term");
}

double evaluate(const Estimand& est, const DataTable& data) {
  return evaluate(est, TermSource([&](const DataTerm& t) { return data.get(t); }));
}

std::string to_string(const Estimand& est, std::span<const std::string> names) {
  std::vector<int> env;
  return print(est, names, nullptr, env);
}

std::string render_numeric(const Estimand& est, const TermSource& source) {
  std::vector<int> env;
  const std::vector<std::string> none;
  return print(est, none, &source, env);
}

std::string symbolic_expression(const GraphSpec& g, const Query& q) {
  const auto& n = g.dag.names();
  const std::string X = n[g.x];
  const std::string Y = n[g.y];
  switch (q.kind) {
    case QueryKind::MarginalProb: return "P(" + Y + ")";
    case QueryKind::ConditionalProb: return "P(" + Y + "|" + X + ")";
    case QueryKind::ExplainingAway:
      return "P(" + Y + "|" + X + ",V3=" + std::to_string(q.given_value) + ")";
    case QueryKind::BackdoorAdjustmentSet: {
      std::string set;
      for (int v : members(asked_set(g.id, q))) set += (set.empty() ? "" : ",") + n[v];
      return "[backdoor adjustment set for " + Y + " given " + X + "]: {" + set + "}";
    }
    case QueryKind::Ate:
      return "E[" + Y + "|do(" + X + "=1)]-E[" + Y + "|do(" + X + "=0)]";
    case QueryKind::ColliderBias: {
      const std::string z = "V3=" + std::to_string(q.given_value);
      return "E[" + Y + "|do(" + X + "=1)," + z + "]-E[" + Y + "|do(" + X +
             "=0)," + z + "]";
    }
    case QueryKind::CounterfactualProb:
      return "P(" + Y + "_{" + X + "=1}=" +
             (q.polarity == Polarity::Positive ? "1" : "0") + "|" + X + "=0)";
    case QueryKind::Att:
      return "E[" + Y + "_{" + X + "=1}-" + Y + "_{" + X + "=0}|" + X + "=1]";
    case QueryKind::Nde:
      return "E[" + Y + "_{" + X + "=1,M_{" + X + "=0}}-" + Y + "_{" + X +
             "=0,M_{" + X + "=0}}]";
    case QueryKind::Nie:
      return "E[" + Y + "_{" + X + "=0,M_{" + X + "=1}}-" + Y + "_{" + X +
             "=0,M_{" + X + "=0}}]";
  }
  throw std::invalid_argument("unknown query kind");
}

double nde(const GraphSpec& g, const ResponseFunctionScm& scm) {
  return nested_mean(g, scm, 1, 0) - nested_mean(g, scm, 0, 0);
}

double nie(const GraphSpec& g, const ResponseFunctionScm& scm) {
  return nested_mean(g, scm, 0, 1) - nested_mean(g, scm, 0, 0);
}

double nie_treated(const GraphSpec& g, const ResponseFunctionScm& scm) {
  return nested_mean(g, scm, 1, 1) - nested_mean(g, scm, 1, 0);
}

double direct_value(const GraphSpec& g, const Query& q, const BernoulliCbn& cbn,
                    const ResponseFunctionScm& scm) {
  if (!cbn.dag().same_structure(g.dag)) {
    throw std::invalid_argument("direct_value: model graph does not match");
  }
  const int x = g.x;
  const int y = g.y;
  switch (q.kind) {
    case QueryKind::MarginalProb: return cbn.query_prob({{y, 1}});
    case QueryKind::ConditionalProb:
      return cbn.query_prob({{y, 1}}, {{x, 1}}) - cbn.query_prob({{y, 1}});
    case QueryKind::ExplainingAway: {
      const Assignment z{{g.node("V3"), q.given_value}};
      Assignment xz = z;
      xz.set(x, 1);
      return cbn.query_prob({{y, 1}}, xz) - cbn.query_prob({{y, 1}}, z);
    }
    case QueryKind::BackdoorAdjustmentSet:
      return check_backdoor_set(g.dag, x, y, asked_set(g.id, q)) ? 1.0 : 0.0;
    case QueryKind::Ate:
      return cbn.intervene({{x, 1}}).query_prob({{y, 1}}) -
             cbn.intervene({{x, 0}}).query_prob({{y, 1}});
    case QueryKind::ColliderBias: {
      const Assignment z{{g.node("V3"), q.given_value}};
      return counterfactual_expectation(
          scm,
          [&](const Unit& u) {
            return y_indicator(g, u.world({{x, 1}})) -
                   y_indicator(g, u.world({{x, 0}}));
          },
          [&](const Unit& u) { return z.matches(u.world()); });
    }
    case QueryKind::CounterfactualProb:
      return counterfactual_prob(scm, {{x, 1}}, {{y, 1}}, {{x, 0}});
    case QueryKind::Att:
      return counterfactual_expectation(
          scm,
          [&](const Unit& u) {
            return y_indicator(g, u.world({{x, 1}})) -
                   y_indicator(g, u.world({{x, 0}}));
          },
          [&](const Unit& u) { return contains(u.world(), x); });
    case QueryKind::Nde: return nde(g, scm);
    case QueryKind::Nie: return nie(g, scm);
  }
  throw std::invalid_argument("unknown query kind");
}

double direct_value(const GraphSpec& g, const Query& q, const BernoulliCbn& cbn) {
  return direct_value(g, q, cbn, ResponseFunctionScm::comonotone(cbn));
}

std::string_view to_string(Answer a) { return a == Answer::Yes ? "yes" : "no"; }

Answer answer(const Query& query, double value) {
  if (!std::isfinite(value)) {
    throw std::invalid_argument("answer: value is not finite");
  }
  const bool positive = query.polarity == Polarity::Positive;
  double d = value;
  switch (query.kind) {
    case QueryKind::ColliderBias: return Answer::No;
    case QueryKind::BackdoorAdjustmentSet:
      return value > 0.5 ? Answer::Yes : Answer::No;
    case QueryKind::MarginalProb:
    case QueryKind::CounterfactualProb: d = value - 0.5; break;
    default: break;
  }
  if (std::abs(d) < kAmbiguityEpsilon) {
    throw AmbiguousAnswer("answer: value too close to the decision boundary");
  }
  return (d > 0) == positive ? Answer::Yes : Answer::No;
}

double explaining_away_delta(const BernoulliCbn& cbn, int z) {
  const GraphSpec& g = graph_spec(GraphId::Collision);
  if (!cbn.dag().same_structure(g.dag)) {
    throw std::invalid_argument("explaining_away_delta: needs the collision graph");
  }
  const Assignment given{{g.node("V3"), z}};
  Assignment with_x = given;
  with_x.set(g.x, 1);
  return cbn.query_prob({{g.y, 1}}, with_x) - cbn.query_prob({{g.y, 1}}, given);
}

}  // namespace causegen
