#include "argeval/qbaf.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace argeval {

namespace {

bool in_unit_interval(double v) { return v >= 0.0 && v <= 1.0; }  // false for NaN

void require_unit(double v, const char* what) {
  if (!in_unit_interval(v)) {
    std::ostringstream os;
    os << what << " " << v << " outside [0,1]";
    throw DomainError(os.str());
  }
}

}  // namespace

const char* to_string(Polarity polarity) {
  return polarity == Polarity::Attack ? "attack" : "support";
}

const Argument* Qbaf::find(const ArgumentId& id) const {
  auto it = std::find_if(arguments.begin(), arguments.end(),
                         [&](const Argument& a) { return a.id == id; });
  return it == arguments.end() ? nullptr : &*it;
}

Argument* Qbaf::find(const ArgumentId& id) {
  return const_cast<Argument*>(std::as_const(*this).find(id));
}

const Relation* Qbaf::parent_relation(const ArgumentId& id) const {
  for (const auto& r : relations) {
    if (r.source == id) return &r;
  }
  return nullptr;
}

std::vector<const Relation*> Qbaf::child_relations(const ArgumentId& id) const {
  std::vector<const Relation*> out;
  for (const auto& r : relations) {
    if (r.target == id) out.push_back(&r);
  }
  return out;
}

std::vector<ArgumentId> Qbaf::subtree(const ArgumentId& id) const {
  std::vector<ArgumentId> out{id};
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (const auto* r : child_relations(out[i])) out.push_back(r->source);
  }
  return out;
}

int Qbaf::height() const {
  int best = 0;
  std::vector<std::pair<ArgumentId, int>> stack{{root, 0}};
  while (!stack.empty()) {
    auto [id, depth] = stack.back();
    stack.pop_back();
    best = std::max(best, depth);
    for (const auto* r : child_relations(id)) stack.emplace_back(r->source, depth + 1);
  }
  return best;
}

bool operator==(const Qbaf& lhs, const Qbaf& rhs) {
  if (lhs.root != rhs.root || lhs.arguments != rhs.arguments) return false;
  auto key = [](const Relation& r) {
    return std::tuple(r.source, r.target, static_cast<int>(r.polarity));
  };
  std::multiset<std::tuple<std::string, std::string, int>> a, b;
  for (const auto& r : lhs.relations) a.insert(key(r));
  for (const auto& r : rhs.relations) b.insert(key(r));
  return a == b;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) os << "; ";
    os << violations[i].subject << ": " << violations[i].message;
  }
  return os.str();
}

StructuralError::StructuralError(ValidationReport report)
    : std::runtime_error("invalid framework: " + report.summary()), report_(std::move(report)) {}

ValidationReport validate(const Qbaf& qbaf) {
  ValidationReport report;
  auto add = [&](std::string subject, std::string message) {
    report.violations.push_back({std::move(subject), std::move(message)});
  };

  std::unordered_set<ArgumentId> ids;
  for (const auto& a : qbaf.arguments) {
    if (a.id.empty()) add("argument", "empty id");
    if (!ids.insert(a.id).second) add(a.id, "duplicate argument id");
    if (a.text.empty()) add(a.id, "empty text");
    if (!in_unit_interval(a.base_score)) add(a.id, "base score outside [0,1]");
  }
  if (!ids.contains(qbaf.root)) add(qbaf.root.empty() ? "root" : qbaf.root, "root is not an argument");

  std::map<std::pair<ArgumentId, ArgumentId>, Polarity> seen;
  std::unordered_map<ArgumentId, int> outgoing;
  std::unordered_map<ArgumentId, ArgumentId> parent;
  for (const auto& r : qbaf.relations) {
    const std::string subject = r.source + "->" + r.target;
    if (!ids.contains(r.source) || !ids.contains(r.target)) {
      add(subject, "relation endpoint is not an argument");
      continue;
    }
    if (r.source == r.target) {
      add(subject, "self-relation");
      continue;
    }
    auto [it, inserted] = seen.emplace(std::pair(r.source, r.target), r.polarity);
    if (!inserted) {
      add(subject, it->second == r.polarity ? "duplicate relation" : "conflicting polarity");
      continue;
    }
    ++outgoing[r.source];
    parent[r.source] = r.target;
  }

  for (const auto& a : qbaf.arguments) {
    const int n = outgoing.contains(a.id) ? outgoing[a.id] : 0;
    if (a.id == qbaf.root) {
      if (n != 0) add(a.id, "root has an outgoing relation");
    } else if (n != 1) {
      add(a.id, n == 0 ? "argument is disconnected from the tree"
                       : "argument has more than one outgoing relation");
    }
  }

  // Walking parent pointers must reach the root without revisiting anything.
  if (report.ok()) {
    for (const auto& a : qbaf.arguments) {
      std::unordered_set<ArgumentId> path;
      ArgumentId cur = a.id;
      while (cur != qbaf.root) {
        if (!path.insert(cur).second) {
          add(a.id, "cycle in relation graph");
          break;
        }
        cur = parent.at(cur);
      }
    }
  }
  return report;
}

double df_quad_aggregate(std::span<const double> strengths) {
  if (strengths.empty()) return 0.0;
  std::vector<double> sorted(strengths.begin(), strengths.end());
  for (double v : sorted) require_unit(v, "strength");
  std::sort(sorted.begin(), sorted.end());
  double product = 1.0;
  for (double v : sorted) product *= std::fabs(1.0 - v);
  return 1.0 - product;
}

double df_quad_combine(double base, double attack, double support) {
  require_unit(base, "base score");
  require_unit(attack, "aggregated attack");
  require_unit(support, "aggregated support");
  if (attack == support) return base;
  if (attack > support) return base - base * std::fabs(support - attack);
  return base + (1.0 - base) * std::fabs(support - attack);
}

StrengthMap evaluate(const Qbaf& qbaf, Semantics semantics) {
  if (auto report = validate(qbaf); !report.ok()) throw StructuralError(std::move(report));
  (void)semantics;  // DF-QuAD is the only semantics shipped.

  std::unordered_map<ArgumentId, std::vector<const Relation*>> children;
  for (const auto& r : qbaf.relations) children[r.target].push_back(&r);
  std::unordered_map<ArgumentId, double> base;
  for (const auto& a : qbaf.arguments) base[a.id] = a.base_score;

  StrengthMap strength;
  // Iterative post-order: a node is finalised once all its children are.
  std::vector<std::pair<ArgumentId, bool>> stack{{qbaf.root, false}};
  while (!stack.empty()) {
    auto [id, expanded] = stack.back();
    stack.pop_back();
    const auto& kids = children[id];
    if (!expanded) {
      stack.emplace_back(id, true);
      for (const auto* r : kids) stack.emplace_back(r->source, false);
      continue;
    }
    std::vector<double> attackers, supporters;
    for (const auto* r : kids) {
      (r->polarity == Polarity::Attack ? attackers : supporters).push_back(strength.at(r->source));
    }
    strength[id] = df_quad_combine(base.at(id), df_quad_aggregate(attackers),
                                   df_quad_aggregate(supporters));
  }
  return strength;
}

double root_strength(const Qbaf& qbaf, Semantics semantics) {
  return evaluate(qbaf, semantics).at(qbaf.root);
}

nlohmann::json to_json(const Qbaf& qbaf) {
  nlohmann::json args = nlohmann::json::array();
  for (const auto& a : qbaf.arguments) {
    args.push_back({{"id", a.id}, {"text", a.text}, {"base_score", a.base_score}});
  }
  nlohmann::json attacks = nlohmann::json::array(), supports = nlohmann::json::array();
  for (const auto& r : qbaf.relations) {
    (r.polarity == Polarity::Attack ? attacks : supports).push_back({r.source, r.target});
  }
  return {{"root", qbaf.root}, {"arguments", args}, {"attacks", attacks}, {"supports", supports}};
}

Qbaf qbaf_from_json(const nlohmann::json& j) {
  Qbaf q;
  q.root = j.at("root").get<std::string>();
  for (const auto& a : j.at("arguments")) {
    q.arguments.push_back({a.at("id").get<std::string>(), a.at("text").get<std::string>(),
                           a.at("base_score").get<double>()});
  }
  auto read_edges = [&](const char* key, Polarity polarity) {
    if (!j.contains(key)) return;
    for (const auto& e : j.at(key)) {
      if (!e.is_array() || e.size() != 2) throw DomainError(std::string(key) + " entries must be [source, target]");
      q.relations.push_back({e[0].get<std::string>(), e[1].get<std::string>(), polarity});
    }
  };
  read_edges("attacks", Polarity::Attack);
  read_edges("supports", Polarity::Support);
  return q;
}

}  // namespace argeval
