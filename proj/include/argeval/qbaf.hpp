#pragma once

#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace argeval {

using ArgumentId = std::string;

enum class Polarity { Attack, Support };

struct Argument {
  ArgumentId id;
  std::string text;
  double base_score = 0.5;

  bool operator==(const Argument&) const = default;
};

/// Directed edge from a child argument to the argument it attacks or supports.
struct Relation {
  ArgumentId source;
  ArgumentId target;
  Polarity polarity = Polarity::Attack;

  bool operator==(const Relation&) const = default;
};

/// Tree-shaped quantitative bipolar argumentation framework.
///
/// Edges point from child to parent; the root has no outgoing edge and every
/// other argument has exactly one. Use validate() before evaluating anything
/// that did not come out of this library.
struct Qbaf {
  ArgumentId root;
  std::vector<Argument> arguments;
  std::vector<Relation> relations;

  const Argument* find(const ArgumentId& id) const;
  Argument* find(const ArgumentId& id);
  bool contains(const ArgumentId& id) const { return find(id) != nullptr; }

  /// Outgoing relation of a non-root argument, nullptr for the root or unknown ids.
  const Relation* parent_relation(const ArgumentId& id) const;
  /// Incoming relations of `id`, in stored order.
  std::vector<const Relation*> child_relations(const ArgumentId& id) const;
  /// `id` and everything below it, parents before children.
  std::vector<ArgumentId> subtree(const ArgumentId& id) const;
  /// Length of the longest root-to-leaf path (0 for a root-only framework).
  int height() const;
};

/// Equality up to the order of relations; argument order is significant.
bool operator==(const Qbaf& lhs, const Qbaf& rhs);

using StrengthMap = std::map<ArgumentId, double>;

struct Violation {
  std::string subject;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

ValidationReport validate(const Qbaf& qbaf);

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class StructuralError : public std::runtime_error {
 public:
  explicit StructuralError(ValidationReport report);
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

/// DF-QuAD aggregation: 0 for no inputs, otherwise 1 - prod(1 - v).
/// The product runs over the sorted inputs so the result does not depend on
/// child order, not even in the last bit.
double df_quad_aggregate(std::span<const double> strengths);

/// DF-QuAD combination of a base score with aggregated attack and support.
double df_quad_combine(double base, double attack, double support);

enum class Semantics { DfQuad };

StrengthMap evaluate(const Qbaf& qbaf, Semantics semantics = Semantics::DfQuad);
double root_strength(const Qbaf& qbaf, Semantics semantics = Semantics::DfQuad);

nlohmann::json to_json(const Qbaf& qbaf);
Qbaf qbaf_from_json(const nlohmann::json& j);

const char* to_string(Polarity polarity);

}  // namespace argeval
