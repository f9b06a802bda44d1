#pragma once

#include "clognet/explore.hpp"
#include "clognet/net.hpp"

namespace clognet::mcmt {

struct EncodeError : error {
  using error::error;
};

struct Diagnostic {
  enum class Severity { Warning, Error };
  Severity severity = Severity::Warning;
  std::string code;
  std::string message;
};

/// One MCMT statement: a block of consecutive lines. Statements render
/// separated by a blank line.
struct Statement {
  std::vector<std::string> lines;
};

struct IndexBudget {
  int existential = 0;
  int universal = 0;
};

struct Document {
  std::vector<Statement> statements;
  std::vector<Diagnostic> diagnostics;
  std::map<std::string, IndexBudget> budgets;  // per net transition

  std::string render() const;
  bool has_warning(const std::string& code) const;
};

/// Full encoding in fixed statement order: schema, places, initial,
/// init-marking transition, net transitions in declaration order, unsafe.
/// Byte-identical across runs for equal inputs.
Document encode(const Net& net, const Marking& m0, const TypedProperty& prop);

// Piecewise entry points (each validates only what it needs; encode() runs
// them all under one identifier table).
std::vector<Statement> encode_schema(const TypeDomain& types,
                                     const CatalogSchema& schema,
                                     const std::set<Value>& constants,
                                     std::vector<Diagnostic>* diags = nullptr);
std::vector<Statement> encode_places(const Net& net);
std::vector<Statement> encode_initial_marking(const Net& net,
                                              const Marking& m0);
std::vector<Statement> encode_transition(const Net& net, const Transition& t,
                                         IndexBudget* budget = nullptr,
                                         std::vector<Diagnostic>* diags =
                                             nullptr);
Statement encode_property(const Net& net, const TypedProperty& prop);

/// Structural self-checks used by tests and diagnostics:
/// every identifier is declared before use.
bool declaration_before_use(const Document& doc, std::string* offender);

}  // namespace clognet::mcmt
