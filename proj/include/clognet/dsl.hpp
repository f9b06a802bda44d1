#pragma once

#include "clognet/explore.hpp"
#include "clognet/net.hpp"

namespace clognet::dsl {

/// A resolved project: type domain, catalog schema and optional instance,
/// net, initial marking and properties, possibly assembled from several
/// files via include directives.
struct ProjectFile {
  TypeDomain types;
  std::shared_ptr<CatalogSchema> schema = std::make_shared<CatalogSchema>();
  CatalogInstance instance;
  Net net;
  Marking initial_marking;
  std::vector<Property> properties;
  std::map<std::string, Value> constants;  // declared named constants

  const Property* find_property(const std::string& name) const;

  /// Wires shared components (net.types, net.schema, instance.schema).
  void link();

  bool operator==(const ProjectFile& o) const {
    return types == o.types && *schema == *o.schema &&
           instance == o.instance && net == o.net &&
           initial_marking == o.initial_marking &&
           properties == o.properties && constants == o.constants;
  }
};

/// Parses and merges the given files (in order). Diagnostics carry source
/// spans; returns nullopt when any error was reported.
std::optional<ProjectFile> parse_project(const std::vector<std::string>& paths,
                                         ValidationReport& report);

/// Parses a single in-memory source (tests, tools).
std::optional<ProjectFile> parse_project_text(const std::string& name,
                                              const std::string& text,
                                              ValidationReport& report);

/// Scripted simulation step: a transition plus a full binding.
struct SimStep {
  std::string transition;
  Binding binding;
  SourceSpan span;
};

std::optional<std::vector<SimStep>> parse_steps(const ProjectFile& project,
                                                const std::string& name,
                                                const std::string& text,
                                                ValidationReport& report);

/// Renders a project back to DSL text; parsing the result yields a
/// structurally equal project.
std::string pretty_print(const ProjectFile& project);

std::string query_str(const UnionQuery& q);
std::string condition_str(const Condition& c);
std::string property_str(const Property& p);

}  // namespace clognet::dsl
