#include "clognet/reports.hpp"

#include <sstream>

namespace clognet::reports {

using nlohmann::json;

std::string validation_text(const std::string& subject,
                            const ValidationReport& report) {
  std::ostringstream os;
  if (report.ok()) {
    os << subject << ": ok\n";
    return os.str();
  }
  os << subject << ": " << report.entries().size() << " problem(s)\n";
  for (const auto& e : report.entries()) {
    os << "  [" << e.code << "] " << e.message;
    if (e.span && e.span->known()) os << " (" << e.span->str() << ")";
    os << "\n";
  }
  return os.str();
}

json validation_json(const std::string& subject,
                     const ValidationReport& report) {
  json entries = json::array();
  for (const auto& e : report.entries()) {
    json entry{{"code", e.code}, {"message", e.message}};
    if (e.span && e.span->known()) entry["location"] = e.span->str();
    entries.push_back(std::move(entry));
  }
  return json{{"subject", subject}, {"ok", report.ok()},
              {"problems", std::move(entries)}};
}

std::string marking_lines(const Marking& m, const std::string& indent) {
  std::ostringstream os;
  bool any = false;
  for (const auto& [place, tokens] : m.places) {
    if (tokens.empty()) continue;
    any = true;
    os << indent << place << ": ";
    bool first = true;
    for (const auto& [tuple, count] : tokens) {
      if (!first) os << "; ";
      first = false;
      if (count != 1) os << count << " * ";
      if (tuple.size() == 1)
        os << tuple[0].str();
      else
        os << tuple_str(tuple);
    }
    os << "\n";
  }
  if (!any) os << indent << "(empty)\n";
  return os.str();
}

json marking_json(const Marking& m) {
  json out = json::object();
  for (const auto& [place, tokens] : m.places) {
    if (tokens.empty()) continue;
    json list = json::array();
    for (const auto& [tuple, count] : tokens) {
      json values = json::array();
      for (const Value& v : tuple) values.push_back(v.str());
      list.push_back(json{{"token", std::move(values)}, {"count", count}});
    }
    out[place] = std::move(list);
  }
  return out;
}

std::string catalog_text(const CatalogInstance& cat_instance,
                         const std::string& indent) {
  std::ostringstream os;
  bool any = false;
  for (const auto& [rel, facts] : cat_instance.facts) {
    for (const Tuple& t : facts) {
      any = true;
      os << indent << rel;
      if (t.size() == 1)
        os << "(" << t[0].str() << ")";
      else
        os << tuple_str(t);
      os << "\n";
    }
  }
  if (!any) os << indent << "(empty)\n";
  return os.str();
}

json catalog_json(const CatalogInstance& cat_instance) {
  json out = json::object();
  for (const auto& [rel, facts] : cat_instance.facts) {
    json list = json::array();
    for (const Tuple& t : facts) {
      json values = json::array();
      for (const Value& v : t) values.push_back(v.str());
      list.push_back(std::move(values));
    }
    out[rel] = std::move(list);
  }
  return out;
}

namespace {

json binding_json(const Binding& b) {
  json out = json::object();
  for (const auto& [var, value] : b) out[var] = value.str();
  return out;
}

}  // namespace

std::string verdict_text(const Verdict& verdict) {
  std::ostringstream os;
  os << "verdict: "
     << (verdict.unsafe() ? "UNSAFE" : "SAFE-up-to-limits") << "\n";
  os << "states visited: " << verdict.states_visited << "\n";
  os << "frontier exhausted: " << (verdict.frontier_exhausted ? "yes" : "no")
     << "\n";
  if (verdict.fresh_cap_hit) os << "fresh pool cap hit: yes\n";
  if (verdict.witness) {
    const Witness& w = *verdict.witness;
    os << "witness catalog:\n" << catalog_text(w.catalog, "  ");
    os << "witness trace (" << w.steps.size() << " steps):\n";
    os << "  initial:\n" << marking_lines(w.initial, "    ");
    for (std::size_t i = 0; i < w.steps.size(); ++i) {
      os << "  " << (i + 1) << ". " << w.steps[i].transition << " "
         << binding_str(w.steps[i].binding) << "\n";
      os << marking_lines(w.steps[i].after, "    ");
    }
    os << "property assignment: " << binding_str(w.assignment) << "\n";
  }
  return os.str();
}

json verdict_json(const Verdict& verdict) {
  json out{{"verdict", verdict.unsafe() ? "UNSAFE" : "SAFE_UP_TO_LIMITS"},
           {"states_visited", verdict.states_visited},
           {"frontier_exhausted", verdict.frontier_exhausted},
           {"fresh_cap_hit", verdict.fresh_cap_hit}};
  if (verdict.witness) {
    const Witness& w = *verdict.witness;
    json steps = json::array();
    for (const auto& step : w.steps)
      steps.push_back(json{{"transition", step.transition},
                           {"binding", binding_json(step.binding)},
                           {"marking_after", marking_json(step.after)}});
    out["witness"] = json{{"catalog", catalog_json(w.catalog)},
                          {"initial_marking", marking_json(w.initial)},
                          {"steps", std::move(steps)},
                          {"assignment", binding_json(w.assignment)}};
  }
  return out;
}

std::string bounded_text(const BoundedCheck& check, std::uint64_t bound) {
  std::ostringstream os;
  if (check.bounded) {
    os << "bounded-up-to-limits: every explored marking holds <= " << bound
       << " token(s) per place\n";
    os << "states visited: " << check.states_visited << "\n";
    os << "frontier exhausted: "
       << (check.frontier_exhausted ? "yes" : "no") << "\n";
  } else {
    os << "bound " << bound << " violated at place '"
       << check.violation->first << "'\n";
    os << "marking:\n" << marking_lines(check.violation->second, "  ");
  }
  return os.str();
}

json bounded_json(const BoundedCheck& check, std::uint64_t bound) {
  json out{{"bound", bound},
           {"bounded", check.bounded},
           {"states_visited", check.states_visited},
           {"frontier_exhausted", check.frontier_exhausted}};
  if (!check.bounded) {
    out["violation"] = json{{"place", check.violation->first},
                            {"marking", marking_json(check.violation->second)}};
  }
  return out;
}

std::string classify_text(const ConservativeReport& report, bool fk_acyclic) {
  std::ostringstream os;
  os << "conservative: " << (report.conservative ? "yes" : "no") << "\n";
  for (const auto& occ : report.occurrences)
    os << "  nu-variable '" << occ.variable << "' at (" << occ.transition
       << ", " << occ.place << ", position " << occ.position << ")\n";
  os << "fk-acyclic: " << (fk_acyclic ? "yes" : "no") << "\n";
  return os.str();
}

json classify_json(const ConservativeReport& report, bool fk_acyclic) {
  json occurrences = json::array();
  for (const auto& occ : report.occurrences)
    occurrences.push_back(json{{"transition", occ.transition},
                               {"place", occ.place},
                               {"position", occ.position},
                               {"variable", occ.variable}});
  return json{{"conservative", report.conservative},
              {"nu_occurrences", std::move(occurrences)},
              {"fk_acyclic", fk_acyclic}};
}

std::string encode_diagnostics_text(const mcmt::Document& doc) {
  std::ostringstream os;
  for (const auto& d : doc.diagnostics)
    os << (d.severity == mcmt::Diagnostic::Severity::Warning ? "warning"
                                                             : "error")
       << " [" << d.code << "] " << d.message << "\n";
  for (const auto& [transition, budget] : doc.budgets)
    os << "index budget " << transition << ": " << budget.existential
       << " existential, " << budget.universal << " universal\n";
  return os.str();
}

}  // namespace clognet::reports
