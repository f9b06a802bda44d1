#include "clognet/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "clognet/dsl.hpp"
#include "clognet/mcmt.hpp"
#include "clognet/reports.hpp"

namespace clognet::cli {

namespace {

using nlohmann::json;

struct CommonOpts {
  std::string net_file;
  std::string catalog_file;
  std::string marking_file;
  std::vector<std::string> extra_files;
  std::string format = "text";
  std::string out_file;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool net_required = true) {
  auto* net = cmd->add_option("--net", opts.net_file, "net project file");
  if (net_required) net->required();
  cmd->add_option("--catalog", opts.catalog_file,
                  "catalog file (schema and/or facts)");
  cmd->add_option("--marking", opts.marking_file, "initial-marking file");
  cmd->add_option("files", opts.extra_files, "additional project files");
  cmd->add_option("--format", opts.format, "report format")
      ->check(CLI::IsMember({"text", "structured"}));
  cmd->add_option("--out", opts.out_file, "write the report to this file");
}

std::vector<std::string> file_list(const CommonOpts& opts) {
  std::vector<std::string> files;
  if (!opts.catalog_file.empty()) files.push_back(opts.catalog_file);
  if (!opts.net_file.empty()) files.push_back(opts.net_file);
  if (!opts.marking_file.empty()) files.push_back(opts.marking_file);
  files.insert(files.end(), opts.extra_files.begin(), opts.extra_files.end());
  return files;
}

void emit(const CommonOpts& opts, const std::string& text, const json& data,
          std::ostream& out) {
  std::string payload =
      opts.format == "structured" ? data.dump(2) + "\n" : text;
  out << payload;
  if (!opts.out_file.empty()) {
    std::ofstream f(opts.out_file, std::ios::binary);
    f << payload;
  }
}

struct LoadedProject {
  dsl::ProjectFile project;
  NetAnalysis analysis;
};

/// Parses and validates; prints reports and returns nullopt on any problem.
std::optional<LoadedProject> load(const CommonOpts& opts, std::ostream& out,
                                  std::ostream& err, bool print_reports) {
  ValidationReport parse_report;
  auto project = dsl::parse_project(file_list(opts), parse_report);
  if (!project) {
    err << reports::validation_text("parse", parse_report);
    return std::nullopt;
  }

  ValidationReport schema_report =
      validate_schema(project->types, *project->schema);
  ValidationReport instance_report =
      validate_instance(project->types, project->instance);
  NetAnalysis analysis;
  ValidationReport net_report = typecheck_net(project->net, analysis);
  ValidationReport marking_report =
      validate_marking(project->net, project->initial_marking);
  ValidationReport property_report;
  for (const Property& p : project->properties)
    typecheck_property(project->net, p, property_report);

  bool ok = schema_report.ok() && instance_report.ok() && net_report.ok() &&
            marking_report.ok() && property_report.ok();
  if (print_reports || !ok) {
    std::ostream& dst = ok ? out : err;
    dst << reports::validation_text("schema", schema_report)
        << reports::validation_text("catalog", instance_report)
        << reports::validation_text("net", net_report)
        << reports::validation_text("marking", marking_report)
        << reports::validation_text("properties", property_report);
  }
  if (!ok) return std::nullopt;
  return LoadedProject{std::move(*project), std::move(analysis)};
}

json validation_bundle(const dsl::ProjectFile& project) {
  ValidationReport schema_report =
      validate_schema(project.types, *project.schema);
  ValidationReport instance_report =
      validate_instance(project.types, project.instance);
  ValidationReport net_report = validate_net(project.net);
  ValidationReport marking_report =
      validate_marking(project.net, project.initial_marking);
  ValidationReport property_report;
  for (const Property& p : project.properties)
    typecheck_property(project.net, p, property_report);
  return json::array({reports::validation_json("schema", schema_report),
                      reports::validation_json("catalog", instance_report),
                      reports::validation_json("net", net_report),
                      reports::validation_json("marking", marking_report),
                      reports::validation_json("properties",
                                               property_report)});
}

std::optional<TypedProperty> select_property(const dsl::ProjectFile& project,
                                             const std::string& name,
                                             std::ostream& err) {
  const Property* prop = project.find_property(name);
  if (!prop) {
    err << "error: no property named '" << name << "'\n";
    return std::nullopt;
  }
  ValidationReport report;
  auto typed = typecheck_property(project.net, *prop, report);
  if (!typed) {
    err << reports::validation_text("property " + name, report);
    return std::nullopt;
  }
  return typed;
}

ExplorationLimits make_limits(std::uint64_t depth, std::uint64_t max_states,
                              std::int64_t fresh_cap,
                              const std::string& fresh_policy,
                              std::ostream& err, bool& ok) {
  ExplorationLimits limits;
  limits.max_depth = depth;
  limits.max_states = max_states;
  limits.fresh_pool_cap = fresh_cap;
  if (fresh_policy == "canonical") {
    limits.fresh_kind = FreshPolicy::Kind::Canonical;
  } else if (fresh_policy.rfind("enumerate:", 0) == 0) {
    limits.fresh_kind = FreshPolicy::Kind::Enumerate;
    limits.fresh_candidates = std::stoi(fresh_policy.substr(10));
    limits.canonicalize = false;
  } else {
    err << "error: --fresh-policy must be 'canonical' or 'enumerate:N'\n";
    ok = false;
  }
  return limits;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"clognet — modelling, simulation, safety checking and MCMT "
               "encoding for catalog Petri nets"};
  app.require_subcommand(1);

  // validate
  CommonOpts validate_opts;
  auto* cmd_validate =
      app.add_subcommand("validate", "validate schema, catalog, net, marking "
                                     "and properties");
  add_common(cmd_validate, validate_opts);

  // simulate
  CommonOpts sim_opts;
  std::string steps_file;
  auto* cmd_simulate =
      app.add_subcommand("simulate", "fire a scripted step sequence");
  add_common(cmd_simulate, sim_opts);
  cmd_simulate->add_option("--steps", steps_file, "step file")->required();

  // check
  CommonOpts check_opts;
  std::string check_prop;
  std::uint64_t check_depth = 100, check_states = 100000;
  std::int64_t check_fresh_cap = 1024;
  std::string check_policy = "canonical";
  auto* cmd_check = app.add_subcommand(
      "check", "explicit-state safety check for a fixed catalog");
  add_common(cmd_check, check_opts);
  cmd_check->add_option("--prop", check_prop, "property name")->required();
  cmd_check->add_option("--depth", check_depth, "exploration depth limit");
  cmd_check->add_option("--max-states", check_states, "state limit");
  cmd_check->add_option("--fresh-cap", check_fresh_cap,
                        "fresh pool cap per type");
  cmd_check->add_option("--fresh-policy", check_policy,
                        "canonical or enumerate:N");

  // pcheck
  CommonOpts pcheck_opts;
  std::string pcheck_prop;
  std::uint64_t pcheck_depth = 100, pcheck_states = 100000;
  std::uint32_t pcheck_max_facts = 1, pcheck_pool = 1;
  std::int64_t pcheck_fresh_cap = 1024;
  auto* cmd_pcheck = app.add_subcommand(
      "pcheck",
      "small-scope parameterised check over enumerated catalogs");
  add_common(cmd_pcheck, pcheck_opts);
  cmd_pcheck->add_option("--prop", pcheck_prop, "property name")->required();
  cmd_pcheck->add_option("--depth", pcheck_depth, "exploration depth limit");
  cmd_pcheck->add_option("--max-states", pcheck_states, "state limit");
  cmd_pcheck->add_option("--catalog-max-facts", pcheck_max_facts,
                         "max facts per relation");
  cmd_pcheck->add_option("--pool", pcheck_pool,
                         "fresh canonical values per type");
  cmd_pcheck->add_option("--fresh-cap", pcheck_fresh_cap,
                         "fresh pool cap per type");

  // encode
  CommonOpts encode_opts;
  std::string encode_prop;
  auto* cmd_encode =
      app.add_subcommand("encode", "emit the MCMT array-based encoding");
  add_common(cmd_encode, encode_opts);
  cmd_encode->add_option("--prop", encode_prop, "property name")->required();

  // classify
  CommonOpts classify_opts;
  std::uint64_t classify_bound = 0;
  bool bound_given = false;
  std::uint64_t classify_depth = 100, classify_states = 100000;
  auto* cmd_classify = app.add_subcommand(
      "classify", "conservative / boundedness / fk-acyclicity diagnostics");
  add_common(cmd_classify, classify_opts);
  auto* bound_opt = cmd_classify->add_option("--bound", classify_bound,
                                             "token bound to check");
  cmd_classify->add_option("--depth", classify_depth,
                           "exploration depth limit");
  cmd_classify->add_option("--max-states", classify_states, "state limit");

  std::vector<std::string> argv(args.rbegin(), args.rend());  // CLI11 pops
  try {                                                       // from the back
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "usage error: " << e.what() << "\n";
    return 1;
  }
  bound_given = bound_opt->count() > 0;

  try {
    if (cmd_validate->parsed()) {
      ValidationReport parse_report;
      auto project =
          dsl::parse_project(file_list(validate_opts), parse_report);
      if (!project) {
        err << reports::validation_text("parse", parse_report);
        return 1;
      }
      ValidationReport schema_report =
          validate_schema(project->types, *project->schema);
      ValidationReport instance_report =
          validate_instance(project->types, project->instance);
      ValidationReport net_report = validate_net(project->net);
      ValidationReport marking_report =
          validate_marking(project->net, project->initial_marking);
      ValidationReport property_report;
      for (const Property& p : project->properties)
        typecheck_property(project->net, p, property_report);
      bool ok = schema_report.ok() && instance_report.ok() &&
                net_report.ok() && marking_report.ok() &&
                property_report.ok();
      std::ostringstream text;
      text << reports::validation_text("schema", schema_report)
           << reports::validation_text("catalog", instance_report)
           << reports::validation_text("net", net_report)
           << reports::validation_text("marking", marking_report)
           << reports::validation_text("properties", property_report);
      emit(validate_opts, text.str(), validation_bundle(*project), out);
      return ok ? 0 : 1;
    }

    if (cmd_simulate->parsed()) {
      auto loaded = load(sim_opts, out, err, false);
      if (!loaded) return 1;
      std::ifstream in(steps_file);
      if (!in) {
        err << "error: cannot open steps file '" << steps_file << "'\n";
        return 1;
      }
      std::stringstream buffer;
      buffer << in.rdbuf();
      ValidationReport steps_report;
      auto steps = dsl::parse_steps(loaded->project, steps_file, buffer.str(),
                                    steps_report);
      if (!steps) {
        err << reports::validation_text("steps", steps_report);
        return 1;
      }
      Marking m = loaded->project.initial_marking;
      m.normalize();
      std::ostringstream text;
      json trace = json::array();
      text << "initial:\n" << reports::marking_lines(m, "  ");
      for (std::size_t i = 0; i < steps->size(); ++i) {
        const auto& step = (*steps)[i];
        const Transition* t =
            loaded->project.net.find_transition(step.transition);
        if (!t) {
          err << "error: unknown transition '" << step.transition << "'\n";
          return 1;
        }
        try {
          m = fire(loaded->project.net, loaded->analysis, m,
                   loaded->project.instance, *t, step.binding, true);
        } catch (const error& e) {
          err << "step " << (i + 1) << " (" << step.transition
              << "): " << e.what() << "\n";
          return 1;
        }
        text << (i + 1) << ". " << step.transition << " "
             << binding_str(step.binding) << "\n"
             << reports::marking_lines(m, "  ");
        trace.push_back(json{{"transition", step.transition},
                             {"marking_after", reports::marking_json(m)}});
      }
      emit(sim_opts, text.str(), json{{"trace", std::move(trace)}}, out);
      return 0;
    }

    if (cmd_check->parsed()) {
      auto loaded = load(check_opts, out, err, false);
      if (!loaded) return 1;
      auto prop = select_property(loaded->project, check_prop, err);
      if (!prop) return 1;
      bool ok = true;
      ExplorationLimits limits = make_limits(
          check_depth, check_states, check_fresh_cap, check_policy, err, ok);
      if (!ok) return 1;
      Verdict verdict =
          check_safety(loaded->project.net, loaded->project.initial_marking,
                       loaded->project.instance, *prop, limits);
      emit(check_opts, reports::verdict_text(verdict),
           reports::verdict_json(verdict), out);
      return verdict.unsafe() ? 2 : 0;
    }

    if (cmd_pcheck->parsed()) {
      auto loaded = load(pcheck_opts, out, err, false);
      if (!loaded) return 1;
      auto prop = select_property(loaded->project, pcheck_prop, err);
      if (!prop) return 1;
      ExplorationLimits limits;
      limits.max_depth = pcheck_depth;
      limits.max_states = pcheck_states;
      limits.fresh_pool_cap = pcheck_fresh_cap;
      CatalogBounds bounds{pcheck_max_facts, pcheck_pool};
      Verdict verdict =
          parameterised_check(loaded->project.net,
                              loaded->project.initial_marking, *prop, bounds,
                              limits);
      emit(pcheck_opts, reports::verdict_text(verdict),
           reports::verdict_json(verdict), out);
      return verdict.unsafe() ? 2 : 0;
    }

    if (cmd_encode->parsed()) {
      auto loaded = load(encode_opts, out, err, false);
      if (!loaded) return 1;
      auto prop = select_property(loaded->project, encode_prop, err);
      if (!prop) return 1;
      mcmt::Document doc =
          mcmt::encode(loaded->project.net, loaded->project.initial_marking,
                       *prop);
      std::string rendered = doc.render();
      if (!encode_opts.out_file.empty()) {
        std::ofstream f(encode_opts.out_file, std::ios::binary);
        f << rendered;
        out << "wrote " << encode_opts.out_file << " (" << rendered.size()
            << " bytes)\n";
      } else {
        out << rendered;
      }
      out << reports::encode_diagnostics_text(doc);
      return 0;
    }

    if (cmd_classify->parsed()) {
      auto loaded = load(classify_opts, out, err, false);
      if (!loaded) return 1;
      ConservativeReport report = classify_conservative(loaded->project.net);
      bool acyclic = fk_acyclic(*loaded->project.schema);
      std::ostringstream text;
      text << reports::classify_text(report, acyclic);
      json data = reports::classify_json(report, acyclic);
      if (bound_given) {
        ExplorationLimits limits;
        limits.max_depth = classify_depth;
        limits.max_states = classify_states;
        BoundedCheck bounded = check_bounded(
            loaded->project.net, loaded->project.initial_marking,
            loaded->project.instance, classify_bound, limits);
        text << reports::bounded_text(bounded, classify_bound);
        data["bounded_check"] = reports::bounded_json(bounded, classify_bound);
      }
      emit(classify_opts, text.str(), data, out);
      return 0;
    }
  } catch (const mcmt::EncodeError& e) {
    err << "encode error: " << e.what() << "\n";
    return 1;
  } catch (const error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  err << "usage error: no command\n";
  return 1;
}

}  // namespace clognet::cli
