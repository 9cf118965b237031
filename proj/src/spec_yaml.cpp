#include <yaml-cpp/yaml.h>

#include <sstream>

#include "edgeplan/spec_io.hpp"
#include "text_util.hpp"

namespace edgeplan {

ParseError::ParseError(const std::string& message, int line, std::string field)
    : InputError(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
      line_(line),
      field_(std::move(field)) {}

namespace {

int LineOf(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

YAML::Node LoadDocument(std::string_view text) {
  try {
    return YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ParseError("malformed YAML: " + e.msg, e.mark.line >= 0 ? e.mark.line + 1 : 0);
  }
}

YAML::Node Require(const YAML::Node& parent, const char* key, const std::string& path) {
  if (!parent.IsMap()) throw ParseError("expected a mapping", LineOf(parent), path);
  YAML::Node child = parent[key];
  if (!child) {
    throw ParseError("missing required field '" + path + "." + key + "'", LineOf(parent),
                     path + "." + key);
  }
  return child;
}

template <typename T>
T As(const YAML::Node& n, const std::string& path) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ParseError("field '" + path + "' has the wrong type", LineOf(n), path);
  }
}

template <typename T>
T Optional(const YAML::Node& parent, const char* key, const std::string& path, T fallback) {
  YAML::Node child = parent[key];
  if (!child) return fallback;
  return As<T>(child, path + "." + key);
}

ResourceMap ParseResourceMap(const YAML::Node& n, const std::string& path) {
  ResourceMap out;
  if (!n) return out;
  if (!n.IsMap()) throw ParseError("field '" + path + "' must be a mapping", LineOf(n), path);
  for (const auto& kv : n) {
    const auto key = As<std::string>(kv.first, path);
    out[key] = As<double>(kv.second, path + "." + key);
  }
  return out;
}

YAML::Node Section(const YAML::Node& root, const char* key) {
  if (root.IsMap() && root[key]) return root[key];
  return root;
}

void ThrowOnViolations(const std::vector<std::string>& violations, const char* what) {
  if (violations.empty()) return;
  std::string msg = std::string("invalid ") + what + ": " + violations.front();
  for (std::size_t i = 1; i < violations.size(); ++i) msg += "; " + violations[i];
  throw ParseError(msg);
}

Flavour ParseFlavour(const YAML::Node& n, const std::string& path) {
  Flavour f;
  f.name = As<std::string>(Require(n, "name", path), path + ".name");
  f.importance = As<int>(Require(n, "importance", path), path + ".importance");
  f.consumable_demands = ParseResourceMap(n["resources"], path + ".resources");
  f.energy_w = Optional<double>(n, "energy_w", path, 0.0);
  if (YAML::Node attrs = n["attributes"]) {
    if (!attrs.IsMap()) throw ParseError("attributes must be a mapping", LineOf(attrs), path);
    for (const auto& kv : attrs) {
      const auto key = As<std::string>(kv.first, path + ".attributes");
      auto& accepted = f.attribute_requirements[key];
      if (kv.second.IsSequence()) {
        for (const auto& v : kv.second) accepted.insert(As<std::string>(v, path + ".attributes." + key));
      } else {
        accepted.insert(As<std::string>(kv.second, path + ".attributes." + key));
      }
    }
  }
  if (YAML::Node uses = n["uses"]) {
    if (!uses.IsSequence()) throw ParseError("uses must be a sequence", LineOf(uses), path + ".uses");
    int i = 0;
    for (const auto& u : uses) {
      const std::string up = path + ".uses[" + std::to_string(i++) + "]";
      Dependency d;
      if (u.IsScalar()) {
        d.component = As<std::string>(u, up);
      } else {
        d.component = As<std::string>(Require(u, "component", up), up + ".component");
        d.min_importance = Optional<int>(u, "min_importance", up, 0);
        if (u["max_latency_ms"]) d.max_latency_ms = As<double>(u["max_latency_ms"], up + ".max_latency_ms");
        if (u["min_availability"]) {
          d.min_availability = As<double>(u["min_availability"], up + ".min_availability");
        }
        d.traffic_w = Optional<double>(u, "traffic_w", up, 0.0);
      }
      f.dependencies.push_back(std::move(d));
    }
  }
  return f;
}

}  // namespace

ApplicationSpec ParseApplication(std::string_view yaml_text) {
  const YAML::Node root = Section(LoadDocument(yaml_text), "app");
  const std::string path = "app";
  if (!root.IsMap()) throw ParseError("application document must be a mapping", LineOf(root), path);
  ApplicationSpec app;
  app.name = Optional<std::string>(root, "name", path, "application");
  if (YAML::Node b = root["budgets"]) {
    app.monetary_budget = Optional<double>(b, "monetary", path + ".budgets", app.monetary_budget);
    app.carbon_budget = Optional<double>(b, "carbon_g", path + ".budgets", app.carbon_budget);
    app.energy_budget = Optional<double>(b, "energy_kwh", path + ".budgets", app.energy_budget);
  }
  const YAML::Node comps = Require(root, "components", path);
  if (!comps.IsSequence()) {
    throw ParseError("field 'app.components' must be a sequence", LineOf(comps), "app.components");
  }
  int i = 0;
  for (const auto& cn : comps) {
    const std::string cp = path + ".components[" + std::to_string(i++) + "]";
    Component c;
    c.name = As<std::string>(Require(cn, "name", cp), cp + ".name");
    c.mandatory = Optional<bool>(cn, "mandatory", cp, true);
    const YAML::Node flavours = Require(cn, "flavours", cp);
    if (!flavours.IsSequence()) {
      throw ParseError("field '" + cp + ".flavours' must be a sequence", LineOf(flavours),
                       cp + ".flavours");
    }
    int j = 0;
    for (const auto& fn : flavours) {
      c.flavours.push_back(ParseFlavour(fn, cp + ".flavours[" + std::to_string(j++) + "]"));
    }
    app.components.push_back(std::move(c));
  }
  ThrowOnViolations(ValidateSpecs(app, InfrastructureSpec{}), "application");
  return app;
}

InfrastructureSpec ParseInfrastructure(std::string_view yaml_text) {
  const YAML::Node root = Section(LoadDocument(yaml_text), "infra");
  const std::string path = "infra";
  if (!root.IsMap()) throw ParseError("infrastructure document must be a mapping", LineOf(root), path);
  InfrastructureSpec infra;
  const YAML::Node nodes = Require(root, "nodes", path);
  if (!nodes.IsSequence()) throw ParseError("field 'infra.nodes' must be a sequence", LineOf(nodes), "infra.nodes");
  int i = 0;
  for (const auto& nn : nodes) {
    const std::string np = path + ".nodes[" + std::to_string(i++) + "]";
    Node n;
    n.name = As<std::string>(Require(nn, "name", np), np + ".name");
    n.consumable_capacities = ParseResourceMap(nn["resources"], np + ".resources");
    n.unit_costs = ParseResourceMap(nn["costs"], np + ".costs");
    n.carbon_intensity = Optional<double>(nn, "carbon_intensity", np, 0.0);
    n.available = Optional<bool>(nn, "available", np, true);
    if (YAML::Node attrs = nn["attributes"]) {
      if (!attrs.IsMap()) throw ParseError("attributes must be a mapping", LineOf(attrs), np + ".attributes");
      for (const auto& kv : attrs) {
        const auto key = As<std::string>(kv.first, np + ".attributes");
        n.attributes[key] = As<std::string>(kv.second, np + ".attributes." + key);
      }
    }
    infra.nodes.push_back(std::move(n));
  }
  if (YAML::Node links = root["links"]) {
    if (!links.IsSequence()) throw ParseError("field 'infra.links' must be a sequence", LineOf(links), "infra.links");
    int j = 0;
    for (const auto& ln : links) {
      const std::string lp = path + ".links[" + std::to_string(j++) + "]";
      const YAML::Node ends = Require(ln, "nodes", lp);
      if (!ends.IsSequence() || ends.size() != 2) {
        throw ParseError("field '" + lp + ".nodes' must list exactly two nodes", LineOf(ends), lp + ".nodes");
      }
      Link l;
      l.a = As<std::string>(ends[0], lp + ".nodes[0]");
      l.b = As<std::string>(ends[1], lp + ".nodes[1]");
      l.latency_ms = Optional<double>(ln, "latency_ms", lp, 0.0);
      l.availability = Optional<double>(ln, "availability", lp, 1.0);
      infra.links.push_back(std::move(l));
    }
  }
  ThrowOnViolations(ValidateSpecs(ApplicationSpec{}, infra), "infrastructure");
  return infra;
}

namespace {

void EmitNumber(YAML::Emitter& out, double v) { out << detail::FormatNumber(v); }

void EmitResourceMap(YAML::Emitter& out, const ResourceMap& m) {
  out << YAML::Flow << YAML::BeginMap;
  for (const auto& [k, v] : m) {
    out << YAML::Key << k << YAML::Value;
    EmitNumber(out, v);
  }
  out << YAML::EndMap;
}

}  // namespace

std::string EmitApplication(const ApplicationSpec& app) {
  YAML::Emitter out;
  out << YAML::BeginMap << YAML::Key << "app" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << app.name;
  out << YAML::Key << "budgets" << YAML::Value << YAML::Flow << YAML::BeginMap;
  out << YAML::Key << "monetary" << YAML::Value;
  EmitNumber(out, app.monetary_budget);
  out << YAML::Key << "carbon_g" << YAML::Value;
  EmitNumber(out, app.carbon_budget);
  out << YAML::Key << "energy_kwh" << YAML::Value;
  EmitNumber(out, app.energy_budget);
  out << YAML::EndMap;
  out << YAML::Key << "components" << YAML::Value << YAML::BeginSeq;
  for (const auto& c : app.components) {
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << c.name;
    out << YAML::Key << "mandatory" << YAML::Value << c.mandatory;
    out << YAML::Key << "flavours" << YAML::Value << YAML::BeginSeq;
    for (const auto& f : c.flavours) {
      out << YAML::BeginMap;
      out << YAML::Key << "name" << YAML::Value << f.name;
      out << YAML::Key << "importance" << YAML::Value << f.importance;
      out << YAML::Key << "resources" << YAML::Value;
      EmitResourceMap(out, f.consumable_demands);
      if (!f.attribute_requirements.empty()) {
        out << YAML::Key << "attributes" << YAML::Value << YAML::Flow << YAML::BeginMap;
        for (const auto& [k, vs] : f.attribute_requirements) {
          out << YAML::Key << k << YAML::Value << YAML::Flow << YAML::BeginSeq;
          for (const auto& v : vs) out << v;
          out << YAML::EndSeq;
        }
        out << YAML::EndMap;
      }
      if (!f.dependencies.empty()) {
        out << YAML::Key << "uses" << YAML::Value << YAML::BeginSeq;
        for (const auto& d : f.dependencies) {
          out << YAML::Flow << YAML::BeginMap;
          out << YAML::Key << "component" << YAML::Value << d.component;
          out << YAML::Key << "min_importance" << YAML::Value << d.min_importance;
          if (d.max_latency_ms) {
            out << YAML::Key << "max_latency_ms" << YAML::Value;
            EmitNumber(out, *d.max_latency_ms);
          }
          if (d.min_availability) {
            out << YAML::Key << "min_availability" << YAML::Value;
            EmitNumber(out, *d.min_availability);
          }
          if (d.traffic_w != 0.0) {
            out << YAML::Key << "traffic_w" << YAML::Value;
            EmitNumber(out, d.traffic_w);
          }
          out << YAML::EndMap;
        }
        out << YAML::EndSeq;
      }
      out << YAML::Key << "energy_w" << YAML::Value;
      EmitNumber(out, f.energy_w);
      out << YAML::EndMap;
    }
    out << YAML::EndSeq << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string EmitInfrastructure(const InfrastructureSpec& infra) {
  YAML::Emitter out;
  out << YAML::BeginMap << YAML::Key << "infra" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "nodes" << YAML::Value << YAML::BeginSeq;
  for (const auto& n : infra.nodes) {
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << n.name;
    out << YAML::Key << "resources" << YAML::Value;
    EmitResourceMap(out, n.consumable_capacities);
    out << YAML::Key << "attributes" << YAML::Value << YAML::Flow << YAML::BeginMap;
    for (const auto& [k, v] : n.attributes) out << YAML::Key << k << YAML::Value << v;
    out << YAML::EndMap;
    out << YAML::Key << "costs" << YAML::Value;
    EmitResourceMap(out, n.unit_costs);
    out << YAML::Key << "carbon_intensity" << YAML::Value;
    EmitNumber(out, n.carbon_intensity);
    out << YAML::Key << "available" << YAML::Value << n.available;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "links" << YAML::Value << YAML::BeginSeq;
  for (const auto& l : infra.links) {
    out << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "nodes" << YAML::Value << YAML::Flow << YAML::BeginSeq << l.a << l.b
        << YAML::EndSeq;
    out << YAML::Key << "latency_ms" << YAML::Value;
    EmitNumber(out, l.latency_ms);
    out << YAML::Key << "availability" << YAML::Value;
    EmitNumber(out, l.availability);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace edgeplan
