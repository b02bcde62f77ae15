#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "seldoor/graph.hpp"
#include "seldoor/nonlinear_demo.hpp"
#include "seldoor/project.hpp"
#include "seldoor/sem.hpp"

namespace seldoor {

// In-memory form of a model file. The variables list order is the causal
// ordering; every cross-reference is by name.
struct ModelFile {
  struct EdgeSpec {
    std::string from, to;
    double coef = 0.0;
    bool operator==(const EdgeSpec&) const = default;
  };
  struct BidirSpec {
    std::string a, b;
    double cov = 0.0;
    bool operator==(const BidirSpec&) const = default;
  };
  struct NonlinearSpec {
    std::string name, function;
    std::vector<std::string> args;
    bool operator==(const NonlinearSpec&) const = default;
  };
  std::vector<std::string> variables;
  std::vector<EdgeSpec> edges;
  std::vector<BidirSpec> bidirected;
  std::map<std::string, double> error_var;
  std::map<std::string, double> intercepts;
  std::vector<NonlinearSpec> nonlinear;
  bool operator==(const ModelFile&) const = default;

  bool is_nonlinear(const std::string& name) const {
    for (const auto& h : nonlinear) {
      if (h.name == name) return true;
    }
    return false;
  }
};

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Digest of the exact input bytes, embedded in reports for auditability.
inline std::string input_digest(std::string_view bytes) {
  static const char* hex = "0123456789abcdef";
  const std::uint64_t h = fnv1a64(bytes);
  std::string out = "fnv1a64:";
  for (int shift = 60; shift >= 0; shift -= 4) out.push_back(hex[(h >> shift) & 0xF]);
  return out;
}

namespace detail {

inline bool valid_variable_name(const std::string& s) {
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  }
  return true;
}

inline void reject_unknown_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                                const char* where) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        ok = true;
        break;
      }
    }
    if (!ok) throw Error(Errc::parse_error, std::string("unknown key '") + item.key() + "' in " + where);
  }
}

inline double finite_number(const nlohmann::json& j, const char* where) {
  if (!j.is_number()) throw Error(Errc::parse_error, std::string(where) + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw Error(Errc::parse_error, std::string(where) + " must be finite");
  return v;
}

inline std::string json_string(const nlohmann::json& j, const char* where) {
  if (!j.is_string()) throw Error(Errc::parse_error, std::string(where) + " must be a string");
  return j.get<std::string>();
}

}  // namespace detail

inline Admg base_graph(const ModelFile& mf);

// Strict parse: unknown keys, wrong types, unknown names, out-of-order or
// vacuous edges are all rejected. Follow-on structural checks run through
// validate() on the assembled graph so file and API agree on what a
// well-formed model is.
inline ModelFile parse_model_text(const std::string& text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, std::string("model file is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw Error(Errc::parse_error, "model file must be a JSON object");
  detail::reject_unknown_keys(root, {"variables", "edges", "bidirected", "error_var", "intercepts", "nonlinear"},
                              "model file");
  for (const char* required : {"variables", "edges", "bidirected", "error_var"}) {
    if (!root.contains(required)) {
      throw Error(Errc::parse_error, std::string("model file is missing '") + required + "'");
    }
  }

  ModelFile mf;
  const auto& vars = root["variables"];
  if (!vars.is_array() || vars.empty()) throw Error(Errc::parse_error, "'variables' must be a nonempty array");
  for (const auto& v : vars) {
    auto name = detail::json_string(v, "variable name");
    if (!detail::valid_variable_name(name)) {
      throw Error(Errc::parse_error, "variable name '" + name + "' is not an identifier");
    }
    mf.variables.push_back(std::move(name));
  }
  const auto index_of = [&](const std::string& name, const char* where) {
    for (std::size_t i = 0; i < mf.variables.size(); ++i) {
      if (mf.variables[i] == name) return static_cast<int>(i);
    }
    throw Error(Errc::unknown_vertex, std::string(where) + " references unknown variable '" + name + "'");
  };

  if (root.contains("nonlinear")) {
    const auto& nl = root["nonlinear"];
    if (!nl.is_array()) throw Error(Errc::parse_error, "'nonlinear' must be an array");
    for (const auto& entry : nl) {
      if (!entry.is_object()) throw Error(Errc::parse_error, "nonlinear entry must be an object");
      detail::reject_unknown_keys(entry, {"name", "function", "args"}, "nonlinear entry");
      for (const char* required : {"name", "function", "args"}) {
        if (!entry.contains(required)) {
          throw Error(Errc::parse_error, std::string("nonlinear entry is missing '") + required + "'");
        }
      }
      ModelFile::NonlinearSpec spec;
      spec.name = detail::json_string(entry["name"], "nonlinear name");
      const int self = index_of(spec.name, "nonlinear entry");
      if (mf.is_nonlinear(spec.name)) {
        throw Error(Errc::duplicate_edge, "variable '" + spec.name + "' declared nonlinear twice");
      }
      spec.function = detail::json_string(entry["function"], "nonlinear function");
      interaction_function(spec.function);
      const auto& args = entry["args"];
      if (!args.is_array() || args.size() != 2) {
        throw Error(Errc::parse_error, "nonlinear 'args' must list exactly two variables");
      }
      for (const auto& a : args) {
        auto arg = detail::json_string(a, "nonlinear argument");
        const int ai = index_of(arg, "nonlinear argument");
        if (ai >= self) {
          throw Error(Errc::order_violation,
                      "argument '" + arg + "' does not precede nonlinear variable '" + spec.name + "'");
        }
        spec.args.push_back(std::move(arg));
      }
      if (spec.args[0] == spec.args[1]) {
        throw Error(Errc::duplicate_edge, "nonlinear arguments must be distinct");
      }
      mf.nonlinear.push_back(std::move(spec));
    }
  }

  const auto& edges = root["edges"];
  if (!edges.is_array()) throw Error(Errc::parse_error, "'edges' must be an array");
  for (const auto& entry : edges) {
    if (!entry.is_object()) throw Error(Errc::parse_error, "edge entry must be an object");
    detail::reject_unknown_keys(entry, {"from", "to", "coef"}, "edge entry");
    for (const char* required : {"from", "to", "coef"}) {
      if (!entry.contains(required)) {
        throw Error(Errc::parse_error, std::string("edge entry is missing '") + required + "'");
      }
    }
    ModelFile::EdgeSpec e;
    e.from = detail::json_string(entry["from"], "edge 'from'");
    e.to = detail::json_string(entry["to"], "edge 'to'");
    index_of(e.from, "edge");
    index_of(e.to, "edge");
    e.coef = detail::finite_number(entry["coef"], "edge 'coef'");
    if (e.coef == 0.0) {
      throw Error(Errc::edge_coefficient_mismatch, "edge " + e.from + " -> " + e.to + " carries a zero coefficient");
    }
    if (mf.is_nonlinear(e.to)) {
      throw Error(Errc::parse_error, "nonlinear variable '" + e.to +
                                         "' cannot receive directed edges; its arguments define them");
    }
    mf.edges.push_back(std::move(e));
  }

  const auto& bidir = root["bidirected"];
  if (!bidir.is_array()) throw Error(Errc::parse_error, "'bidirected' must be an array");
  for (const auto& entry : bidir) {
    if (!entry.is_object()) throw Error(Errc::parse_error, "bidirected entry must be an object");
    detail::reject_unknown_keys(entry, {"a", "b", "cov"}, "bidirected entry");
    for (const char* required : {"a", "b", "cov"}) {
      if (!entry.contains(required)) {
        throw Error(Errc::parse_error, std::string("bidirected entry is missing '") + required + "'");
      }
    }
    ModelFile::BidirSpec b;
    b.a = detail::json_string(entry["a"], "bidirected 'a'");
    b.b = detail::json_string(entry["b"], "bidirected 'b'");
    index_of(b.a, "bidirected edge");
    index_of(b.b, "bidirected edge");
    for (const auto& name : {b.a, b.b}) {
      if (mf.is_nonlinear(name)) {
        throw Error(Errc::parse_error,
                    "bidirected edge touches nonlinear variable '" + name + "', which has no error term");
      }
    }
    b.cov = detail::finite_number(entry["cov"], "bidirected 'cov'");
    if (b.cov == 0.0) {
      throw Error(Errc::edge_coefficient_mismatch,
                  "bidirected edge " + b.a + " <-> " + b.b + " carries a zero covariance");
    }
    mf.bidirected.push_back(std::move(b));
  }

  const auto& evar = root["error_var"];
  if (!evar.is_object()) throw Error(Errc::parse_error, "'error_var' must be an object");
  for (const auto& item : evar.items()) {
    index_of(item.key(), "'error_var'");
    if (mf.is_nonlinear(item.key())) {
      throw Error(Errc::parse_error, "'error_var' lists nonlinear variable '" + item.key() + "'");
    }
    const double v = detail::finite_number(item.value(), "error variance");
    if (!(v > 0.0)) throw Error(Errc::sigma_not_pd, "error variance of '" + item.key() + "' must be positive");
    mf.error_var[item.key()] = v;
  }
  for (const auto& name : mf.variables) {
    if (!mf.is_nonlinear(name) && !mf.error_var.count(name)) {
      throw Error(Errc::parse_error, "'error_var' is missing variable '" + name + "'");
    }
  }

  if (root.contains("intercepts")) {
    const auto& ic = root["intercepts"];
    if (!ic.is_object()) throw Error(Errc::parse_error, "'intercepts' must be an object");
    for (const auto& item : ic.items()) {
      index_of(item.key(), "'intercepts'");
      if (mf.is_nonlinear(item.key())) {
        throw Error(Errc::parse_error, "'intercepts' lists nonlinear variable '" + item.key() + "'");
      }
      mf.intercepts[item.key()] = detail::finite_number(item.value(), "intercept");
    }
  }
  base_graph(mf);
  return mf;
}

// The diagram as written: directed edges from the file plus one from each
// nonlinear argument into its vertex.
inline Admg base_graph(const ModelFile& mf) {
  std::vector<DirectedEdge> directed;
  std::vector<BidirectedEdge> bidirected;
  Admg lookup(mf.variables, {}, {});
  for (const auto& e : mf.edges) directed.push_back({lookup.index_of(e.from), lookup.index_of(e.to)});
  for (const auto& h : mf.nonlinear) {
    const int to = lookup.index_of(h.name);
    for (const auto& a : h.args) directed.push_back({lookup.index_of(a), to});
  }
  for (const auto& b : mf.bidirected) bidirected.push_back({lookup.index_of(b.a), lookup.index_of(b.b)});
  Admg g(mf.variables, std::move(directed), std::move(bidirected));
  const auto vr = validate(g);
  if (!vr.ok) throw Error(vr.code, vr.message);
  return g;
}

// The diagram the graphical criteria run on: linear files pass through,
// nonlinear vertices are rewritten by projection.
inline Admg criteria_graph(const ModelFile& mf) {
  Admg g = base_graph(mf);
  if (mf.nonlinear.empty()) return g;
  std::vector<NonlinearVertex> nl;
  for (const auto& h : mf.nonlinear) {
    NonlinearVertex v;
    v.vertex = g.index_of(h.name);
    for (const auto& a : h.args) v.args.push_back(g.index_of(a));
    nl.push_back(std::move(v));
  }
  return project_nonlinear(g, nl);
}

inline SemModel to_sem_model(const ModelFile& mf) {
  if (!mf.nonlinear.empty()) {
    throw Error(Errc::nonlinear_model,
                "model contains nonlinear variables; only graph criteria and the interaction demo apply");
  }
  Admg g = base_graph(mf);
  const int n = g.vertex_count();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : mf.edges) a(g.index_of(e.to), g.index_of(e.from)) = e.coef;
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(n, n);
  for (int v = 0; v < n; ++v) sigma(v, v) = mf.error_var.at(g.name(v));
  for (const auto& b : mf.bidirected) {
    const int x = g.index_of(b.a);
    const int y = g.index_of(b.b);
    sigma(x, y) = b.cov;
    sigma(y, x) = b.cov;
  }
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  for (const auto& [name, value] : mf.intercepts) c(g.index_of(name)) = value;
  SemModel m = make_model(std::move(g), std::move(a), std::move(sigma), std::move(c));
  const auto vr = validate_model(m);
  if (!vr.ok) throw Error(vr.code, vr.message);
  return m;
}

// Maps a model file onto the built-in interaction demo layout:
//   Z -> X, {X, Z} -> M, H = h(X, M), {X, M, H, Z} -> Y
// with independent errors and zero means. Roles are matched structurally, so
// variable names are free.
inline InteractionDemoSpec to_demo_spec(const ModelFile& mf) {
  const auto fail = [](const std::string& why) -> InteractionDemoSpec {
    throw Error(Errc::unsupported_function, "model does not match the interaction demo layout: " + why);
  };
  if (mf.nonlinear.size() != 1) return fail("expected exactly one nonlinear variable");
  if (mf.variables.size() != 5) return fail("expected five variables");
  if (!mf.bidirected.empty()) return fail("errors must be independent");
  for (const auto& [name, value] : mf.intercepts) {
    if (value != 0.0) return fail("intercept of '" + name + "' must be zero");
  }
  const auto& h = mf.nonlinear[0];
  const std::string& hx = h.args[0];
  const std::string& hm = h.args[1];
  const auto coef_of = [&](const std::string& from, const std::string& to) -> double {
    for (const auto& e : mf.edges) {
      if (e.from == from && e.to == to) return e.coef;
    }
    return 0.0;
  };
  if (coef_of(hx, hm) == 0.0) return fail("first interaction argument must be a parent of the second");
  const std::string& x = hx;
  const std::string& m = hm;
  std::string z, y;
  for (const auto& name : mf.variables) {
    if (name == x || name == m || name == h.name) continue;
    if (coef_of(name, x) != 0.0) {
      if (!z.empty()) return fail("ambiguous source variable");
      z = name;
    } else {
      if (!y.empty()) return fail("ambiguous outcome variable");
      y = name;
    }
  }
  if (z.empty() || y.empty()) return fail("could not assign source and outcome roles");
  const std::vector<ModelFile::EdgeSpec> expected = {
      {z, x, coef_of(z, x)}, {x, m, coef_of(x, m)}, {z, m, coef_of(z, m)},     {x, y, coef_of(x, y)},
      {m, y, coef_of(m, y)}, {z, y, coef_of(z, y)}, {h.name, y, coef_of(h.name, y)}};
  for (const auto& e : expected) {
    if (e.coef == 0.0) return fail("missing edge " + e.from + " -> " + e.to);
  }
  if (mf.edges.size() != expected.size()) return fail("unexpected extra edges");
  InteractionDemoSpec spec;
  spec.a_xz = coef_of(z, x);
  spec.a_mx = coef_of(x, m);
  spec.a_mz = coef_of(z, m);
  spec.a_yx = coef_of(x, y);
  spec.a_ym = coef_of(m, y);
  spec.a_yh = coef_of(h.name, y);
  spec.a_yz = coef_of(z, y);
  spec.var_z = mf.error_var.at(z);
  spec.var_x = mf.error_var.at(x);
  spec.var_m = mf.error_var.at(m);
  spec.var_y = mf.error_var.at(y);
  spec.function = h.function;
  return spec;
}

// Canonical serialization: field order fixed, maps emitted in variables
// order, empty optional sections omitted. parse(serialize(mf)) == mf.
inline std::string serialize_model(const ModelFile& mf) {
  nlohmann::ordered_json root;
  root["variables"] = mf.variables;
  auto& edges = root["edges"] = nlohmann::ordered_json::array();
  for (const auto& e : mf.edges) {
    nlohmann::ordered_json entry;
    entry["from"] = e.from;
    entry["to"] = e.to;
    entry["coef"] = e.coef;
    edges.push_back(std::move(entry));
  }
  auto& bidir = root["bidirected"] = nlohmann::ordered_json::array();
  for (const auto& b : mf.bidirected) {
    nlohmann::ordered_json entry;
    entry["a"] = b.a;
    entry["b"] = b.b;
    entry["cov"] = b.cov;
    bidir.push_back(std::move(entry));
  }
  auto& evar = root["error_var"] = nlohmann::ordered_json::object();
  for (const auto& name : mf.variables) {
    const auto it = mf.error_var.find(name);
    if (it != mf.error_var.end()) evar[name] = it->second;
  }
  if (!mf.intercepts.empty()) {
    auto& ic = root["intercepts"] = nlohmann::ordered_json::object();
    for (const auto& name : mf.variables) {
      const auto it = mf.intercepts.find(name);
      if (it != mf.intercepts.end()) ic[name] = it->second;
    }
  }
  if (!mf.nonlinear.empty()) {
    auto& nl = root["nonlinear"] = nlohmann::ordered_json::array();
    for (const auto& h : mf.nonlinear) {
      nlohmann::ordered_json entry;
      entry["name"] = h.name;
      entry["function"] = h.function;
      entry["args"] = h.args;
      nl.push_back(std::move(entry));
    }
  }
  return root.dump(2) + "\n";
}

}  // namespace seldoor
