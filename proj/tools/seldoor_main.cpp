#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include <nlohmann/json.hpp>

#include "seldoor/analysis.hpp"
#include "seldoor/criteria.hpp"
#include "seldoor/model_io.hpp"
#include "seldoor/montecarlo.hpp"
#include "seldoor/nonlinear_demo.hpp"
#include "seldoor/version.hpp"

namespace {

using ojson = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitNegative = 1;
constexpr int kExitInputError = 2;

struct LoadedModel {
  seldoor::ModelFile file;
  std::string digest;
};

LoadedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw seldoor::Error(seldoor::Errc::parse_error, "cannot open model file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  return {seldoor::parse_model_text(text), seldoor::input_digest(text)};
}

std::vector<std::string> split_names(const std::string& csv) {
  std::vector<std::string> out;
  std::string token;
  std::istringstream in(csv);
  while (std::getline(in, token, ',')) {
    if (!token.empty()) out.push_back(token);
  }
  return out;
}

std::vector<int> resolve_names(const seldoor::Admg& g, const std::vector<std::string>& names) {
  std::vector<int> out;
  for (const auto& n : names) out.push_back(g.index_of(n));
  return out;
}

seldoor::NoiseKind parse_noise(const std::string& name) {
  if (name == "gaussian") return seldoor::NoiseKind::gaussian;
  if (name == "uniform") return seldoor::NoiseKind::uniform;
  if (name == "shifted-exponential") return seldoor::NoiseKind::shifted_exponential;
  throw seldoor::Error(seldoor::Errc::unsupported_distribution, "unknown noise kind: " + name);
}

ojson report_header(const char* command, const LoadedModel& model) {
  ojson r;
  r["tool"] = "seldoor";
  r["version"] = seldoor::kVersionString;
  r["command"] = command;
  r["input_digest"] = model.digest;
  return r;
}

ojson names_array(const seldoor::Admg& g, const std::vector<int>& vs) {
  ojson arr = ojson::array();
  for (int v : vs) arr.push_back(g.name(v));
  return arr;
}

ojson criterion_json(const seldoor::Admg& g, const seldoor::CriterionResult& r) {
  ojson out;
  out["satisfied"] = r.satisfied;
  out["clause"] = r.satisfied ? ojson(nullptr) : ojson(r.clause);
  out["witness_vertex"] = r.witness_vertex ? ojson(g.name(*r.witness_vertex)) : ojson(nullptr);
  out["witness_path"] = r.witness_path ? ojson(seldoor::format_path(g, *r.witness_path)) : ojson(nullptr);
  out["witness_directed"] =
      r.witness_directed ? ojson(seldoor::format_path(g, *r.witness_directed)) : ojson(nullptr);
  return out;
}

void emit(const ojson& report) { std::cout << report.dump(2) << "\n"; }

// Query flags shared by the analysis subcommands.
struct QueryFlags {
  std::string outcome;
  std::string treatment;
  std::string adjust;
  bool strict = false;

  void attach(CLI::App* cmd, bool with_strict) {
    cmd->add_option("--outcome", outcome, "Outcome variable name")->required();
    cmd->add_option("--treatment", treatment, "Treatment variable name")->required();
    cmd->add_option("--adjust", adjust, "Comma-separated adjustment variable names");
    if (with_strict) {
      cmd->add_flag("--strict-defn", strict,
                    "Check conditioned descendants against the literal adjustment set minus the "
                    "descendant, instead of adding the treatment");
    }
  }

  seldoor::AdjustmentQuery resolve(const seldoor::Admg& g) const {
    seldoor::AdjustmentQuery q;
    q.outcome = g.index_of(outcome);
    q.treatment = g.index_of(treatment);
    q.z = resolve_names(g, split_names(adjust));
    q.strict = strict;
    return q;
  }
};

int cmd_check(const LoadedModel& model, const QueryFlags& flags, const std::string& criterion) {
  const seldoor::Admg g = seldoor::criteria_graph(model.file);
  const auto q = flags.resolve(g);
  seldoor::CriterionResult result;
  if (criterion == "selective") {
    result = seldoor::selective_door_criterion(g, q.z, q.treatment, q.outcome, q.strict);
  } else if (criterion == "backdoor") {
    result = seldoor::backdoor_criterion(g, q.z, q.treatment, q.outcome);
  } else {
    result = seldoor::single_door_precondition(g, q.z, q.treatment, q.outcome);
  }
  ojson r = report_header("check", model);
  r["criterion"] = criterion;
  if (criterion == "selective") r["strict_literal_set"] = q.strict;
  r["outcome"] = flags.outcome;
  r["treatment"] = flags.treatment;
  r["adjust"] = names_array(g, q.z);
  r["result"] = criterion_json(g, result);
  emit(r);
  return result.satisfied ? kExitOk : kExitNegative;
}

int cmd_effect(const LoadedModel& model, const QueryFlags& flags) {
  const seldoor::SemModel m = seldoor::to_sem_model(model.file);
  const auto q = flags.resolve(m.graph);
  const auto rep = seldoor::identify(m, q);
  ojson r = report_header("effect", model);
  r["outcome"] = flags.outcome;
  r["treatment"] = flags.treatment;
  r["adjust"] = names_array(m.graph, q.z);
  r["strict_literal_set"] = q.strict;
  r["criterion"] = criterion_json(m.graph, rep.criterion);
  r["beta"] = rep.beta;
  r["tau"] = rep.tau;
  r["gamma"] = rep.gamma;
  r["total_effect_unadjusted"] = rep.total_effect_unadjusted;
  r["s1"] = names_array(m.graph, rep.partition.s1);
  r["s2"] = names_array(m.graph, rep.partition.s2);
  r["backdoor_blocked"] = rep.backdoor_blocked;
  if (rep.bias_rhs) {
    r["bias_rhs"] = *rep.bias_rhs;
    ojson terms = ojson::array();
    for (const auto& t : rep.ledger) {
      ojson row;
      row["vertex"] = m.graph.name(t.p);
      row["gamma_ip"] = t.gamma_ip;
      row["tau_pj"] = t.tau_pj;
      row["contribution"] = -t.gamma_ip * t.tau_pj;
      terms.push_back(std::move(row));
    }
    r["bias_terms"] = std::move(terms);
  } else {
    r["bias_rhs"] = nullptr;
  }
  emit(r);
  return rep.criterion.satisfied ? kExitOk : kExitNegative;
}

int cmd_bias(const LoadedModel& model, const QueryFlags& flags) {
  const seldoor::SemModel m = seldoor::to_sem_model(model.file);
  const auto q = flags.resolve(m.graph);
  ojson r = report_header("bias", model);
  r["outcome"] = flags.outcome;
  r["treatment"] = flags.treatment;
  r["adjust"] = names_array(m.graph, q.z);
  try {
    const auto d = seldoor::bias_decomposition(m, q);
    r["gamma"] = d.gamma;
    r["rhs"] = d.rhs;
    r["identity_gap"] = d.identity_gap;
    r["s1"] = names_array(m.graph, d.partition.s1);
    r["s2"] = names_array(m.graph, d.partition.s2);
    ojson terms = ojson::array();
    for (const auto& t : d.terms) {
      ojson row;
      row["vertex"] = m.graph.name(t.p);
      row["gamma_ip"] = t.gamma_ip;
      row["tau_pj"] = t.tau_pj;
      row["contribution"] = -t.gamma_ip * t.tau_pj;
      terms.push_back(std::move(row));
    }
    r["terms"] = std::move(terms);
    emit(r);
    return kExitOk;
  } catch (const seldoor::PreconditionError& e) {
    r["error"] = e.what();
    r["witness_path"] = seldoor::format_path(m.graph, e.witness_path);
    emit(r);
    return kExitNegative;
  }
}

int cmd_verify(const LoadedModel& model, const QueryFlags& flags, std::uint64_t trials,
               std::uint64_t seed, double tol_eq) {
  const seldoor::Admg g = seldoor::criteria_graph(model.file);
  const auto q = flags.resolve(g);
  seldoor::NecessityOptions opt;
  opt.trials = trials;
  opt.tol_eq = tol_eq;
  const auto summary = seldoor::verify_necessity(g, q, seed, opt);
  ojson r = report_header("verify", model);
  r["outcome"] = flags.outcome;
  r["treatment"] = flags.treatment;
  r["adjust"] = names_array(g, q.z);
  r["strict_literal_set"] = q.strict;
  r["seed"] = seed;
  r["trials"] = summary.trials;
  r["criterion_satisfied"] = summary.criterion_satisfied;
  r["tol_eq"] = summary.tol_eq;
  r["agree_count"] = summary.agree_count;
  r["disagree_count"] = summary.disagree_count();
  r["max_abs_gamma"] = summary.trials ? ojson(summary.max_abs_gamma) : ojson(nullptr);
  r["min_abs_gamma"] = summary.trials ? ojson(summary.min_abs_gamma) : ojson(nullptr);
  r["within_policy"] = summary.within_policy;
  ojson rows = ojson::array();
  for (const auto& d : summary.disagreements) {
    ojson row;
    row["trial"] = d.trial;
    row["seed"] = d.seed;
    row["gamma"] = d.gamma;
    rows.push_back(std::move(row));
  }
  r["disagreements"] = std::move(rows);
  emit(r);
  return summary.within_policy ? kExitOk : kExitNegative;
}

int cmd_simulate(const LoadedModel& model, std::int64_t n, std::uint64_t seed,
                 const std::string& noise, const std::string& out_path) {
  const seldoor::SemModel m = seldoor::to_sem_model(model.file);
  const auto data = seldoor::sample_data(m, n, seed, parse_noise(noise));
  if (out_path.empty()) {
    seldoor::write_csv(data, std::cout);
    return kExitOk;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw seldoor::Error(seldoor::Errc::parse_error, "cannot open output file: " + out_path);
  seldoor::write_csv(data, out);
  return kExitOk;
}

int cmd_nonlinear_demo(const LoadedModel& model, const std::string& grid_csv, std::int64_t n,
                       std::uint64_t seed, const std::string& noise) {
  seldoor::InteractionDemoSpec spec = seldoor::to_demo_spec(model.file);
  spec.noise = parse_noise(noise);
  std::vector<double> grid;
  for (const auto& tok : split_names(grid_csv)) {
    try {
      std::size_t used = 0;
      grid.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw seldoor::Error(seldoor::Errc::parse_error, "grid point '" + tok + "' is not a number");
    }
  }
  const auto rep = seldoor::interaction_demo(spec, grid, n, seed);
  ojson r = report_header("nonlinear-demo", model);
  r["n"] = rep.n;
  r["seed"] = seed;
  r["noise"] = noise;
  r["function"] = spec.function;
  r["a_mx_hat"] = rep.a_mx_hat;
  r["a_mx_se"] = rep.a_mx_se;
  r["a_mz_hat"] = rep.a_mz_hat;
  r["tau_yx_hat"] = rep.tau_yx_hat;
  r["tau_yx_se"] = rep.tau_yx_se;
  r["a_yh_hat"] = rep.a_yh_hat;
  r["a_yh_se"] = rep.a_yh_se;
  r["tau_reference"] = rep.tau_reference;
  r["fd_step"] = rep.fd_step;
  ojson points = ojson::array();
  const bool product = spec.function == "product";
  for (const auto& p : rep.points) {
    ojson row;
    row["x"] = p.x;
    row["g_hat"] = p.g_hat;
    row["delta_hat"] = p.delta_hat;
    row["delta_se"] = p.delta_se;
    row["total_hat"] = p.total_hat;
    if (product) row["delta_reference"] = spec.a_yh * 2.0 * spec.a_mx * p.x;
    points.push_back(std::move(row));
  }
  r["points"] = std::move(points);
  emit(r);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adjustment-set analysis for linear models over mixed graphs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", seldoor::kVersionString);

  std::string model_path;
  QueryFlags flags;
  std::string criterion = "selective";
  std::uint64_t trials = 200;
  std::uint64_t seed = 1;
  double tol_eq = 1e-7;
  std::int64_t n_obs = 1000;
  std::string noise = "gaussian";
  std::string out_path;
  std::string grid_csv = "0,0.5,1,1.5,2,2.5,3";

  auto* check = app.add_subcommand("check", "Evaluate a graphical criterion for an adjustment set");
  check->add_option("model", model_path, "Model file (JSON)")->required();
  flags.attach(check, true);
  check->add_option("--criterion", criterion, "Criterion: selective, backdoor, or singledoor")
      ->check(CLI::IsMember({"selective", "backdoor", "singledoor"}));

  auto* effect = app.add_subcommand("effect", "Report regression coefficient, controlled effect, and bias");
  effect->add_option("model", model_path, "Model file (JSON)")->required();
  flags.attach(effect, true);

  auto* bias = app.add_subcommand("bias", "Decompose the post-treatment bias into per-vertex terms");
  bias->add_option("model", model_path, "Model file (JSON)")->required();
  flags.attach(bias, false);

  auto* verify = app.add_subcommand("verify", "Monte Carlo check that the criterion verdict matches the bias");
  verify->add_option("model", model_path, "Model file (JSON)")->required();
  flags.attach(verify, true);
  verify->add_option("--trials", trials, "Number of random parameterizations");
  verify->add_option("--seed", seed, "Master seed");
  verify->add_option("--tol-eq", tol_eq, "Bias magnitude treated as zero");

  auto* simulate = app.add_subcommand("simulate", "Draw observations from the model and write CSV");
  simulate->add_option("model", model_path, "Model file (JSON)")->required();
  simulate->add_option("--n", n_obs, "Number of observations")->check(CLI::NonNegativeNumber);
  simulate->add_option("--seed", seed, "Seed");
  simulate->add_option("--noise", noise, "Noise kind: gaussian, uniform, or shifted-exponential")
      ->check(CLI::IsMember({"gaussian", "uniform", "shifted-exponential"}));
  simulate->add_option("--out", out_path, "Output CSV path (stdout when omitted)");

  auto* demo = app.add_subcommand("nonlinear-demo", "Estimate the interaction-term effect decomposition");
  demo->add_option("model", model_path, "Demo model file (JSON, one interaction variable)")->required();
  demo->add_option("--grid", grid_csv, "Comma-separated evaluation points");
  demo->add_option("--n", n_obs, "Number of observations")->check(CLI::PositiveNumber);
  demo->add_option("--seed", seed, "Seed");
  demo->add_option("--noise", noise, "Noise kind: gaussian, uniform, or shifted-exponential")
      ->check(CLI::IsMember({"gaussian", "uniform", "shifted-exponential"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return kExitInputError;
  }

  try {
    const LoadedModel model = load_model(model_path);
    if (check->parsed()) return cmd_check(model, flags, criterion);
    if (effect->parsed()) return cmd_effect(model, flags);
    if (bias->parsed()) return cmd_bias(model, flags);
    if (verify->parsed()) return cmd_verify(model, flags, trials, seed, tol_eq);
    if (simulate->parsed()) return cmd_simulate(model, n_obs, seed, noise, out_path);
    if (demo->parsed()) return cmd_nonlinear_demo(model, grid_csv, n_obs, seed, noise);
  } catch (const seldoor::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}
