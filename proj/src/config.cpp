#include "vvs/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vvs {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<double> parse_list(const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("expected a boolean, got '" + v + "'");
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw std::invalid_argument("config: invalid value '" + value + "' for key '" + key +
                              "'");
}

}  // namespace

void apply_config_option(ExperimentConfig& cfg, const std::string& key,
                         const std::string& value) {
  if (key == "problem") {
    if (value == "sinker") cfg.problem = ProblemKind::Sinker;
    else if (value == "viscoplastic") cfg.problem = ProblemKind::Viscoplastic;
    else if (value == "constant") cfg.problem = ProblemKind::Constant;
    else bad_value(key, value);
  } else if (key == "nx") cfg.nx = std::stoi(value);
  else if (key == "ny") cfg.ny = std::stoi(value);
  else if (key == "levels") cfg.levels = std::stoi(value);
  else if (key == "k") cfg.k = std::stoi(value);
  else if (key == "gammas") {
    cfg.gammas = parse_list(value);
    if (cfg.gammas.empty()) throw std::invalid_argument("config: empty gamma list");
  } else if (key == "drs") {
    cfg.drs = parse_list(value);
    if (cfg.drs.empty()) throw std::invalid_argument("config: empty DR list");
  } else if (key == "variant") {
    if (value == "P1") cfg.variant = SchurVariant::P1;
    else if (value == "P2") cfg.variant = SchurVariant::P2;
    else bad_value(key, value);
  } else if (key == "w") {
    if (value == "Mp") cfg.w = WChoice::Mp;
    else if (value == "MpInvVisc") cfg.w = WChoice::MpInvVisc;
    else bad_value(key, value);
  } else if (key == "smoother") {
    if (value == "robust") cfg.smoother = SmootherKind::Star;
    else if (value == "jacobi") cfg.smoother = SmootherKind::Jacobi;
    else bad_value(key, value);
  } else if (key == "transfer") {
    if (value == "robust") cfg.transfer = TransferKind::Robust;
    else if (value == "standard") cfg.transfer = TransferKind::Standard;
    else bad_value(key, value);
  } else if (key == "cycle") {
    if (value == "V") cfg.cycle = CycleType::V;
    else if (value == "F") cfg.cycle = CycleType::F;
    else bad_value(key, value);
  } else if (key == "pre_smooth") cfg.pre_smooth = std::stoi(value);
  else if (key == "post_smooth") cfg.post_smooth = std::stoi(value);
  else if (key == "rtol") cfg.rtol = std::stod(value);
  else if (key == "maxit") cfg.maxit = std::stoi(value);
  else if (key == "inner") {
    if (value == "mg") cfg.inner = InnerSolver::Multigrid;
    else if (value == "lu") cfg.inner = InnerSolver::Lu;
    else bad_value(key, value);
  } else if (key == "system") {
    if (value == "stokes") cfg.system = SystemKind::Stokes;
    else if (value == "topleft") cfg.system = SystemKind::TopLeft;
    else bad_value(key, value);
  } else if (key == "sinker_n") cfg.sinker_n = std::stoi(value);
  else if (key == "sinker_omega") cfg.sinker_omega = std::stod(value);
  else if (key == "sinker_delta") cfg.sinker_delta = std::stod(value);
  else if (key == "sinker_beta") cfg.sinker_beta = std::stod(value);
  else if (key == "seed") cfg.seed = std::stoull(value);
  else if (key == "const_mu") cfg.const_mu = std::stod(value);
  else if (key == "tau_y") cfg.tau_y = std::stod(value);
  else if (key == "newton_rtol") cfg.newton_rtol = std::stod(value);
  else if (key == "newton_maxit") cfg.newton_maxit = std::stoi(value);
  else if (key == "linear_rheology") cfg.linear_rheology = parse_bool(value);
  else if (key == "verify_tol") cfg.verify_tol = std::stod(value);
  else if (key == "debug_scale_shat") cfg.debug_scale_shat = std::stod(value);
  else if (key == "verify_max_dofs") cfg.verify_max_dofs = std::stoi(value);
  else if (key == "output") cfg.output = value;
  else if (key == "fields_output") cfg.fields_output = value;
  else if (key == "dump_dir") cfg.dump_dir = value;
  else if (key == "threads") cfg.threads = std::stoi(value);
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

namespace {

ExperimentConfig parse_stream(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  " is not 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      apply_config_option(cfg, key, value);
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception&) {
      bad_value(key, value);
    }
  }
  return cfg;
}

}  // namespace

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
  return parse_stream(in);
}

ExperimentConfig parse_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_stream(in);
}

MgOptions ExperimentConfig::mg_options() const {
  MgOptions o;
  o.smoother = smoother;
  o.transfer = transfer;
  o.cycle = cycle;
  o.pre_smooth = pre_smooth;
  o.post_smooth = post_smooth;
  return o;
}

std::string config_help() {
  return
      "Config file: UTF-8 lines of `key = value`, `#` starts a comment.\n"
      "Keys:\n"
      "  problem        sinker | viscoplastic | constant\n"
      "  nx, ny         coarsest mesh cells (sinker/constant)\n"
      "  levels         multigrid levels (finest = coarsest refined levels-1 times)\n"
      "  k              velocity polynomial degree (>= 2); pressure is P_{k-1}^disc\n"
      "  gammas         comma list of AL parameters\n"
      "  drs            comma list of viscosity contrasts DR(mu)\n"
      "  variant        P1 | P2 (Schur approximation)\n"
      "  w              Mp | MpInvVisc (augmentation weight)\n"
      "  smoother       robust | jacobi\n"
      "  transfer       robust | standard\n"
      "  cycle          V | F\n"
      "  pre_smooth, post_smooth   smoothing steps per level (default 5)\n"
      "  rtol, maxit    FGMRES relative tolerance / iteration cap (1e-6, 300)\n"
      "  inner          mg | lu  ((1,1)-block solver inside the preconditioner)\n"
      "  system         stokes | topleft (full saddle solve, or FGMRES on A_gamma)\n"
      "  sinker_n       sinker count; 0 = auto (8, or 24 on coarse meshes >= 32x32)\n"
      "  sinker_omega, sinker_delta, sinker_beta, seed\n"
      "  const_mu       viscosity of the constant problem\n"
      "  tau_y, newton_rtol, newton_maxit, linear_rheology   viscoplastic controls\n"
      "  verify_tol, debug_scale_shat, verify_max_dofs       verify controls\n"
      "  output         CSV output path\n"
      "  fields_output  viscoplastic field CSV path\n"
      "  dump_dir       Matrix Market dump directory\n"
      "  threads        concurrent (gamma, DR) runs in `table`\n";
}

}  // namespace vvs
