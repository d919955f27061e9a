#include "vvstokes.h"

#include <fstream>
#include <iostream>
#include <string>

#include "vvs/experiments.hpp"
#include "vvs/spectral.hpp"

namespace {

thread_local std::string g_last_error;

int fail(int code, const std::string& what) {
  g_last_error = what;
  return code;
}

int run_guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const std::invalid_argument& e) {
    return fail(VVS_ERR_CONFIG, e.what());
  } catch (const std::exception& e) {
    return fail(VVS_ERR_RUN, e.what());
  }
}

}  // namespace

struct vvs_run {
  vvs::ExperimentConfig cfg;
};

extern "C" {

const char* vvs_version(void) { return "0.1.0"; }

const char* vvs_last_error(void) { return g_last_error.c_str(); }

int vvs_run_create(vvs_run** out, const char* config_path) {
  if (!out || !config_path) return fail(VVS_ERR_CONFIG, "null argument");
  *out = nullptr;
  return run_guarded([&] {
    auto run = std::make_unique<vvs_run>();
    run->cfg = vvs::parse_config_file(config_path);
    *out = run.release();
    return VVS_OK;
  });
}

int vvs_run_create_from_string(vvs_run** out, const char* config_text) {
  if (!out || !config_text) return fail(VVS_ERR_CONFIG, "null argument");
  *out = nullptr;
  return run_guarded([&] {
    auto run = std::make_unique<vvs_run>();
    run->cfg = vvs::parse_config_text(config_text);
    *out = run.release();
    return VVS_OK;
  });
}

int vvs_run_set_option(vvs_run* run, const char* key, const char* value) {
  if (!run || !key || !value) return fail(VVS_ERR_CONFIG, "null argument");
  return run_guarded([&] {
    vvs::apply_config_option(run->cfg, key, value);
    return VVS_OK;
  });
}

int vvs_run_table(vvs_run* run) {
  if (!run) return fail(VVS_ERR_CONFIG, "null handle");
  return run_guarded([&] {
    const vvs::TableResult t = vvs::run_table(run->cfg);
    vvs::print_table(t, std::cout);
    if (!run->cfg.output.empty()) {
      std::ofstream os(run->cfg.output);
      if (!os) return fail(VVS_ERR_RUN, "cannot open output file");
      vvs::write_table_csv(t, os);
    }
    return VVS_OK;
  });
}

int vvs_run_verify(vvs_run* run) {
  if (!run) return fail(VVS_ERR_CONFIG, "null handle");
  return run_guarded([&] {
    const vvs::VerifyResult v = vvs::run_verify(run->cfg);
    vvs::write_bound_reports_csv(v.reports, run->cfg.variant, std::cout);
    if (!run->cfg.output.empty()) {
      std::ofstream os(run->cfg.output);
      if (!os) return fail(VVS_ERR_RUN, "cannot open output file");
      vvs::write_bound_reports_csv(v.reports, run->cfg.variant, os);
    }
    if (!v.all_hold) return fail(VVS_ERR_RUN, "spectral bounds violated");
    return VVS_OK;
  });
}

int vvs_run_nonlinear(vvs_run* run) {
  if (!run) return fail(VVS_ERR_CONFIG, "null handle");
  return run_guarded([&] {
    const vvs::NonlinearResult r = vvs::run_nonlinear(run->cfg);
    vvs::write_nonlinear_csv(r, std::cout);
    std::cout << "# average linear iterations per gamma:\n";
    for (const auto& [gamma, avg] : r.average_iterations)
      std::cout << "#   gamma=" << gamma << "  avg=" << avg << "\n";
    if (!run->cfg.output.empty()) {
      std::ofstream os(run->cfg.output);
      if (!os) return fail(VVS_ERR_RUN, "cannot open output file");
      vvs::write_nonlinear_csv(r, os);
    }
    return VVS_OK;
  });
}

void vvs_run_destroy(vvs_run* run) { delete run; }

}  // extern "C"
