#include "contoursel/contoursel.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "common/error.hpp"
#include "harness/harness.hpp"
#include "neural/model.hpp"
#include "perfdata/perfdata.hpp"
#include "prober/prober.hpp"
#include "suite/suite.hpp"

struct cs_config {
  contoursel::cli::ExperimentConfig value;
};
struct cs_instance {
  contoursel::suite::ProblemInstance value;
};
struct cs_stack {
  contoursel::probe::ContourStack value;
};
struct cs_model {
  contoursel::nn::Model value;
};

namespace {

using contoursel::Error;
using contoursel::ErrorCode;

thread_local std::string g_last_error;

cs_status setError(cs_status status, const std::string& what) {
  g_last_error = what;
  return status;
}

// Runs f, translating exceptions into status codes.
template <class F>
cs_status guarded(F&& f) {
  try {
    f();
    return CS_OK;
  } catch (const Error& e) {
    return setError(static_cast<cs_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return setError(CS_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return setError(CS_INTERNAL, e.what());
  } catch (...) {
    return setError(CS_INTERNAL, "unknown error");
  }
}

void needArg(bool ok, const char* what) {
  if (!ok) contoursel::fail(ErrorCode::invalid_argument, what);
}

void copyOut(const std::string& s, char* buf, size_t cap, size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (!buf) return;
  needArg(cap >= s.size() + 1, "output buffer too small");
  std::memcpy(buf, s.c_str(), s.size() + 1);
}

}  // namespace

extern "C" {

const char* cs_version(void) { return "1.0.0"; }

const char* cs_last_error(void) { return g_last_error.c_str(); }

const char* cs_status_name(cs_status status) {
  if (status == CS_OK) return "ok";
  if (status < CS_INVALID_ARGUMENT || status > CS_CHECK_FAILED) return "unknown";
  return contoursel::error_code_name(static_cast<ErrorCode>(status));
}

cs_status cs_config_default(cs_config** out) {
  return guarded([&] {
    needArg(out, "out is NULL");
    *out = new cs_config{contoursel::cli::default_config()};
  });
}

cs_status cs_config_parse(const char* json, cs_config** out) {
  return guarded([&] {
    needArg(json && out, "NULL argument");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(json);
    } catch (const nlohmann::json::exception& e) {
      contoursel::fail(ErrorCode::parse, std::string("config: ") + e.what());
    }
    *out = new cs_config{contoursel::cli::config_from_json(j)};
  });
}

cs_status cs_config_load(const char* path, cs_config** out) {
  return guarded([&] {
    needArg(path && out, "NULL argument");
    *out = new cs_config{contoursel::cli::load_config(path)};
  });
}

cs_status cs_config_apply(cs_config* config, const char* json_patch) {
  return guarded([&] {
    needArg(config && json_patch, "NULL argument");
    nlohmann::json patch;
    try {
      patch = nlohmann::json::parse(json_patch);
    } catch (const nlohmann::json::exception& e) {
      contoursel::fail(ErrorCode::parse, std::string("config patch: ") + e.what());
    }
    config->value = contoursel::cli::apply_patch(config->value, patch);
  });
}

cs_status cs_config_to_json(const cs_config* config, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    needArg(config, "config is NULL");
    copyOut(contoursel::cli::to_json(config->value).dump(2), buf, cap, needed);
  });
}

void cs_config_free(cs_config* config) { delete config; }

cs_status cs_run_command(const cs_config* config, const char* command, char* summary, size_t cap,
                         size_t* needed) {
  return guarded([&] {
    needArg(config && command, "NULL argument");
    const auto text = contoursel::cli::run_command(command, config->value);
    // The command has run; never fail on the summary buffer, truncate instead.
    if (needed) *needed = text.size() + 1;
    if (summary && cap > 0) {
      const size_t n = std::min(cap - 1, text.size());
      std::memcpy(summary, text.data(), n);
      summary[n] = '\0';
    }
  });
}

cs_status cs_instance_create(const char* function, int dimension, int instance_index, uint64_t seed,
                             cs_instance** out) {
  return guarded([&] {
    needArg(function && out, "NULL argument");
    using namespace contoursel::suite;
    const auto code = parse_function_code(function);
    *out = new cs_instance{make_instance({kind_of(code), code, dimension, instance_index}, seed)};
  });
}

cs_status cs_instance_dimension(const cs_instance* inst, int* dimension) {
  return guarded([&] {
    needArg(inst && dimension, "NULL argument");
    *dimension = inst->value.dimension();
  });
}

cs_status cs_instance_optimum(const cs_instance* inst, double* f_opt, double* x_opt, size_t x_len) {
  return guarded([&] {
    needArg(inst, "instance is NULL");
    if (!inst->value.is_soo())
      contoursel::fail(ErrorCode::contract, "bi-objective instances have no single optimum");
    if (f_opt) *f_opt = inst->value.f_opt();
    if (x_opt) {
      const auto x = inst->value.x_opt();
      needArg(x_len >= x.size(), "x_opt buffer too small");
      std::copy(x.begin(), x.end(), x_opt);
    }
  });
}

cs_status cs_instance_evaluate(const cs_instance* inst, const double* x, size_t n, double* f) {
  return guarded([&] {
    needArg(inst && x && f, "NULL argument");
    needArg(n == static_cast<size_t>(inst->value.dimension()), "x length does not match the dimension");
    *f = inst->value.evaluate_soo({x, n});
  });
}

cs_status cs_instance_evaluate_moo(const cs_instance* inst, const double* x, size_t n, double* f1,
                                   double* f2) {
  return guarded([&] {
    needArg(inst && x && f1 && f2, "NULL argument");
    needArg(n == static_cast<size_t>(inst->value.dimension()), "x length does not match the dimension");
    const auto [a, b] = inst->value.evaluate_moo({x, n});
    *f1 = a;
    *f2 = b;
  });
}

void cs_instance_free(cs_instance* inst) { delete inst; }

cs_status cs_stack_probe(const char* function, int dimension, uint64_t master_seed, int r_probe,
                         int r_out, int levels, cs_stack** out) {
  return guarded([&] {
    needArg(function && out, "NULL argument");
    const auto code = contoursel::suite::parse_function_code(function);
    contoursel::probe::ProbeParams params{r_probe, r_out, levels};
    *out = new cs_stack{contoursel::harness::probe_soo_config({code, dimension}, master_seed, params)};
  });
}

cs_status cs_stack_read(const char* path, cs_stack** out) {
  return guarded([&] {
    needArg(path && out, "NULL argument");
    *out = new cs_stack{contoursel::probe::read_stack(path)};
  });
}

cs_status cs_stack_write(const cs_stack* stack, const char* path) {
  return guarded([&] {
    needArg(stack && path, "NULL argument");
    contoursel::probe::write_stack(stack->value, path);
  });
}

cs_status cs_stack_shape(const cs_stack* stack, int* views, int* resolution) {
  return guarded([&] {
    needArg(stack, "stack is NULL");
    if (views) *views = stack->value.view_count();
    if (resolution) *resolution = stack->value.resolution();
  });
}

cs_status cs_stack_evaluations(const cs_stack* stack, int64_t* evaluations) {
  return guarded([&] {
    needArg(stack && evaluations, "NULL argument");
    *evaluations = stack->value.evaluations_spent;
  });
}

cs_status cs_stack_view(const cs_stack* stack, int view, double* out, size_t len) {
  return guarded([&] {
    needArg(stack && out, "NULL argument");
    needArg(view >= 0 && view < stack->value.view_count(), "view index out of range");
    const auto& values = stack->value.views[static_cast<size_t>(view)].values;
    needArg(len >= values.size(), "output buffer too small");
    std::copy(values.begin(), values.end(), out);
  });
}

void cs_stack_free(cs_stack* stack) { delete stack; }

cs_status cs_model_create(const char* spec_json, uint64_t seed, cs_model** out) {
  return guarded([&] {
    needArg(spec_json && out, "NULL argument");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(spec_json);
    } catch (const nlohmann::json::exception& e) {
      contoursel::fail(ErrorCode::parse, std::string("model spec: ") + e.what());
    }
    *out = new cs_model{contoursel::nn::Model(contoursel::nn::spec_from_json(j), seed)};
  });
}

cs_status cs_model_load(const char* path, cs_model** out) {
  return guarded([&] {
    needArg(path && out, "NULL argument");
    *out = new cs_model{contoursel::nn::load_model(path)};
  });
}

cs_status cs_model_save(const cs_model* model, const char* path) {
  return guarded([&] {
    needArg(model && path, "NULL argument");
    contoursel::nn::save_model(model->value, path);
  });
}

cs_status cs_model_parameter_count(const cs_model* model, size_t* count) {
  return guarded([&] {
    needArg(model && count, "NULL argument");
    *count = model->value.parameter_count();
  });
}

cs_status cs_model_predict(const cs_model* model, const cs_stack* const* stacks, size_t stack_count,
                           int dimension, double* out, size_t len) {
  return guarded([&] {
    needArg(model && stacks && out, "NULL argument");
    std::vector<const contoursel::probe::ContourStack*> ptrs;
    for (size_t i = 0; i < stack_count; ++i) {
      needArg(stacks[i], "NULL stack");
      ptrs.push_back(&stacks[i]->value);
    }
    const auto pred = model->value.predict(contoursel::harness::to_model_input(ptrs, dimension));
    needArg(len >= pred.size(), "output buffer too small");
    std::copy(pred.begin(), pred.end(), out);
  });
}

cs_status cs_gradcheck(const char* variant, int residual_blocks, uint64_t seed,
                       double* max_relative_error) {
  return guarded([&] {
    needArg(variant && max_relative_error, "NULL argument");
    const auto spec = contoursel::nn::gradcheck_spec(contoursel::nn::parse_variant(variant), residual_blocks);
    *max_relative_error = contoursel::nn::grad_check_random(spec, seed).max_relative_error;
  });
}

void cs_model_free(cs_model* model) { delete model; }

cs_status cs_hypervolume_2d(const double* points, size_t count, double ref1, double ref2, double* hv) {
  return guarded([&] {
    needArg(hv && (points || count == 0), "NULL argument");
    std::vector<contoursel::perf::Point2> pts(count);
    for (size_t i = 0; i < count; ++i) pts[i] = {points[2 * i], points[2 * i + 1]};
    *hv = contoursel::perf::hypervolume_2d(pts, {ref1, ref2});
  });
}

cs_status cs_wilcoxon(const double* a, const double* b, size_t n, cs_tie_policy ties, double* w,
                      double* p, size_t* n_effective) {
  return guarded([&] {
    needArg(a && b, "NULL argument");
    needArg(ties == CS_TIES_DROP || ties == CS_TIES_PRATT, "unknown tie policy");
    const auto r = contoursel::harness::wilcoxon_signed_rank(
        {a, n}, {b, n},
        ties == CS_TIES_DROP ? contoursel::harness::TiePolicy::drop : contoursel::harness::TiePolicy::pratt);
    if (w) *w = r.w;
    if (p) *p = r.p;
    if (n_effective) *n_effective = r.n_effective;
  });
}

}  // extern "C"
